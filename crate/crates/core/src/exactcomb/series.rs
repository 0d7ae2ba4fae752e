//! Truncated power series with exact rational coefficients.
//!
//! Holds the generating functions of the tautological ring: the partition
//! series `P`, the multiset series `Q_n` and the Hilbert series of `R_n`.

use std::ops::Mul;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{binomial, partition_numbers, to_rational};

/// Prefix `c_0 + c_1 z + ... + c_D z^D` of a formal power series.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    coefficients: Vec<BigRational>,
}

impl TruncatedSeries {
    /// Series truncated at degree `order` with every coefficient zero.
    pub fn zero(order: usize) -> Self {
        Self {
            coefficients: vec![BigRational::zero(); order + 1],
        }
    }

    pub fn one(order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coefficients[0] = BigRational::one();
        s
    }

    /// Build from coefficients `c_0..c_D`; an empty vector is the zero series of order 0.
    pub fn from_coefficients(mut coefficients: Vec<BigRational>) -> Self {
        if coefficients.is_empty() {
            coefficients.push(BigRational::zero());
        }
        Self { coefficients }
    }

    pub fn from_integers<I: IntoIterator<Item = BigUint>>(values: I) -> Self {
        Self::from_coefficients(values.into_iter().map(|v| to_rational(&v)).collect())
    }

    /// Truncation order `D`.
    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficients(&self) -> &[BigRational] {
        &self.coefficients
    }

    /// Coefficient of `z^degree`; zero past the truncation order is *not*
    /// implied, so this returns `None` there.
    pub fn coeff(&self, degree: usize) -> Option<&BigRational> {
        self.coefficients.get(degree)
    }

    /// Re-truncate at a (possibly smaller) order. Extending pads with zeros.
    pub fn truncate(&self, order: usize) -> Self {
        let mut c = self.coefficients.clone();
        c.resize(order + 1, BigRational::zero());
        Self { coefficients: c }
    }

    /// `f(z) -> f(z^k)`, keeping the truncation order `k * D`.
    pub fn substitute_power(&self, k: usize) -> Self {
        assert!(k >= 1, "substitution exponent must be positive");
        let mut out = Self::zero(self.order() * k);
        for (i, c) in self.coefficients.iter().enumerate() {
            out.coefficients[i * k] = c.clone();
        }
        out
    }

    /// Multiply in place by `1/(1 - z^step)`, i.e. a running sum with stride `step`.
    pub fn divide_by_one_minus_power(&mut self, step: usize) {
        assert!(step >= 1);
        for i in step..self.coefficients.len() {
            let prev = self.coefficients[i - step].clone();
            self.coefficients[i] += prev;
        }
    }

    /// Evaluate the truncated polynomial at an exact point.
    pub fn eval(&self, z: &BigRational) -> BigRational {
        self.coefficients
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * z + c)
    }

    /// True when every odd-degree coefficient vanishes.
    pub fn is_even(&self) -> bool {
        self.coefficients
            .iter()
            .skip(1)
            .step_by(2)
            .all(|c| c.is_zero())
    }
}

impl Mul for &TruncatedSeries {
    type Output = TruncatedSeries;

    /// Cauchy product truncated at the smaller of the two orders.
    fn mul(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        let order = self.order().min(rhs.order());
        let mut out = TruncatedSeries::zero(order);
        for (i, a) in self.coefficients.iter().enumerate().take(order + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coefficients.iter().enumerate().take(order + 1 - i) {
                if !b.is_zero() {
                    out.coefficients[i + j] += a * b;
                }
            }
        }
        out
    }
}

/// Partition generating function `P(z) = sum p(j) z^j` truncated at `order`.
pub fn partition_series(order: usize) -> TruncatedSeries {
    TruncatedSeries::from_integers(partition_numbers(order))
}

/// `Q_n(z) = sum_j C(n+j-1, j) z^j`, the number of size-`j` multisets on `n` letters.
pub fn multiset_series(n: u32, order: usize) -> TruncatedSeries {
    if n == 0 {
        return TruncatedSeries::one(order);
    }
    TruncatedSeries::from_integers((0..=order as u64).map(|j| binomial(u64::from(n) + j - 1, j)))
}

/// Hilbert series of `R_n` graded by `z` (generators in even degree),
/// truncated at degree `2 * depth`.
///
/// Computed from the product `prod_{i<=n} 1/(1-z^2) * prod_{j>=1} 1/(1-z^{2j})`;
/// factors with `2j > 2 * depth` are the identity at this order and are skipped.
pub fn hilbert_series(n: u32, depth: usize) -> TruncatedSeries {
    let mut s = TruncatedSeries::one(2 * depth);
    for _ in 0..n {
        s.divide_by_one_minus_power(2);
    }
    for j in 1..=depth {
        s.divide_by_one_minus_power(2 * j);
    }
    s
}

/// `dim R_n^{2i}` for `i = 0..=depth`, via the convolution `Q_n * P`.
pub fn graded_dimensions(n: u32, depth: usize) -> Vec<BigUint> {
    let p = partition_numbers(depth);
    (0..=depth)
        .map(|i| {
            (0..=i)
                .map(|j| multiset_count(n, j as u64) * &p[i - j])
                .sum()
        })
        .collect()
}

fn multiset_count(n: u32, size: u64) -> BigUint {
    match (n, size) {
        (0, 0) => BigUint::one(),
        (0, _) => BigUint::zero(),
        _ => binomial(u64::from(n) + size - 1, size),
    }
}
