//! Dense univariate polynomials over a [`FiniteField`], coefficients low to high.

use super::field::{Fe, FiniteField};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Poly(pub Vec<Fe>);

impl Poly {
    pub fn new(mut coeffs: Vec<Fe>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Self(coeffs)
    }

    pub fn zero() -> Self {
        Self(Vec::new())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> Fe {
        self.0.get(i).copied().unwrap_or(0)
    }

    pub fn eval(&self, f: &FiniteField, x: Fe) -> Fe {
        self.0.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, x), c))
    }

    pub fn add(&self, f: &FiniteField, other: &Self) -> Self {
        let n = self.0.len().max(other.0.len());
        Self::new((0..n).map(|i| f.add(self.coeff(i), other.coeff(i))).collect())
    }

    pub fn mul(&self, f: &FiniteField, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![0; self.0.len() + other.0.len() - 1];
        for (i, &a) in self.0.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.0.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(a, b));
            }
        }
        Self::new(out)
    }

    pub fn scale(&self, f: &FiniteField, c: Fe) -> Self {
        Self::new(self.0.iter().map(|&a| f.mul(a, c)).collect())
    }

    pub fn derivative(&self, f: &FiniteField) -> Self {
        Self::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| f.mul(f.from_int(i as i64), c))
                .collect(),
        )
    }

    pub fn rem(&self, f: &FiniteField, divisor: &Self) -> Self {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let lead_inv = f.inv(divisor.0[dd]).expect("nonzero leading coefficient");
        let mut r = self.0.clone();
        while r.len() > dd {
            let top = *r.last().unwrap();
            let shift = r.len() - 1 - dd;
            if top != 0 {
                let factor = f.mul(top, lead_inv);
                for (i, &c) in divisor.0.iter().enumerate() {
                    r[shift + i] = f.sub(r[shift + i], f.mul(factor, c));
                }
            }
            r.pop();
        }
        Self::new(r)
    }

    pub fn monic(&self, f: &FiniteField) -> Self {
        match self.0.last() {
            None => Self::zero(),
            Some(&lead) => self.scale(f, f.inv(lead).unwrap()),
        }
    }

    /// Monic gcd (zero if both inputs are zero).
    pub fn gcd(&self, f: &FiniteField, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(f, &b);
            a = b;
            b = r;
        }
        a.monic(f)
    }

    /// Map coefficients through a field embedding.
    pub fn map(&self, map: impl Fn(Fe) -> Fe) -> Self {
        Self::new(self.0.iter().map(|&c| map(c)).collect())
    }

    /// `x^n p(1/x)` for a formal degree `n >= deg p`.
    pub fn reversed(&self, formal_degree: usize) -> Self {
        let mut c = self.0.clone();
        c.resize(formal_degree + 1, 0);
        c.reverse();
        Self::new(c)
    }
}
