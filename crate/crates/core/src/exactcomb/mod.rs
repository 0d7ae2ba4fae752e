//! Exact combinatorics behind the Poisson prediction: partition numbers,
//! multiset counts, Hilbert series of the tautological ring, Stirling
//! numbers, the mean `lambda(q) = q + 1 + 1/(q-1)` and its moments.

pub mod certified;
pub mod series;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

pub use certified::{
    decimal_string, exp_neg, poisson_falling_moment, poisson_pmf, poisson_pmf_table,
    poisson_raw_moment, Certified,
};
pub use series::{graded_dimensions, hilbert_series, multiset_series, partition_series, TruncatedSeries};

use crate::error::{LabError, Result};

/// Exact rational in lowest terms with positive denominator.
pub type ExactRational = BigRational;

/// `"num/den"` rendering used by every serialized exact quantity.
pub fn ratio_string(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Parse a `"num/den"` (or bare integer) string back into an exact rational.
pub fn parse_ratio(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n, d))
        }
        None => s.parse::<BigInt>().ok().map(BigRational::from_integer),
    }
}

pub(crate) fn to_rational(x: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(x.clone()))
}

pub(crate) fn rational_from_u64(x: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// `p(0..=depth)` by Euler's pentagonal-number recurrence.
pub fn partition_numbers(depth: usize) -> Vec<BigUint> {
    let mut p: Vec<BigInt> = Vec::with_capacity(depth + 1);
    p.push(BigInt::one());
    for m in 1..=depth {
        let mut acc = BigInt::zero();
        for k in 1.. {
            let k = k as usize;
            let g1 = k * (3 * k - 1) / 2;
            if g1 > m {
                break;
            }
            let g2 = k * (3 * k + 1) / 2;
            let mut t = p[m - g1].clone();
            if g2 <= m {
                t += &p[m - g2];
            }
            if k % 2 == 1 {
                acc += t;
            } else {
                acc -= t;
            }
        }
        p.push(acc);
    }
    p.into_iter()
        .map(|v| v.to_biguint().expect("partition numbers are nonnegative"))
        .collect()
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

pub fn factorial(n: u32) -> BigUint {
    (1..=u64::from(n)).fold(BigUint::one(), |acc, i| acc * i)
}

/// `lambda(q) = q + 1 + 1/(q-1)`.
pub fn lambda_of_q(q: u64) -> Result<BigRational> {
    if q < 2 {
        return Err(LabError::FieldSizeTooSmall(q));
    }
    let lam = rational_from_u64(q)
        + BigRational::one()
        + BigRational::new(BigInt::one(), BigInt::from(q - 1));
    debug_assert_eq!(
        lam,
        BigRational::new(BigInt::from(q) * BigInt::from(q), BigInt::from(q - 1))
    );
    Ok(lam)
}

/// Table `S(n, k)` for `0 <= k <= n <= n_max` from `S(n,k) = k S(n-1,k) + S(n-1,k-1)`.
pub fn stirling2_table(n_max: u32) -> Vec<Vec<BigUint>> {
    let n_max = n_max as usize;
    let mut t = vec![vec![BigUint::zero(); n_max + 1]; n_max + 1];
    t[0][0] = BigUint::one();
    for n in 1..=n_max {
        for k in 1..=n {
            t[n][k] = &t[n - 1][k] * k as u64 + &t[n - 1][k - 1];
        }
    }
    t
}

/// Stirling number of the second kind.
pub fn stirling2(n: u32, k: u32) -> Result<BigUint> {
    if k < 1 || k > n {
        return Err(LabError::StirlingRange { n, k });
    }
    Ok(stirling2_table(n)[n as usize][k as usize].clone())
}

/// Signed Stirling numbers of the first kind, `(x)_n = sum_k s(n,k) x^k`.
pub fn stirling1_signed_table(n_max: u32) -> Vec<Vec<BigInt>> {
    let n_max = n_max as usize;
    let mut t = vec![vec![BigInt::zero(); n_max + 1]; n_max + 1];
    t[0][0] = BigInt::one();
    for n in 1..=n_max {
        for k in 1..=n {
            t[n][k] = &t[n - 1][k - 1] - BigInt::from(n - 1) * &t[n - 1][k];
        }
    }
    t
}

/// Predicted `E[N^n] = sum_i S(n,i) lambda^i`.
pub fn predicted_moment(n: u32, q: u64) -> Result<BigRational> {
    let lam = lambda_of_q(q)?;
    if n == 0 {
        return Ok(BigRational::one());
    }
    let table = stirling2_table(n);
    let mut power = BigRational::one();
    let mut acc = BigRational::zero();
    for s in table[n as usize].iter().skip(1) {
        power *= &lam;
        acc += to_rational(s) * &power;
    }
    Ok(acc)
}

/// Predicted falling moment `E[(N)_n] = lambda^n`; `n = 0` gives 1.
pub fn predicted_falling_moment(n: u32, q: u64) -> Result<BigRational> {
    Ok(num_traits::pow(lambda_of_q(q)?, n as usize))
}

/// `q^n (1 - 1/q)^{-n}`: the limit of `q^n HS_{R_n}(q^{-1/2}) / HS_{R_0}(q^{-1/2})`,
/// since `HS_{R_n} = HS_{R_0} / (1 - z^2)^n`.
pub fn hs_ratio_closed_form(n: u32, q: u64) -> Result<BigRational> {
    if q < 2 {
        return Err(LabError::FieldSizeTooSmall(q));
    }
    let qq = rational_from_u64(q);
    let factor = &qq / (BigRational::one() - BigRational::one() / &qq);
    let out = num_traits::pow(factor, n as usize);
    debug_assert_eq!(out, predicted_falling_moment(n, q)?);
    Ok(out)
}

/// `sum_{j<=depth} q^{-j} dim R_n^{2j}`, the truncated value of `HS_{R_n}(q^{-1/2})`.
pub fn hs_partial_sum(n: u32, q: u64, depth: usize) -> Result<BigRational> {
    if q < 2 {
        return Err(LabError::FieldSizeTooSmall(q));
    }
    let dims = graded_dimensions(n, depth);
    Ok(weighted_sum(&dims, q, 0..=depth))
}

/// `q^n * (partial HS_{R_n}) / (partial HS_{R_0})` at truncation `depth`.
pub fn truncated_hs_ratio(n: u32, q: u64, depth: usize) -> Result<BigRational> {
    let num = hs_partial_sum(n, q, depth)?;
    let den = hs_partial_sum(0, q, depth)?;
    Ok(num_traits::pow(rational_from_u64(q), n as usize) * num / den)
}

/// `sum_{j in range} q^{-j} dims[j]`, exact.
pub(crate) fn weighted_sum<I>(dims: &[BigUint], q: u64, range: I) -> BigRational
where
    I: IntoIterator<Item = usize>,
{
    let qq = BigInt::from(q);
    let mut num = BigInt::zero();
    let mut top = 0usize;
    let idx: Vec<usize> = range.into_iter().collect();
    if let Some(&m) = idx.iter().max() {
        top = m;
    }
    // Common denominator q^top keeps the sum an integer accumulation.
    for &j in &idx {
        num += BigInt::from(dims[j].clone()) * qq.pow((top - j) as u32);
    }
    BigRational::new(num, qq.pow(top as u32))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentKind {
    Raw,
    Falling,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MomentValue {
    Exact(BigRational),
    Certified(Certified),
}

impl MomentValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            MomentValue::Exact(x) => certified::ratio_to_f64(x),
            MomentValue::Certified(c) => c.to_f64(),
        }
    }
}

impl Serialize for MomentValue {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            MomentValue::Exact(x) => serializer.serialize_str(&ratio_string(x)),
            MomentValue::Certified(c) => c.serialize(serializer),
        }
    }
}

/// Moments of orders `1..=n_max`; `values[i]` is the moment of order `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MomentVector {
    pub kind: MomentKind,
    pub values: Vec<MomentValue>,
}

impl MomentVector {
    pub fn exact(kind: MomentKind, values: Vec<BigRational>) -> Self {
        Self {
            kind,
            values: values.into_iter().map(MomentValue::Exact).collect(),
        }
    }

    pub fn max_order(&self) -> usize {
        self.values.len()
    }

    /// Moment of the given order (1-based).
    pub fn get(&self, order: usize) -> Option<&MomentValue> {
        order.checked_sub(1).and_then(|i| self.values.get(i))
    }
}

/// Exact predicted raw and falling moments for orders `1..=n_max`.
pub fn predicted_moments(q: u64, n_max: u32) -> Result<(MomentVector, MomentVector)> {
    let raw = (1..=n_max)
        .map(|n| predicted_moment(n, q))
        .collect::<Result<Vec<_>>>()?;
    let falling = (1..=n_max)
        .map(|n| predicted_falling_moment(n, q))
        .collect::<Result<Vec<_>>>()?;
    Ok((
        MomentVector::exact(MomentKind::Raw, raw),
        MomentVector::exact(MomentKind::Falling, falling),
    ))
}
