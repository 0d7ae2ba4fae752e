//! Midpoint-radius reals with exact rational endpoints.
//!
//! Values are kept as a rational midpoint rounded to a dyadic grid plus a
//! rational error radius; every rounding step widens the radius, so
//! `value - radius <= truth <= value + radius` holds throughout.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use super::factorial;
use crate::error::{LabError, Result};

/// Binary guard bits kept beyond the requested decimal precision.
const GUARD_BITS: u64 = 40;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certified {
    pub value: BigRational,
    pub radius: BigRational,
    /// Decimal digits the value was computed for.
    pub digits: u32,
}

impl Certified {
    pub fn exact(value: BigRational, digits: u32) -> Self {
        Self {
            value,
            radius: BigRational::zero(),
            digits,
        }
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        (&self.value - x).abs() <= self.radius
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.value)
    }

    pub fn radius_f64(&self) -> f64 {
        ratio_to_f64(&self.radius)
    }

    /// Decimal rendering of the midpoint with `digits` fractional digits.
    pub fn to_decimal(&self, digits: u32) -> String {
        decimal_string(&self.value, digits)
    }

    fn grid_bits(&self) -> u64 {
        bits_for_digits(self.digits)
    }

    /// Round the midpoint to the dyadic grid, folding the error into the
    /// radius; the radius itself is rounded up onto the same grid so both
    /// stay short dyadic rationals.
    fn rounded(mut self) -> Self {
        let bits = self.grid_bits();
        let (v, err) = round_dyadic(&self.value, bits);
        self.value = v;
        self.radius = ceil_dyadic(&(&self.radius + err), bits);
        self
    }

    pub fn mul_exact(&self, factor: &BigRational) -> Self {
        Self {
            value: &self.value * factor,
            radius: &self.radius * factor.abs(),
            digits: self.digits,
        }
        .rounded()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let radius = self.value.abs() * &other.radius
            + other.value.abs() * &self.radius
            + &self.radius * &other.radius;
        Self {
            value: &self.value * &other.value,
            radius,
            digits: self.digits.max(other.digits),
        }
        .rounded()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            value: &self.value + &other.value,
            radius: &self.radius + &other.radius,
            digits: self.digits.max(other.digits),
        }
    }
}

impl fmt::Display for Certified {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} +/- {:.3e}",
            self.to_decimal(self.digits.min(30)),
            self.radius_f64()
        )
    }
}

impl Serialize for Certified {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("Certified", 3)?;
        s.serialize_field("value", &self.to_decimal(self.digits))?;
        s.serialize_field("radius", &format!("{:.3e}", self.radius_f64()))?;
        s.serialize_field("precision_digits", &self.digits)?;
        s.end()
    }
}

pub(crate) fn bits_for_digits(digits: u32) -> u64 {
    // log2(10) < 3.33
    (u64::from(digits) * 333).div_ceil(100) + GUARD_BITS
}

/// Nearest point of the grid `2^-bits Z`, with an upper bound on the error.
fn round_dyadic(x: &BigRational, bits: u64) -> (BigRational, BigRational) {
    let (q, r) = (x.numer() << bits).div_rem(x.denom());
    // div_rem truncates toward zero; move to the nearest grid point.
    let twice = BigInt::from(2) * r.abs();
    let q = if &twice > x.denom() || (&twice == x.denom() && q.is_odd()) {
        if x.is_negative() { q - 1 } else { q + 1 }
    } else {
        q
    };
    let err = if r.is_zero() {
        BigRational::zero()
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (bits + 1))
    };
    (dyadic(q, bits), err)
}

/// Smallest point of `2^-bits Z` that is `>= x`, for `x >= 0`.
fn ceil_dyadic(x: &BigRational, bits: u64) -> BigRational {
    let (q, r) = (x.numer() << bits).div_rem(x.denom());
    dyadic(if r.is_zero() { q } else { q + 1 }, bits)
}

/// `m / 2^bits` reduced by shifting out common factors of two.
fn dyadic(m: BigInt, bits: u64) -> BigRational {
    if m.is_zero() {
        return BigRational::zero();
    }
    let shift = m.trailing_zeros().unwrap_or(0).min(bits);
    BigRational::new_raw(m >> shift, BigInt::one() << (bits - shift))
}

/// Decimal digits of `x` to the left of the point, as an upper estimate.
fn magnitude_digits(x: &BigRational) -> u32 {
    let bits = x.numer().bits() as i64 - x.denom().bits() as i64 + 1;
    // log10(2) < 0.302
    (bits.max(0) as u64 * 302).div_ceil(1000) as u32
}

/// Extra digits so that `e^{-lambda}` times weights up to `e^lambda` keeps
/// the requested absolute precision.
fn exp_guard_digits(lambda: &BigRational) -> u32 {
    (ratio_to_f64(lambda).max(0.0) * std::f64::consts::LOG10_E).ceil() as u32 + 2
}

/// Nearest `f64`, also for huge numerators and denominators.
pub fn ratio_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // Fall back for magnitudes outside what to_f64 handles directly.
        let n = x.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = x.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// Truncated decimal expansion (round-half-away) of an exact rational.
pub fn decimal_string(x: &BigRational, digits: u32) -> String {
    let scale = BigInt::from(10u32).pow(digits);
    let scaled = (x * BigRational::from_integer(scale.clone())).round().to_integer();
    let neg = scaled.is_negative();
    let (int, frac) = scaled.abs().div_rem(&scale);
    let sign = if neg { "-" } else { "" };
    if digits == 0 {
        return format!("{sign}{int}");
    }
    format!("{sign}{int}.{:0>width$}", frac.to_string(), width = digits as usize)
}

/// Certified `e^{-x}` for a rational `x >= 0`.
///
/// Argument reduction `e^{-x} = (e^{-x/2^s})^{2^s}` with `x/2^s <= 1/4`, then
/// the alternating Taylor series whose truncation error is bounded by the
/// first omitted term.
pub fn exp_neg(x: &BigRational, digits: u32) -> Result<Certified> {
    if digits == 0 {
        return Err(LabError::NonPositivePrecision(0));
    }
    if x.is_negative() {
        return Err(LabError::InvalidParameter("exp_neg needs x >= 0".into()));
    }
    let quarter = BigRational::new(BigInt::one(), BigInt::from(4));
    let mut reduced = x.clone();
    let mut squarings = 0u32;
    while reduced > quarter {
        reduced /= BigRational::from_integer(BigInt::from(2));
        squarings += 1;
    }
    // Each squaring can double the relative error; pay for it up front.
    let working = digits + squarings.div_ceil(3) + 5;
    let eps = BigRational::new(BigInt::one(), BigInt::from(10u32).pow(working + 5));

    let mut sum = BigRational::zero();
    let mut term = BigRational::one();
    let mut k = 0u32;
    loop {
        if term.abs() < eps {
            break;
        }
        sum += &term;
        k += 1;
        term = -term * &reduced / BigRational::from_integer(BigInt::from(k));
    }
    let mut acc = Certified {
        value: sum,
        radius: term.abs(),
        digits: working,
    }
    .rounded();
    for _ in 0..squarings {
        acc = acc.mul(&acc);
    }
    acc.digits = digits;
    Ok(acc)
}

/// `lambda^n e^{-lambda} / n!` with a certified error radius.
pub fn poisson_pmf(n: u32, lambda: &BigRational, digits: i64) -> Result<Certified> {
    let digits = checked_digits(digits)?;
    if !lambda.is_positive() {
        return Err(LabError::NonPositiveMean);
    }
    let e = exp_neg(lambda, digits + exp_guard_digits(lambda))?;
    let weight = pow_ratio(lambda, n) / to_ratio(&factorial(n));
    let mut out = e.mul_exact(&weight);
    out.digits = digits;
    Ok(out.rounded())
}

/// Poisson PMF values for `0..=n_max` sharing one exponential evaluation.
pub fn poisson_pmf_table(n_max: u32, lambda: &BigRational, digits: i64) -> Result<Vec<Certified>> {
    let digits = checked_digits(digits)?;
    if !lambda.is_positive() {
        return Err(LabError::NonPositiveMean);
    }
    // Running product e^{-lambda} lambda^n / n!; every rounding error is
    // amplified by at most e^lambda and there are n_max + 1 of them.
    let working = digits + exp_guard_digits(lambda) + magnitude_digits(&BigRational::from_integer(BigInt::from(n_max + 1)));
    let mut acc = exp_neg(lambda, working)?;
    let mut out = Vec::with_capacity(n_max as usize + 1);
    for n in 0..=n_max {
        if n > 0 {
            acc = acc.mul_exact(&(lambda / BigRational::from_integer(BigInt::from(n))));
        }
        let mut v = acc.clone();
        v.digits = digits;
        out.push(v.rounded());
    }
    Ok(out)
}

/// `E[X^order]` for `X ~ Poisson(lambda)` by explicit PMF summation with a
/// certified geometric bound on the omitted tail.
pub fn poisson_raw_moment(order: u32, lambda: &BigRational, digits: i64) -> Result<Certified> {
    poisson_moment_by_summation(lambda, digits, |n| BigRational::from_integer(BigInt::from(n).pow(order)), order)
}

/// `E[(X)_order]` by PMF summation, same certification as [`poisson_raw_moment`].
pub fn poisson_falling_moment(order: u32, lambda: &BigRational, digits: i64) -> Result<Certified> {
    poisson_moment_by_summation(
        lambda,
        digits,
        |n| {
            let mut f = BigInt::one();
            for i in 0..order {
                f *= BigInt::from(n) - BigInt::from(i);
            }
            BigRational::from_integer(f)
        },
        order,
    )
}

fn poisson_moment_by_summation<F>(lambda: &BigRational, digits: i64, weight_of: F, order: u32) -> Result<Certified>
where
    F: Fn(u64) -> BigRational,
{
    let digits = checked_digits(digits)?;
    if !lambda.is_positive() {
        return Err(LabError::NonPositiveMean);
    }
    let target = BigRational::new(BigInt::one(), BigInt::from(10u32).pow(digits + 5));
    // Both weights are bounded by n^order, so the tail bound below uses that.
    let mut partial = BigRational::zero();
    let mut base = BigRational::one(); // lambda^n / n!
    let mut n: u64 = 0;
    let tail = loop {
        partial += weight_of(n) * &base;
        n += 1;
        base = base * lambda / BigRational::from_integer(BigInt::from(n));
        // Tail from index n on: t_m = m^order lambda^m / m!, ratio <= rho for m >= n.
        if n >= 2 {
            let nn = BigRational::from_integer(BigInt::from(n));
            let growth = num_traits::pow((&nn + BigRational::one()) / &nn, order as usize);
            let rho = growth * lambda / (&nn + BigRational::one());
            if rho < BigRational::new(BigInt::one(), BigInt::from(2)) {
                let first = BigRational::from_integer(BigInt::from(n).pow(order)) * &base;
                let bound = first / (BigRational::one() - rho);
                if bound < target {
                    break bound;
                }
            }
        }
    };
    let e = exp_neg(lambda, digits + 2 + magnitude_digits(&partial))?;
    let mut out = e.mul_exact(&partial);
    // e^{-lambda} <= 1, so the scaled tail is at most the raw tail bound.
    out.radius += tail;
    out.digits = digits;
    Ok(out)
}

fn checked_digits(digits: i64) -> Result<u32> {
    if digits <= 0 {
        return Err(LabError::NonPositivePrecision(digits));
    }
    u32::try_from(digits).map_err(|_| LabError::InvalidParameter("precision too large".into()))
}

fn pow_ratio(x: &BigRational, n: u32) -> BigRational {
    num_traits::pow(x.clone(), n as usize)
}

fn to_ratio(x: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(x.clone()))
}
