//! Bookkeeping for the trace-formula decomposition of `#M_{g,n}(F_q)`.
//!
//! The stable part is computed exactly from tautological dimensions. The
//! unstable part is exposed only as an envelope (it uses the dimensions of
//! `R_n` itself, an upper bound for their images in cohomology), and the
//! non-tautological remainder is represented by its weight cutoff and the
//! log of the total-cohomology bound `(2+2g)^n (12g)!`; it is never evaluated.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::exactcomb::{certified::ratio_to_f64, graded_dimensions, ratio_string, weighted_sum};
use crate::error::{LabError, Result};

/// Largest `12g` for which `ln((12g)!)` is summed exactly from big integers.
pub const EXACT_FACTORIAL_GENUS_LIMIT: u32 = 50;

fn check_genus(g: u32) -> Result<()> {
    if g < 2 {
        return Err(LabError::GenusOutOfRange(g, 2));
    }
    Ok(())
}

fn check_q(q: u64) -> Result<()> {
    if q < 2 {
        return Err(LabError::FieldSizeTooSmall(q));
    }
    Ok(())
}

/// `d_{g,n} = 3g - 3 + n`.
pub fn dimension_d(g: u32, n: u32) -> Result<u64> {
    check_genus(g)?;
    Ok(3 * u64::from(g) - 3 + u64::from(n))
}

/// Last index of the stable range, `floor((g-1)/3)`.
pub fn stable_cutoff(g: u32) -> usize {
    ((g.max(1) - 1) / 3) as usize
}

/// `sum_{j=0}^{floor((g-1)/3)} q^{-j} dim R_n^{2j}`, i.e. `q^{-d} T^stable`.
pub fn stable_trace_normalized(g: u32, n: u32, q: u64) -> Result<BigRational> {
    check_genus(g)?;
    check_q(q)?;
    let top = stable_cutoff(g);
    let dims = graded_dimensions(n, top);
    Ok(weighted_sum(&dims, q, 0..=top))
}

/// `sum_{j=floor((g-1)/3)+1}^{d} q^{-j} dim R_n^{2j}`: the envelope of `|q^{-d} T^unstable|`.
pub fn unstable_tail_exact(g: u32, n: u32, q: u64) -> Result<BigRational> {
    check_q(q)?;
    let d = dimension_d(g, n)? as usize;
    let start = stable_cutoff(g) + 1;
    if start > d {
        return Ok(BigRational::zero());
    }
    let dims = graded_dimensions(n, d);
    Ok(weighted_sum(&dims, q, start..=d))
}

/// `sum_{j=floor((g-1)/3)+1}^{d} q^{-j} exp(c sqrt j)` for a given envelope constant `c`.
pub fn unstable_tail_bound(g: u32, n: u32, q: u64, c: f64) -> Result<f64> {
    check_q(q)?;
    let d = dimension_d(g, n)?;
    let start = stable_cutoff(g) as u64 + 1;
    let lq = (q as f64).ln();
    Ok((start..=d)
        .map(|j| (c * (j as f64).sqrt() - j as f64 * lq).exp())
        .sum())
}

/// Natural log of a big unsigned integer, accurate to f64 precision.
pub fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().map_or(f64::INFINITY, f64::ln);
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("64-bit prefix fits");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Smallest `c` (rounded up to 3 decimals, found by bisection) with
/// `dim R_n^{2i} <= exp(c sqrt i)` for all `1 <= i <= scan_limit`.
pub fn subexp_constant(n: u32, scan_limit: usize) -> f64 {
    let scan_limit = scan_limit.max(1);
    let logs: Vec<f64> = graded_dimensions(n, scan_limit)
        .iter()
        .map(ln_biguint)
        .collect();
    let holds = |c: f64| (1..=scan_limit).all(|i| logs[i] <= c * (i as f64).sqrt() + 1e-12);

    if holds(0.0) {
        return 0.0;
    }
    // Bisection on the grid of thousandths: `lo` fails, `hi` holds.
    let mut lo: i64 = 0;
    let mut hi: i64 = 1000;
    while !holds(hi as f64 / 1000.0) {
        lo = hi;
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if holds(mid as f64 / 1000.0) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi as f64 / 1000.0
}

/// `ln(m!)` summed from the exact big-integer factorial.
pub fn ln_factorial_exact(m: u64) -> f64 {
    let f = (1..=m).fold(BigUint::from(1u32), |acc, i| acc * i);
    ln_biguint(&f)
}

/// `ln(m!) = ln Gamma(m + 1)`.
pub fn ln_factorial_gamma(m: u64) -> f64 {
    ln_gamma(m as f64 + 1.0)
}

/// `n ln(2+2g) + ln((12g)!)`, the log of the total compactly supported cohomology bound.
pub fn cohomology_log_bound(g: u32, n: u32) -> Result<f64> {
    if g < 1 {
        return Err(LabError::GenusOutOfRange(g, 1));
    }
    let m = 12 * u64::from(g);
    let lf = if g <= EXACT_FACTORIAL_GENUS_LIMIT {
        ln_factorial_exact(m)
    } else {
        ln_factorial_gamma(m)
    };
    Ok(f64::from(n) * (2.0 + 2.0 * f64::from(g)).ln() + lf)
}

/// Both sides of `(floor((g-1)/3) - g/6) ln q > n ln(2g+2) + 12g ln(12g)` at `q = g^K`.
pub fn kprime_sides(k: f64, n: u32, g: u64) -> (f64, f64) {
    let gf = g as f64;
    let ln_q = k * gf.ln();
    let lhs = (((g.saturating_sub(1)) / 3) as f64 - gf / 6.0) * ln_q;
    let rhs = f64::from(n) * (2.0 * gf + 2.0).ln() + 12.0 * gf * (12.0 * gf).ln();
    (lhs, rhs)
}

pub fn kprime_inequality_holds(k: f64, n: u32, g: u64) -> bool {
    let (lhs, rhs) = kprime_sides(k, n, g);
    lhs > rhs
}

#[derive(Debug, Clone, Serialize)]
pub struct KPrimeReport {
    pub k: f64,
    pub n: u32,
    pub g_max: u64,
    /// Least genus at which the inequality holds at all.
    pub first_hold: Option<u64>,
    /// Least genus from which the inequality holds at every `g` up to `g_max`.
    pub g0: Option<u64>,
    /// Number of genera checked in `[g0, g_max]`.
    pub sampled: u64,
    /// Genera in `[first_hold, g0)` where the inequality fails again.
    pub relapses: Vec<u64>,
    /// Margin `lhs - rhs` at `g0`.
    pub margin_at_g0: Option<f64>,
}

impl KPrimeReport {
    pub fn verified(&self) -> bool {
        self.g0.is_some()
    }
}

/// Sweep every `g` in `2..=g_max` at `q = g^K`.
///
/// `first_hold` is the first genus where the bound holds; because of the
/// floor in `floor((g-1)/3)` it can fail again at some larger genera, which
/// are listed in `relapses`. `g0` is the start of the final unbroken run
/// reaching `g_max`; every genus in `[g0, g_max]` satisfies the inequality.
pub fn kprime_search(k: f64, n: u32, g_max: u64) -> Result<KPrimeReport> {
    if k.is_nan() || k <= 144.0 {
        return Err(LabError::ExponentTooSmall(k));
    }
    if g_max < 2 {
        return Err(LabError::EmptyRange(format!("g in 2..={g_max}")));
    }
    let holds: Vec<bool> = (2..=g_max)
        .map(|g| kprime_inequality_holds(k, n, g))
        .collect();
    let genus = |i: usize| i as u64 + 2;
    let first_hold = holds.iter().position(|&h| h).map(genus);
    let g0 = match holds.iter().rposition(|&h| !h) {
        None => Some(2),
        Some(last_fail) if last_fail + 1 < holds.len() => Some(genus(last_fail + 1)),
        Some(_) => None,
    };
    let relapses = match (first_hold, g0) {
        (Some(a), Some(b)) => (a..b)
            .filter(|&g| !kprime_inequality_holds(k, n, g))
            .collect(),
        _ => Vec::new(),
    };
    Ok(KPrimeReport {
        k,
        n,
        g_max,
        first_hold,
        g0,
        sampled: g0.map_or(0, |g| g_max - g + 1),
        relapses,
        margin_at_g0: g0.map(|g| {
            let (l, r) = kprime_sides(k, n, g);
            l - r
        }),
    })
}

/// `q^n * stable(g, n, q) / stable(g, 0, q)`: the stable-only ratio estimate
/// of `#M_{g,n}(F_q) / #M_g(F_q)`.
pub fn ratio_prediction(g: u32, n: u32, q: u64) -> Result<BigRational> {
    let num = stable_trace_normalized(g, n, q)?;
    let den = stable_trace_normalized(g, 0, q)?;
    Ok(num_traits::pow(crate::exactcomb::rational_from_u64(q), n as usize) * num / den)
}

/// Per-`(g, n, q)` summary of the decomposition.
#[derive(Debug, Clone)]
pub struct TraceProfile {
    pub g: u32,
    pub n: u32,
    pub q: u64,
    pub d: u64,
    pub stable_normalized: BigRational,
    pub unstable_tail_exact: BigRational,
    pub unstable_tail_bound: f64,
    /// Natural log of `(2+2g)^n (12g)!`.
    pub cohomology_log_bound: f64,
    /// Coweight below which the non-tautological remainder lives: `d - floor((g-1)/3)`.
    pub weight_cutoff: u64,
    pub subexp_constant: f64,
}

impl TraceProfile {
    pub fn compute(g: u32, n: u32, q: u64) -> Result<Self> {
        let d = dimension_d(g, n)?;
        let c = subexp_constant(n, d.max(1) as usize);
        let profile = Self {
            g,
            n,
            q,
            d,
            stable_normalized: stable_trace_normalized(g, n, q)?,
            unstable_tail_exact: unstable_tail_exact(g, n, q)?,
            unstable_tail_bound: unstable_tail_bound(g, n, q, c)?,
            cohomology_log_bound: cohomology_log_bound(g, n)?,
            weight_cutoff: d - stable_cutoff(g) as u64,
            subexp_constant: c,
        };
        Ok(profile)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceProfileRecord {
    pub g: u32,
    pub n: u32,
    pub q: u64,
    pub d: u64,
    pub stable_normalized: String,
    pub stable_normalized_decimal: f64,
    pub unstable_tail_exact: String,
    pub unstable_tail_decimal: f64,
    pub unstable_tail_bound: f64,
    pub cohomology_log_bound: f64,
    pub weight_cutoff: u64,
    pub subexp_constant: f64,
}

impl From<&TraceProfile> for TraceProfileRecord {
    fn from(p: &TraceProfile) -> Self {
        Self {
            g: p.g,
            n: p.n,
            q: p.q,
            d: p.d,
            stable_normalized: ratio_string(&p.stable_normalized),
            stable_normalized_decimal: ratio_to_f64(&p.stable_normalized),
            unstable_tail_exact: ratio_string(&p.unstable_tail_exact),
            unstable_tail_decimal: ratio_to_f64(&p.unstable_tail_exact),
            unstable_tail_bound: p.unstable_tail_bound,
            cohomology_log_bound: p.cohomology_log_bound,
            weight_cutoff: p.weight_cutoff,
            subexp_constant: p.subexp_constant,
        }
    }
}
