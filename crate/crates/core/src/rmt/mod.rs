//! Random-matrix surrogate for point counts: Haar `USp(2g)` samples turned
//! into sequences `N_k = q^k + 1 - q^{k/2} Tr(M^k)`, filtered by the
//! discreteness / positivity / more-positivity constraints, and compared to
//! Poisson(lambda(q)).

pub mod sampler;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub use sampler::{sample_haar_usp, weyl_cdf_g1, SamplerMethod, SymplecticSample};

use crate::census::falling_factorial;
use crate::error::{LabError, Result};
use crate::exactcomb::certified::poisson_pmf_table;
use crate::exactcomb::{lambda_of_q, predicted_falling_moment, predicted_moment, ratio_string};

/// Samples per generator stream. Stream `b` covers sample indices
/// `b * BLOCK .. (b + 1) * BLOCK`, so results do not depend on worker count.
pub const BLOCK: usize = 1024;

/// Decimal digits for Poisson reference values.
const PMF_DIGITS: i64 = 30;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointCountSequence {
    pub q: u64,
    /// `N_1..N_m`.
    pub values: Vec<f64>,
}

/// `N_k = q^k + 1 - q^{k/2} t_k` for `k = 1..=m`.
pub fn implied_point_counts(sample: &SymplecticSample, q: u64, m: u32) -> PointCountSequence {
    let qf = q as f64;
    let values = (1..=m)
        .map(|k| {
            let k = f64::from(k);
            qf.powf(k) + 1.0 - qf.powf(k / 2.0) * sample.trace(k as u32)
        })
        .collect();
    PointCountSequence { q, values }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Constraint {
    Discreteness,
    Positivity,
    MorePositivity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintConfig {
    /// Relaxed discreteness `|N_k - round(N_k)| <= epsilon`; `None` disables it.
    pub discreteness: Option<f64>,
    /// Indices `k` the discreteness window is applied to. Default `1..=m`
    /// (joint); a single index gives the per-`n` reading.
    pub discreteness_indices: Vec<u32>,
    pub positivity: bool,
    pub more_positivity: bool,
    pub max_index: u32,
    /// `(n1, n2)` with `N_{n1 n2} >= N_{n1}` required.
    pub pairs: Vec<(u32, u32)>,
}

impl ConstraintConfig {
    pub const DEFAULT_EPSILON: f64 = 0.05;
    pub const DEFAULT_MAX_INDEX: u32 = 6;

    /// All constraints at the documented defaults.
    pub fn all(epsilon: f64, max_index: u32) -> Self {
        Self {
            discreteness: Some(epsilon),
            discreteness_indices: (1..=max_index).collect(),
            positivity: true,
            more_positivity: true,
            max_index,
            pairs: default_pairs(max_index),
        }
    }

    pub fn none() -> Self {
        Self {
            discreteness: None,
            discreteness_indices: Vec::new(),
            positivity: false,
            more_positivity: false,
            max_index: 1,
            pairs: Vec::new(),
        }
    }

    pub fn positivity_only() -> Self {
        Self {
            positivity: true,
            ..Self::none()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_index < 1 {
            return Err(LabError::InvalidParameter("max_index must be >= 1".into()));
        }
        if let Some(eps) = self.discreteness {
            if eps.is_nan() || eps < 0.0 {
                return Err(LabError::InvalidParameter(format!("epsilon must be >= 0, got {eps}")));
            }
        }
        let m = self.max_index;
        if self.discreteness_indices.iter().any(|&k| k == 0 || k > m) {
            return Err(LabError::InvalidParameter("discreteness index outside 1..=m".into()));
        }
        if self.pairs.iter().any(|&(a, b)| a == 0 || b == 0 || a * b > m) {
            return Err(LabError::InvalidParameter("more-positivity pair needs n1 n2 <= m".into()));
        }
        Ok(())
    }

    /// Largest `k` any enabled constraint reads.
    pub fn required_length(&self) -> u32 {
        let mut m = 1;
        if self.discreteness.is_some() {
            m = m.max(self.discreteness_indices.iter().copied().max().unwrap_or(1));
        }
        if self.more_positivity {
            m = m.max(self.pairs.iter().map(|&(a, b)| a * b).max().unwrap_or(1));
        }
        m
    }
}

impl Default for ConstraintConfig {
    fn default() -> Self {
        Self::all(Self::DEFAULT_EPSILON, Self::DEFAULT_MAX_INDEX)
    }
}

/// All `(n1, n2)` with `n1 >= 1`, `n2 >= 2`, `n1 n2 <= m`.
pub fn default_pairs(m: u32) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for a in 1..=m {
        for b in 2..=m / a {
            out.push((a, b));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConstraintOutcome {
    pub accepted: bool,
    pub violated: Vec<Constraint>,
}

pub fn check_constraints(seq: &PointCountSequence, config: &ConstraintConfig) -> Result<ConstraintOutcome> {
    let need = config.required_length() as usize;
    if seq.values.len() < need {
        return Err(LabError::InvalidParameter(format!(
            "sequence has {} terms, constraints need {need}",
            seq.values.len()
        )));
    }
    let n = |k: u32| seq.values[k as usize - 1];
    let mut violated = Vec::new();
    if let Some(eps) = config.discreteness {
        if config.discreteness_indices.iter().any(|&k| (n(k) - n(k).round()).abs() > eps) {
            violated.push(Constraint::Discreteness);
        }
    }
    if config.positivity && n(1) < 0.0 {
        violated.push(Constraint::Positivity);
    }
    if config.more_positivity && config.pairs.iter().any(|&(a, b)| n(a * b) < n(a)) {
        violated.push(Constraint::MorePositivity);
    }
    Ok(ConstraintOutcome {
        accepted: violated.is_empty(),
        violated,
    })
}

/// Integers in `[max(0, ceil(q+1-2g sqrt q)), floor(q+1+2g sqrt q)]`.
pub fn weil_window(q: u64, g: u32) -> (u64, u64) {
    // Integer arithmetic: n is inside iff (n - q - 1)^2 <= 4 g^2 q.
    let bound = 4 * u128::from(g) * u128::from(g) * u128::from(q);
    let centre = i128::from(q) + 1;
    let r = (bound as f64).sqrt() as i128 + 2;
    let inside = |n: i128| ((n - centre).pow(2) as u128) <= bound;
    let lo = (centre - r..=centre).find(|&n| inside(n)).unwrap().max(0);
    let hi = (centre..=centre + r).rev().find(|&n| inside(n)).unwrap();
    (lo as u64, hi as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoissonComparison {
    pub window: (u64, u64),
    /// Poisson mass outside the window (the window reference is renormalized).
    pub poisson_mass_outside: f64,
    /// Empirical mass outside the window.
    pub empirical_mass_outside: f64,
    /// TV distance to Poisson restricted and renormalized on the window.
    pub tv_window: f64,
    /// TV distance to the unrestricted Poisson distribution.
    pub tv_full: f64,
    /// Empirical raw moment minus the windowed Poisson raw moment, orders `1..=k`.
    pub moment_discrepancies: Vec<f64>,
}

/// Histogram (value -> count) against Poisson(lambda).
pub fn compare_to_poisson(
    histogram: &BTreeMap<u64, u64>,
    lambda: &BigRational,
    window: (u64, u64),
    k: u32,
) -> Result<PoissonComparison> {
    let total: u64 = histogram.values().sum();
    if total == 0 {
        return Err(LabError::EmptyHistogram);
    }
    if window.0 > window.1 {
        return Err(LabError::EmptyRange(format!("{}..={}", window.0, window.1)));
    }
    let top = window.1.max(*histogram.keys().next_back().unwrap());
    let pmf: Vec<f64> = poisson_pmf_table(top as u32, lambda, PMF_DIGITS)?
        .iter()
        .map(|c| c.to_f64())
        .collect();
    let emp = |n: u64| histogram.get(&n).copied().unwrap_or(0) as f64 / total as f64;
    let (lo, hi) = window;
    let inside: f64 = pmf[lo as usize..=hi as usize].iter().sum();
    let below_top: f64 = pmf.iter().sum();

    let mut tv_window = 0.0;
    for n in lo..=hi {
        tv_window += (emp(n) - pmf[n as usize] / inside).abs();
    }
    let empirical_mass_outside: f64 = histogram
        .iter()
        .filter(|(&n, _)| n < lo || n > hi)
        .map(|(_, &c)| c as f64 / total as f64)
        .sum();
    tv_window = 0.5 * (tv_window + empirical_mass_outside);

    let mut tv_full = (1.0 - below_top).max(0.0);
    for n in 0..=top {
        tv_full += (emp(n) - pmf[n as usize]).abs();
    }
    tv_full *= 0.5;

    let moment_discrepancies = (1..=k)
        .map(|order| {
            let e: f64 = histogram
                .iter()
                .map(|(&n, &c)| (n as f64).powi(order as i32) * c as f64)
                .sum::<f64>()
                / total as f64;
            let p: f64 = (lo..=hi)
                .map(|n| (n as f64).powi(order as i32) * pmf[n as usize])
                .sum::<f64>()
                / inside;
            e - p
        })
        .collect();
    Ok(PoissonComparison {
        window,
        poisson_mass_outside: 1.0 - inside,
        empirical_mass_outside,
        tv_window,
        tv_full,
        moment_discrepancies,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub g: u32,
    pub q: u64,
    pub constraints: ConstraintConfig,
    pub num_samples: u64,
    pub seed: u64,
    pub n_max: u32,
    pub method: SamplerMethod,
    /// Thread count; never affects results.
    #[serde(skip)]
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn new(g: u32, q: u64, num_samples: u64, seed: u64) -> Self {
        Self {
            g,
            q,
            constraints: ConstraintConfig::default(),
            num_samples,
            seed,
            n_max: 4,
            method: SamplerMethod::Matrix,
            workers: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.g < 1 {
            return Err(LabError::InvalidParameter("g must be >= 1".into()));
        }
        if self.q < 2 {
            return Err(LabError::FieldSizeTooSmall(self.q));
        }
        if self.num_samples < 1 {
            return Err(LabError::InvalidParameter("num_samples must be >= 1".into()));
        }
        self.constraints.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub g: u32,
    pub q: u64,
    pub seed: u64,
    pub method: SamplerMethod,
    pub constraints: ConstraintConfig,
    pub num_samples: u64,
    pub num_accepted: u64,
    pub acceptance_rate: f64,
    /// Set when nothing was accepted; statistics are then empty.
    pub no_accepted_samples: bool,
    pub violations: BTreeMap<Constraint, u64>,
    /// Rounded `N_1` (ties to even) over accepted samples.
    pub histogram: BTreeMap<u64, u64>,
    pub lambda: String,
    pub raw_moments: Vec<String>,
    pub falling_moments: Vec<String>,
    pub falling_moments_decimal: Vec<f64>,
    pub poisson_raw_moments: Vec<String>,
    pub poisson_falling_moments: Vec<String>,
    pub comparison: Option<PoissonComparison>,
    /// `mean` and `variance` of `t_1` over all samples.
    pub trace_mean: f64,
    pub trace_variance: f64,
    pub gram_schmidt_retries: u32,
}

struct BlockSummary {
    accepted: u64,
    violations: BTreeMap<Constraint, u64>,
    histogram: BTreeMap<u64, u64>,
    t1_sum: f64,
    t1_sq_sum: f64,
    retries: u32,
}

/// Generator for block `b`: the counter-based stream `(seed, b)`.
pub fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// Samples of one method in stream order, `num_samples` of them.
pub fn draw_samples(method: SamplerMethod, g: u32, num_samples: u64, seed: u64, workers: usize) -> Result<Vec<SymplecticSample>> {
    let blocks = num_samples.div_ceil(BLOCK as u64);
    let pool = thread_pool(workers)?;
    Ok(pool.install(|| {
        (0..blocks)
            .into_par_iter()
            .flat_map_iter(|b| {
                let count = (num_samples - b * BLOCK as u64).min(BLOCK as u64) as usize;
                sampler::sample_block(method, g, count, &mut block_rng(seed, b)).0
            })
            .collect()
    }))
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| LabError::InvalidParameter(e.to_string()))
}

fn summarize_block(cfg: &ExperimentConfig, block: u64, m: u32) -> Result<BlockSummary> {
    let count = (cfg.num_samples - block * BLOCK as u64).min(BLOCK as u64) as usize;
    let (samples, retries) = sampler::sample_block(cfg.method, cfg.g, count, &mut block_rng(cfg.seed, block));
    let mut s = BlockSummary {
        accepted: 0,
        violations: BTreeMap::new(),
        histogram: BTreeMap::new(),
        t1_sum: 0.0,
        t1_sq_sum: 0.0,
        retries,
    };
    for sample in &samples {
        let t1 = sample.trace(1);
        s.t1_sum += t1;
        s.t1_sq_sum += t1 * t1;
        let seq = implied_point_counts(sample, cfg.q, m);
        let outcome = check_constraints(&seq, &cfg.constraints)?;
        for c in outcome.violated {
            *s.violations.entry(c).or_insert(0) += 1;
        }
        if outcome.accepted {
            s.accepted += 1;
            // N_1 > 0 is not guaranteed without positivity; clamp the rounded value.
            let n1 = seq.values[0].round_ties_even().max(0.0) as u64;
            *s.histogram.entry(n1).or_insert(0) += 1;
        }
    }
    Ok(s)
}

/// Exact raw and falling moments of an integer histogram.
pub fn histogram_moments(histogram: &BTreeMap<u64, u64>, n_max: u32) -> (Vec<BigRational>, Vec<BigRational>) {
    let total: u64 = histogram.values().sum();
    let moment = |w: &dyn Fn(u64, u32) -> BigInt, order: u32| {
        let s = histogram
            .iter()
            .fold(BigInt::zero(), |acc, (&n, &c)| acc + w(n, order) * BigInt::from(c));
        BigRational::new(s, BigInt::from(total))
    };
    let raw = (1..=n_max).map(|o| moment(&|n, k| BigInt::from(n).pow(k), o)).collect();
    let falling = (1..=n_max).map(|o| moment(&falling_factorial, o)).collect();
    (raw, falling)
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let m = cfg.constraints.required_length();
    let blocks = cfg.num_samples.div_ceil(BLOCK as u64);
    let pool = thread_pool(cfg.workers)?;
    let summaries: Vec<BlockSummary> = pool.install(|| {
        (0..blocks)
            .into_par_iter()
            .map(|b| summarize_block(cfg, b, m))
            .collect::<Result<_>>()
    })?;

    let mut accepted = 0;
    let mut violations = BTreeMap::new();
    let mut histogram = BTreeMap::new();
    let (mut t1_sum, mut t1_sq_sum, mut retries) = (0.0, 0.0, 0);
    for s in summaries {
        accepted += s.accepted;
        for (c, n) in s.violations {
            *violations.entry(c).or_insert(0) += n;
        }
        for (n, c) in s.histogram {
            *histogram.entry(n).or_insert(0) += c;
        }
        t1_sum += s.t1_sum;
        t1_sq_sum += s.t1_sq_sum;
        retries += s.retries;
    }
    let ns = cfg.num_samples as f64;
    let trace_mean = t1_sum / ns;
    let trace_variance = t1_sq_sum / ns - trace_mean * trace_mean;

    let lambda = lambda_of_q(cfg.q)?;
    let poisson_raw = (1..=cfg.n_max)
        .map(|n| predicted_moment(n, cfg.q).map(|x| ratio_string(&x)))
        .collect::<Result<Vec<_>>>()?;
    let poisson_falling = (1..=cfg.n_max)
        .map(|n| predicted_falling_moment(n, cfg.q).map(|x| ratio_string(&x)))
        .collect::<Result<Vec<_>>>()?;

    let empty = accepted == 0;
    let (raw, falling, comparison) = if empty {
        (Vec::new(), Vec::new(), None)
    } else {
        let (raw, falling) = histogram_moments(&histogram, cfg.n_max);
        let cmp = compare_to_poisson(&histogram, &lambda, weil_window(cfg.q, cfg.g), cfg.n_max)?;
        (raw, falling, Some(cmp))
    };
    Ok(ExperimentReport {
        g: cfg.g,
        q: cfg.q,
        seed: cfg.seed,
        method: cfg.method,
        constraints: cfg.constraints.clone(),
        num_samples: cfg.num_samples,
        num_accepted: accepted,
        acceptance_rate: accepted as f64 / ns,
        no_accepted_samples: empty,
        violations,
        histogram,
        lambda: ratio_string(&lambda),
        raw_moments: raw.iter().map(ratio_string).collect(),
        falling_moments: falling.iter().map(ratio_string).collect(),
        falling_moments_decimal: falling.iter().map(crate::exactcomb::certified::ratio_to_f64).collect(),
        poisson_raw_moments: poisson_raw,
        poisson_falling_moments: poisson_falling,
        comparison,
        trace_mean,
        trace_variance,
        gram_schmidt_retries: retries,
    })
}

/// Pearson statistic of `g = 1` phases against `(2/pi) sin^2` on `bins` equal bins.
pub fn chi_square_g1(samples: &[SymplecticSample], bins: usize) -> f64 {
    let mut counts = vec![0u64; bins];
    let width = std::f64::consts::PI / bins as f64;
    for s in samples {
        let b = ((s.phases[0] / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let n = samples.len() as f64;
    counts
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let p = weyl_cdf_g1((i + 1) as f64 * width) - weyl_cdf_g1(i as f64 * width);
            let e = n * p;
            (c as f64 - e).powi(2) / e
        })
        .sum()
}

/// TV distance between the `t_1` histograms of two sample sets, with bins of
/// width `bin_width` on `[-2g, 2g]`.
pub fn trace_tv_distance(a: &[SymplecticSample], b: &[SymplecticSample], bin_width: f64) -> f64 {
    let hist = |s: &[SymplecticSample]| {
        let mut h: BTreeMap<i64, f64> = BTreeMap::new();
        for x in s {
            *h.entry((x.trace(1) / bin_width).floor() as i64).or_insert(0.0) += 1.0 / s.len() as f64;
        }
        h
    };
    let (ha, hb) = (hist(a), hist(b));
    let keys: std::collections::BTreeSet<i64> = ha.keys().chain(hb.keys()).copied().collect();
    0.5 * keys
        .iter()
        .map(|k| (ha.get(k).unwrap_or(&0.0) - hb.get(k).unwrap_or(&0.0)).abs())
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn implied_counts_examples() {
        let s = SymplecticSample::new(vec![PI / 2.0]);
        assert!((implied_point_counts(&s, 4, 1).values[0] - 5.0).abs() < 1e-12);
        let zero = SymplecticSample::new(vec![0.0; 3]);
        let seq = implied_point_counts(&zero, 9, 2);
        assert!((seq.values[0] - (10.0 - 6.0 * 3.0)).abs() < 1e-9);
        let pi = SymplecticSample::new(vec![PI; 2]);
        let seq = implied_point_counts(&pi, 5, 2);
        assert!((seq.values[1] - (26.0 - 4.0 * 5.0)).abs() < 1e-9);
    }

    #[test]
    fn window_matches_float_bounds() {
        assert_eq!(weil_window(2, 2), (0, 8));
        assert_eq!(weil_window(101, 1), (82, 122));
        assert_eq!(weil_window(4, 1), (1, 9));
        for q in 2..200u64 {
            for g in 1..5u32 {
                let (lo, hi) = weil_window(q, g);
                let r = 2.0 * f64::from(g) * (q as f64).sqrt();
                assert_eq!(lo, ((q as f64 + 1.0 - r).ceil()).max(0.0) as u64);
                assert_eq!(hi, (q as f64 + 1.0 + r).floor() as u64);
            }
        }
    }

    #[test]
    fn default_pairs_for_six() {
        assert_eq!(default_pairs(6), vec![(1, 2), (1, 3), (1, 4), (1, 5), (1, 6), (2, 2), (2, 3), (3, 2)]);
    }

    #[test]
    fn wide_epsilon_always_passes_discreteness() {
        let cfg = ConstraintConfig {
            discreteness: Some(0.5),
            discreteness_indices: vec![1],
            ..ConstraintConfig::none()
        };
        for t in [0.0, 0.3, 1.1, 2.9, PI] {
            let seq = implied_point_counts(&SymplecticSample::new(vec![t]), 7, 1);
            assert!(check_constraints(&seq, &cfg).unwrap().accepted);
        }
    }

    #[test]
    fn short_sequence_is_refused() {
        let seq = PointCountSequence { q: 2, values: vec![3.0] };
        assert!(check_constraints(&seq, &ConstraintConfig::default()).is_err());
    }
}
