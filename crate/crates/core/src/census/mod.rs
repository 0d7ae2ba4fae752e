//! Exhaustive weighted censuses of small-genus curves over small finite fields.
//!
//! Each smooth normal-form equation carries weight `1/|G|`, which reproduces
//! the `1/#Aut` groupoid measure on isomorphism classes (see [`group`]).
//! The genus-1 census is the `M_{1,1}` groupoid: the base point at infinity
//! is part of the data, so automorphism groups stay finite.

pub mod curve;
pub mod field;
pub mod group;
pub mod poly;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

pub use curve::{count_points, weierstrass_discriminant, CurveEquation, CurveKind};
pub use field::{Embedding, Fe, FieldTower, FiniteField, ModulusSource};
pub use group::{group_order, validate_orbits, GroupSpec, OrbitValidation};

use crate::error::{LabError, Result};
use crate::exactcomb::{ratio_string, MomentKind, MomentVector};

/// Enumeration guard on the candidate coefficient space.
pub const MAX_CANDIDATES: u128 = 1 << 32;

/// Candidates per parallel work unit.
const UNIT: u64 = 1 << 12;

#[derive(Debug, Clone, Serialize)]
pub struct FieldInfo {
    pub p: u32,
    pub k: u32,
    pub q: u64,
    pub modulus: String,
    pub modulus_source: ModulusSource,
}

impl From<&FiniteField> for FieldInfo {
    fn from(f: &FiniteField) -> Self {
        Self {
            p: f.characteristic(),
            k: f.degree(),
            q: u64::from(f.order()),
            modulus: f.modulus_string(),
            modulus_source: f.modulus_source(),
        }
    }
}

/// Size of the candidate space for `kind` over `field`.
pub fn candidate_space(kind: CurveKind, field: &FiniteField) -> u128 {
    u128::from(field.order()).pow(kind.coefficient_count(field.characteristic()) as u32)
}

/// All smooth equations of `kind` over `field`, in candidate-index order.
pub fn enumerate_curves(kind: CurveKind, field: &FiniteField) -> Result<Vec<CurveEquation>> {
    let space = candidate_space(kind, field);
    if space > MAX_CANDIDATES {
        return Err(LabError::SpaceTooLarge(space));
    }
    let space = space as u64;
    let units = space.div_ceil(UNIT);
    Ok((0..units)
        .into_par_iter()
        .flat_map_iter(|u| {
            (u * UNIT..((u + 1) * UNIT).min(space))
                .map(move |i| CurveEquation::from_index(kind, field, i))
                .filter(|c| c.is_smooth(field))
        })
        .collect())
}

/// `(N_1, ..., N_K)` for one smooth equation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CurveCounts {
    pub index: u64,
    pub counts: Vec<u64>,
}

/// `#C(F_{q^k})` for `k = 1..=tower.extensions.len()`.
pub fn point_counts(curve: &CurveEquation, tower: &FieldTower) -> Vec<u64> {
    tower
        .extensions
        .iter()
        .map(|(big, emb)| curve.point_count(&tower.base, big, |a| emb.apply(a)))
        .collect()
}

/// `|N_k - q^k - 1| <= 2g q^{k/2}`, checked in integers.
pub fn within_weil_bound(n: u64, q: u64, k: u32, genus: u32) -> bool {
    let qk = i128::from(q).pow(k);
    let dev = i128::from(n) - qk - 1;
    dev * dev <= 4 * i128::from(genus * genus) * qk
}

/// Recover the L-polynomial from `N_1..N_g` and predict `N_k` for `k = g+1..=k_max`
/// using `c_{2g-i} = q^{g-i} c_i`. `None` if the implied coefficients are not integers.
pub fn predict_counts_from_zeta(known: &[u64], q: u64, genus: u32, k_max: usize) -> Option<Vec<u64>> {
    let g = genus as usize;
    if known.len() < g {
        return None;
    }
    let q = i128::from(q);
    let mut s: Vec<i128> = vec![0]; // s[k] = q^k + 1 - N_k
    for (i, &n) in known.iter().take(g).enumerate() {
        s.push(q.pow(i as u32 + 1) + 1 - i128::from(n));
    }
    let mut c = vec![0i128; 2 * g + 1];
    c[0] = 1;
    for k in 1..=g {
        let acc: i128 = s[k] + (1..k).map(|i| c[i] * s[k - i]).sum::<i128>();
        if acc % k as i128 != 0 {
            return None;
        }
        c[k] = -acc / k as i128;
    }
    for i in 0..g {
        c[2 * g - i] = q.pow((g - i) as u32) * c[i];
    }
    let mut out = Vec::new();
    for k in g + 1..=k_max {
        let ck = if k <= 2 * g { c[k] } else { 0 };
        let sum: i128 = (1..k).map(|i| if i <= 2 * g { c[i] * s[k - i] } else { 0 }).sum();
        let sk = -(sum + k as i128 * ck);
        s.push(sk);
        out.push(u64::try_from(q.pow(k as u32) + 1 - sk).ok()?);
    }
    Some(out)
}

/// Exact histogram of `N_1` under the `1/#Aut` measure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedDistribution {
    pub q: u64,
    pub genus: u32,
    pub group_order: u64,
    /// Number of smooth equations with each point count.
    pub equation_counts: BTreeMap<u64, u64>,
    pub masses: BTreeMap<u64, BigRational>,
    pub total_mass: BigRational,
}

impl WeightedDistribution {
    pub fn from_counts(q: u64, genus: u32, group_order: u64, points: impl IntoIterator<Item = u64>) -> Self {
        let mut equation_counts = BTreeMap::new();
        for n in points {
            *equation_counts.entry(n).or_insert(0u64) += 1;
        }
        let g = BigInt::from(group_order);
        let masses: BTreeMap<u64, BigRational> = equation_counts
            .iter()
            .map(|(&n, &c)| (n, BigRational::new(BigInt::from(c), g.clone())))
            .collect();
        let total_mass = masses.values().fold(BigRational::zero(), |acc, m| acc + m);
        Self {
            q,
            genus,
            group_order,
            equation_counts,
            masses,
            total_mass,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    fn moments_with(&self, n_max: u32, weight: impl Fn(u64, u32) -> BigInt, kind: MomentKind) -> Result<MomentVector> {
        if self.total_mass.is_zero() {
            return Err(LabError::ZeroMass);
        }
        let values = (1..=n_max)
            .map(|order| {
                let s = self
                    .masses
                    .iter()
                    .fold(BigRational::zero(), |acc, (&n, m)| {
                        acc + m * BigRational::from_integer(weight(n, order))
                    });
                s / &self.total_mass
            })
            .collect();
        Ok(MomentVector::exact(kind, values))
    }

    pub fn raw_moments(&self, n_max: u32) -> Result<MomentVector> {
        self.moments_with(n_max, |n, k| BigInt::from(n).pow(k), MomentKind::Raw)
    }

    /// `E[(N)_n]` for `n = 1..=n_max` from the histogram.
    pub fn falling_moments(&self, n_max: u32) -> Result<MomentVector> {
        self.moments_with(n_max, falling_factorial, MomentKind::Falling)
    }
}

pub fn falling_factorial(n: u64, k: u32) -> BigInt {
    (0..u64::from(k)).fold(BigInt::from(1), |acc, i| acc * (BigInt::from(n) - BigInt::from(i)))
}

/// Alias kept for the operation name used in reports.
pub fn empirical_falling_moments(dist: &WeightedDistribution, n_max: u32) -> Result<MomentVector> {
    dist.falling_moments(n_max)
}

/// Falling moments summed equation by equation: `sum_eq (N_eq)_n / |G|`
/// divided by `sum_eq 1/|G|`. Independent of the histogram path.
pub fn direct_falling_moments(points: &[u64], group_order: u64, n_max: u32) -> Result<Vec<BigRational>> {
    if points.is_empty() {
        return Err(LabError::ZeroMass);
    }
    let g = BigInt::from(group_order);
    let total = BigRational::new(BigInt::from(points.len()), g.clone());
    Ok((1..=n_max)
        .map(|k| {
            let sum: BigInt = points.iter().map(|&n| falling_factorial(n, k)).sum();
            BigRational::new(sum, g.clone()) / &total
        })
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct ZetaSummary {
    pub checked: u64,
    pub passed: u64,
}

#[derive(Debug, Clone)]
pub struct CensusConfig {
    pub kind: CurveKind,
    pub q: u64,
    /// Largest extension degree `k` for which `#C(F_{q^k})` is computed.
    pub max_extension: u32,
    pub workers: usize,
}

impl CensusConfig {
    pub fn new(kind: CurveKind, q: u64) -> Self {
        Self {
            kind,
            q,
            max_extension: 4,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Census {
    pub kind: CurveKind,
    pub field: FieldInfo,
    pub extension_fields: Vec<FieldInfo>,
    pub candidates: u64,
    pub group: GroupSpec,
    pub curves: Vec<CurveCounts>,
    pub distribution: WeightedDistribution,
    pub weil_checks: u64,
    pub zeta: ZetaSummary,
}

impl Census {
    pub fn smooth(&self) -> u64 {
        self.curves.len() as u64
    }

    pub fn first_counts(&self) -> Vec<u64> {
        self.curves.iter().map(|c| c.counts[0]).collect()
    }
}

/// Full census: enumerate, count points over `F_{q^k}` for `k <= max_extension`,
/// assert Hasse-Weil and zeta consistency, and build the weighted distribution.
pub fn run_census(config: &CensusConfig) -> Result<Census> {
    if config.max_extension == 0 {
        return Err(LabError::InvalidParameter("max_extension must be >= 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.max(1))
        .build()
        .map_err(|e| LabError::InvalidParameter(e.to_string()))?;
    pool.install(|| census_inner(config))
}

fn census_inner(config: &CensusConfig) -> Result<Census> {
    let tower = FieldTower::new(config.q, config.max_extension)?;
    let base = &tower.base;
    let kind = config.kind;
    let genus = kind.genus();
    let space = candidate_space(kind, base);
    let smooth = enumerate_curves(kind, base)?;
    if smooth.is_empty() {
        return Err(LabError::UnsupportedKind {
            kind: kind.to_string(),
            q: config.q,
        });
    }
    let curves: Vec<CurveCounts> = smooth
        .par_iter()
        .map(|c| CurveCounts {
            index: c.index(base),
            counts: point_counts(c, &tower),
        })
        .collect();

    let q = config.q;
    let mut weil_checks = 0u64;
    for c in &curves {
        for (i, &n) in c.counts.iter().enumerate() {
            weil_checks += 1;
            if !within_weil_bound(n, q, i as u32 + 1, genus) {
                return Err(LabError::InvariantViolated(format!(
                    "Hasse-Weil bound fails for {kind} equation #{} over F_{q}^{}: N = {n}",
                    c.index,
                    i + 1
                )));
            }
        }
    }

    let k_max = config.max_extension as usize;
    let mut zeta = ZetaSummary { checked: 0, passed: 0 };
    if k_max > genus as usize {
        for c in &curves {
            zeta.checked += 1;
            match predict_counts_from_zeta(&c.counts, q, genus, k_max) {
                Some(pred) if pred[..] == c.counts[genus as usize..] => zeta.passed += 1,
                _ => {
                    return Err(LabError::InvariantViolated(format!(
                        "zeta functional equation inconsistent for {kind} equation #{}: counts {:?}",
                        c.index, c.counts
                    )))
                }
            }
        }
    }

    let group = group_order(kind, base);
    let distribution =
        WeightedDistribution::from_counts(q, genus, group.order, curves.iter().map(|c| c.counts[0]));
    Ok(Census {
        kind,
        field: FieldInfo::from(base),
        extension_fields: tower.extensions.iter().map(|(f, _)| FieldInfo::from(f)).collect(),
        candidates: space as u64,
        group,
        curves,
        distribution,
        weil_checks,
        zeta,
    })
}

/// Serializable view of a census.
#[derive(Debug, Clone, Serialize)]
pub struct CensusRecord {
    pub kind: CurveKind,
    pub genus: u32,
    pub field: FieldInfo,
    pub extension_fields: Vec<FieldInfo>,
    pub candidates: u64,
    pub smooth_equations: u64,
    pub group: GroupSpec,
    pub histogram: Vec<HistogramRow>,
    pub total_mass: String,
    pub raw_moments: Vec<String>,
    pub falling_moments: Vec<String>,
    pub falling_moments_decimal: Vec<f64>,
    pub weil_checks: u64,
    pub zeta_checks: ZetaSummary,
}

#[derive(Debug, Clone, Serialize)]
pub struct HistogramRow {
    pub points: u64,
    pub equations: u64,
    pub mass: String,
}

impl CensusRecord {
    pub fn new(census: &Census, n_max: u32) -> Result<Self> {
        let d = &census.distribution;
        let raw = d.raw_moments(n_max)?;
        let falling = d.falling_moments(n_max)?;
        let as_strings = |m: &MomentVector| {
            m.values
                .iter()
                .map(|v| match v {
                    crate::exactcomb::MomentValue::Exact(x) => ratio_string(x),
                    crate::exactcomb::MomentValue::Certified(c) => c.to_decimal(c.digits),
                })
                .collect::<Vec<_>>()
        };
        Ok(Self {
            kind: census.kind,
            genus: census.kind.genus(),
            field: census.field.clone(),
            extension_fields: census.extension_fields.clone(),
            candidates: census.candidates,
            smooth_equations: census.smooth(),
            group: census.group.clone(),
            histogram: d
                .equation_counts
                .iter()
                .map(|(&points, &equations)| HistogramRow {
                    points,
                    equations,
                    mass: ratio_string(&d.masses[&points]),
                })
                .collect(),
            total_mass: ratio_string(&d.total_mass),
            raw_moments: as_strings(&raw),
            falling_moments: as_strings(&falling),
            falling_moments_decimal: falling.values.iter().map(|v| v.to_f64()).collect(),
            weil_checks: census.weil_checks,
            zeta_checks: census.zeta.clone(),
        })
    }
}
