use std::fs;
use std::path::Path;

use curvestat_core::census::{
    candidate_space, enumerate_curves, run_census, validate_orbits, CensusConfig, CensusRecord, FiniteField,
    OrbitValidation,
};
use curvestat_core::exactcomb::certified::{decimal_string, poisson_pmf_table, Certified};
use curvestat_core::exactcomb::series::hilbert_series;
use curvestat_core::exactcomb::{
    graded_dimensions, hs_partial_sum, hs_ratio_closed_form, lambda_of_q, parse_ratio, predicted_falling_moment,
    predicted_moment, ratio_string, truncated_hs_ratio,
};
use curvestat_core::rmt::{run_experiment, weil_window, ConstraintConfig, ExperimentConfig, ExperimentReport};
use curvestat_core::traceformula::{kprime_search, ratio_prediction, KPrimeReport, TraceProfile, TraceProfileRecord};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{CensusArgs, PredictArgs, ReportArgs, RmtArgs, SeriesArgs, TraceArgs};
use crate::error::CliError;
use crate::output::{Table, LIMITATIONS};

/// Fractional digits of decimal renderings of exact values.
pub const DECIMAL_DIGITS: u32 = 20;

#[derive(Debug, Serialize)]
pub struct Decimal {
    pub value: String,
    pub precision_digits: u32,
}

impl Decimal {
    fn of(x: &BigRational) -> Self {
        Self {
            value: decimal_string(x, DECIMAL_DIGITS),
            precision_digits: DECIMAL_DIGITS,
        }
    }
}

fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

// ---------------------------------------------------------------- predict

#[derive(Debug, Serialize)]
pub struct MomentRow {
    pub n: u32,
    pub raw: String,
    pub raw_decimal: Decimal,
    pub falling: String,
    pub falling_decimal: Decimal,
}

#[derive(Debug, Serialize)]
pub struct PmfRow {
    pub n: u64,
    pub pmf: Certified,
}

#[derive(Debug, Serialize)]
pub struct PredictPayload {
    pub q: u64,
    pub lambda: String,
    pub lambda_decimal: Decimal,
    pub moments: Vec<MomentRow>,
    pub window_genus: u32,
    pub window: (u64, u64),
    pub pmf: Vec<PmfRow>,
}

pub fn predict(a: &PredictArgs) -> Result<(Value, PredictPayload), CliError> {
    let lambda = lambda_of_q(a.q)?;
    if a.g < 1 {
        return Err(CliError::Usage("--g must be >= 1".into()));
    }
    if a.digits < 1 {
        return Err(CliError::Usage("--digits must be >= 1".into()));
    }
    let moments = (1..=a.n)
        .map(|n| {
            let raw = predicted_moment(n, a.q)?;
            let falling = predicted_falling_moment(n, a.q)?;
            Ok(MomentRow {
                n,
                raw: ratio_string(&raw),
                raw_decimal: Decimal::of(&raw),
                falling: ratio_string(&falling),
                falling_decimal: Decimal::of(&falling),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let window = weil_window(a.q, a.g);
    let table = poisson_pmf_table(window.1 as u32, &lambda, i64::from(a.digits))?;
    let pmf = (window.0..=window.1)
        .map(|n| PmfRow {
            n,
            pmf: table[n as usize].clone(),
        })
        .collect();
    let params = json!({ "q": a.q, "n": a.n, "g": a.g, "digits": a.digits });
    Ok((
        params,
        PredictPayload {
            q: a.q,
            lambda: ratio_string(&lambda),
            lambda_decimal: Decimal::of(&lambda),
            moments,
            window_genus: a.g,
            window,
            pmf,
        },
    ))
}

pub fn predict_table(p: &PredictPayload) -> Table {
    Table {
        header: vec!["n", "raw_moment", "raw_decimal", "falling_moment", "falling_decimal"],
        rows: p
            .moments
            .iter()
            .map(|m| {
                vec![
                    m.n.to_string(),
                    m.raw.clone(),
                    m.raw_decimal.value.clone(),
                    m.falling.clone(),
                    m.falling_decimal.value.clone(),
                ]
            })
            .collect(),
    }
}

// ---------------------------------------------------------------- series

#[derive(Debug, Serialize)]
pub struct SeriesPayload {
    pub n: u32,
    pub depth: usize,
    /// `dim R_n^{2j}` for `j = 0..=depth`.
    pub dimensions: Vec<String>,
    /// Product form of the Hilbert series equals the `Q_n(z^2) P(z^2)` convolution.
    pub hilbert_identity_holds: bool,
    pub q: u64,
    pub closed_form_ratio: String,
    pub truncated_ratio: String,
    pub truncated_ratio_decimal: Decimal,
    pub truncation_gap: f64,
}

pub fn series(a: &SeriesArgs) -> Result<(Value, SeriesPayload), CliError> {
    let dims = graded_dimensions(a.n, a.depth);
    let hs = hilbert_series(a.n, a.depth);
    let identity = (0..=2 * a.depth).all(|d| {
        let want = if d % 2 == 0 {
            BigRational::from_integer(dims[d / 2].clone().into())
        } else {
            BigRational::from_integer(0.into())
        };
        hs.coeff(d) == Some(&want)
    });
    let closed = hs_ratio_closed_form(a.n, a.q)?;
    let truncated = truncated_hs_ratio(a.n, a.q, a.depth)?;
    let params = json!({ "n": a.n, "depth": a.depth, "q": a.q });
    Ok((
        params,
        SeriesPayload {
            n: a.n,
            depth: a.depth,
            dimensions: dims.iter().map(|d| d.to_string()).collect(),
            hilbert_identity_holds: identity,
            q: a.q,
            closed_form_ratio: ratio_string(&closed),
            truncated_ratio: ratio_string(&truncated),
            truncated_ratio_decimal: Decimal::of(&truncated),
            truncation_gap: to_f64(&(&closed - &truncated).abs()),
        },
    ))
}

pub fn series_table(p: &SeriesPayload) -> Table {
    Table {
        header: vec!["j", "dimension"],
        rows: p
            .dimensions
            .iter()
            .enumerate()
            .map(|(j, d)| vec![j.to_string(), d.clone()])
            .collect(),
    }
}

// ---------------------------------------------------------------- trace

#[derive(Debug, Serialize)]
pub struct TraceRow {
    #[serde(flatten)]
    pub profile: TraceProfileRecord,
    pub ratio_prediction: String,
    pub ratio_prediction_decimal: f64,
    /// `|stable - truncated HS target|`.
    pub gap_to_target: f64,
}

#[derive(Debug, Serialize)]
pub struct TracePayload {
    pub n: u32,
    pub q: u64,
    pub depth: usize,
    pub target: String,
    pub target_decimal: Decimal,
    pub rows: Vec<TraceRow>,
    pub final_gap: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kprime: Option<KPrimeReport>,
}

pub fn trace(a: &TraceArgs) -> Result<(Value, TracePayload), CliError> {
    if a.gmax < a.g {
        return Err(CliError::Usage(format!("empty genus range {}..={}", a.g, a.gmax)));
    }
    let target = hs_partial_sum(a.n, a.q, a.depth)?;
    let rows = (a.g..=a.gmax)
        .map(|g| {
            let profile = TraceProfile::compute(g, a.n, a.q)?;
            let ratio = ratio_prediction(g, a.n, a.q)?;
            Ok(TraceRow {
                gap_to_target: to_f64(&(&profile.stable_normalized - &target).abs()),
                profile: TraceProfileRecord::from(&profile),
                ratio_prediction: ratio_string(&ratio),
                ratio_prediction_decimal: to_f64(&ratio),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let kprime = a.k.map(|k| kprime_search(k, a.n, a.kprime_gmax)).transpose()?;
    let params = json!({
        "g": a.g, "gmax": a.gmax, "n": a.n, "q": a.q, "depth": a.depth,
        "K": a.k, "kprime_gmax": a.k.map(|_| a.kprime_gmax),
    });
    Ok((
        params,
        TracePayload {
            n: a.n,
            q: a.q,
            depth: a.depth,
            target: ratio_string(&target),
            target_decimal: Decimal::of(&target),
            final_gap: rows.last().map_or(f64::NAN, |r| r.gap_to_target),
            rows,
            kprime,
        },
    ))
}

pub fn trace_table(p: &TracePayload) -> Table {
    Table {
        header: vec![
            "g",
            "d",
            "stable_normalized",
            "unstable_tail_exact",
            "unstable_tail_bound",
            "ratio_prediction",
            "gap_to_target",
        ],
        rows: p
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.profile.g.to_string(),
                    r.profile.d.to_string(),
                    r.profile.stable_normalized_decimal.to_string(),
                    r.profile.unstable_tail_decimal.to_string(),
                    r.profile.unstable_tail_bound.to_string(),
                    r.ratio_prediction_decimal.to_string(),
                    r.gap_to_target.to_string(),
                ]
            })
            .collect(),
    }
}

// ---------------------------------------------------------------- rmt

pub fn rmt(a: &RmtArgs, workers: usize) -> Result<(Value, ExperimentReport), CliError> {
    let mut constraints = if a.no_constraints {
        ConstraintConfig::none()
    } else if a.positivity {
        ConstraintConfig::positivity_only()
    } else {
        ConstraintConfig::all(a.epsilon, a.max_index)
    };
    if !a.discreteness_index.is_empty() {
        if constraints.discreteness.is_none() {
            return Err(CliError::Usage("--discreteness-index needs discreteness enabled".into()));
        }
        constraints.discreteness_indices = a.discreteness_index.clone();
    }
    let mut cfg = ExperimentConfig::new(a.g, a.q, a.samples, a.seed);
    cfg.constraints = constraints;
    cfg.method = a.method.into();
    cfg.n_max = a.n;
    cfg.workers = workers;
    cfg.validate()?;
    let params = json!({
        "g": a.g, "q": a.q, "samples": a.samples, "seed": a.seed, "n": a.n,
        "method": cfg.method, "constraints": cfg.constraints,
    });
    Ok((params, run_experiment(&cfg)?))
}

pub fn rmt_table(r: &ExperimentReport) -> Table {
    Table {
        header: vec!["n1", "count"],
        rows: r.histogram.iter().map(|(n, c)| vec![n.to_string(), c.to_string()]).collect(),
    }
}

// ---------------------------------------------------------------- census

/// `p^k`, or a plain prime power.
pub fn parse_field(spec: &str) -> Result<FiniteField, CliError> {
    let bad = || CliError::Usage(format!("invalid field `{spec}` (expected p^k or a prime power)"));
    let field = match spec.split_once('^') {
        Some((p, k)) => FiniteField::new(p.trim().parse().map_err(|_| bad())?, k.trim().parse().map_err(|_| bad())?),
        None => FiniteField::with_order(spec.trim().parse().map_err(|_| bad())?),
    };
    Ok(field?)
}

#[derive(Debug, Serialize)]
pub struct CensusPayload {
    #[serde(flatten)]
    pub record: CensusRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orbit_validation: Option<OrbitValidation>,
}

/// Orbit decomposition enumerates the whole transformation family per class.
const MAX_ORBIT_WORK: u128 = 1 << 28;

pub fn census(a: &CensusArgs, workers: usize) -> Result<(Value, CensusPayload), CliError> {
    let field = match (&a.field, a.q) {
        (Some(spec), _) => parse_field(spec)?,
        (None, Some(q)) => FiniteField::with_order(q)?,
        (None, None) => return Err(CliError::Usage("one of --q or --field is required".into())),
    };
    let q = u64::from(field.order());
    let mut cfg = CensusConfig::new(a.kind, q);
    cfg.workers = workers;
    let c = run_census(&cfg)?;
    let record = CensusRecord::new(&c, a.n)?;
    let orbit_validation = if a.validate_orbits {
        let family = curvestat_core::census::group::family_size(a.kind, &field);
        let work = u128::from(family) * u128::from(c.smooth());
        if work > MAX_ORBIT_WORK || candidate_space(a.kind, &field) > MAX_ORBIT_WORK {
            return Err(CliError::Usage(format!(
                "orbit validation over F_{q} is too large ({work} transform applications)"
            )));
        }
        let smooth = enumerate_curves(a.kind, &field)?;
        Some(validate_orbits(a.kind, &field, &smooth))
    } else {
        None
    };
    let params = json!({
        "kind": a.kind, "q": q, "p": field.characteristic(), "k": field.degree(),
        "modulus": field.modulus_string(), "max_extension": cfg.max_extension,
        "n": a.n, "validate_orbits": a.validate_orbits,
    });
    Ok((params, CensusPayload { record, orbit_validation }))
}

pub fn census_table(p: &CensusPayload) -> Table {
    Table {
        header: vec!["points", "equations", "mass"],
        rows: p
            .record
            .histogram
            .iter()
            .map(|h| vec![h.points.to_string(), h.equations.to_string(), h.mass.clone()])
            .collect(),
    }
}

// ---------------------------------------------------------------- report

#[derive(Debug, Serialize)]
pub struct Source {
    pub path: String,
    pub command: String,
    pub genus: Option<u64>,
    pub q: u64,
}

#[derive(Debug, Serialize)]
pub struct ReportRow {
    pub order: u32,
    pub first: Option<String>,
    pub second: Option<String>,
    pub lambda_power: String,
    /// `first - lambda^n`.
    pub gap_first: Option<String>,
    pub gap_first_decimal: Option<f64>,
    /// `second - lambda^n`.
    pub gap_second: Option<String>,
    pub gap_second_decimal: Option<f64>,
    /// `first - second`.
    pub gap_between: Option<String>,
    pub gap_between_decimal: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct ReportPayload {
    pub q: u64,
    pub lambda: String,
    pub sources: [Source; 2],
    pub rows: Vec<ReportRow>,
    pub limitations: &'static str,
}

struct Loaded {
    source: Source,
    falling: Vec<BigRational>,
}

fn load(path: &Path) -> Result<Loaded, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let mismatch = |what: &str| CliError::Usage(format!("{}: schema mismatch ({what})", path.display()));
    let v: Value = serde_json::from_str(&text).map_err(|e| mismatch(&e.to_string()))?;
    let command = v["command"].as_str().ok_or_else(|| mismatch("no command"))?.to_string();
    let payload = &v["payload"];
    let (q, genus) = match command.as_str() {
        "census" => (payload["field"]["q"].as_u64(), payload["genus"].as_u64()),
        "rmt" => (payload["q"].as_u64(), payload["g"].as_u64()),
        other => return Err(mismatch(&format!("command `{other}` has no falling moments"))),
    };
    let q = q.ok_or_else(|| mismatch("no field order"))?;
    let falling = payload["falling_moments"]
        .as_array()
        .ok_or_else(|| mismatch("no falling_moments"))?
        .iter()
        .map(|x| x.as_str().and_then(parse_ratio).ok_or_else(|| mismatch("falling moment is not num/den")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Loaded {
        source: Source {
            path: path.display().to_string(),
            command,
            genus,
            q,
        },
        falling,
    })
}

pub fn report(a: &ReportArgs) -> Result<(Value, ReportPayload), CliError> {
    let first = load(&a.census)?;
    let second = load(&a.rmt)?;
    let q = first.source.q;
    if second.source.q != q || a.q.is_some_and(|x| x != q) {
        return Err(CliError::Usage(format!(
            "schema mismatch: field orders differ ({}, {}{})",
            first.source.q,
            second.source.q,
            a.q.map(|x| format!(", --q {x}")).unwrap_or_default()
        )));
    }
    let lambda = lambda_of_q(q)?;
    let orders = first.falling.len().max(second.falling.len()) as u32;
    let diff = |x: Option<&BigRational>, y: Option<&BigRational>| match (x, y) {
        (Some(x), Some(y)) => {
            let d = x - y;
            (Some(ratio_string(&d)), Some(to_f64(&d)))
        }
        _ => (None, None),
    };
    let rows = (1..=orders)
        .map(|n| {
            let lp = predicted_falling_moment(n, q)?;
            let f = first.falling.get(n as usize - 1);
            let s = second.falling.get(n as usize - 1);
            let (gap_first, gap_first_decimal) = diff(f, Some(&lp));
            let (gap_second, gap_second_decimal) = diff(s, Some(&lp));
            let (gap_between, gap_between_decimal) = diff(f, s);
            Ok(ReportRow {
                order: n,
                first: f.map(ratio_string),
                second: s.map(ratio_string),
                lambda_power: ratio_string(&lp),
                gap_first,
                gap_first_decimal,
                gap_second,
                gap_second_decimal,
                gap_between,
                gap_between_decimal,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let params = json!({
        "census": first.source.path, "rmt": second.source.path, "q": q,
    });
    Ok((
        params,
        ReportPayload {
            q,
            lambda: ratio_string(&lambda),
            sources: [first.source, second.source],
            rows,
            limitations: LIMITATIONS,
        },
    ))
}

pub fn report_table(p: &ReportPayload) -> Table {
    let opt = |x: &Option<String>| x.clone().unwrap_or_default();
    let optf = |x: &Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    Table {
        header: vec!["order", "first", "second", "lambda_power", "gap_first", "gap_second", "gap_between"],
        rows: p
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.order.to_string(),
                    opt(&r.first),
                    opt(&r.second),
                    r.lambda_power.clone(),
                    optf(&r.gap_first_decimal),
                    optf(&r.gap_second_decimal),
                    optf(&r.gap_between_decimal),
                ]
            })
            .collect(),
    }
}
