//! Equation-transformation groups and orbit-stabilizer validation.
//!
//! The uniform measure on smooth normal-form equations, divided by the
//! group order, equals the groupoid count `sum 1/#Aut(C)`: each isomorphism
//! class is an orbit of size `|G| / #Aut(C)`. [`validate_orbits`] checks that
//! statement directly on small fields instead of assuming it.

use std::collections::{BTreeMap, HashSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use super::curve::{CurveEquation, CurveKind};
use super::field::{Fe, FiniteField};
use super::poly::Poly;
use crate::exactcomb::ratio_string;

/// Order of the group acting on isomorphism classes, with its formula.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupSpec {
    pub kind: CurveKind,
    pub q: u64,
    pub order: u64,
    pub formula: String,
}

pub fn group_order(kind: CurveKind, field: &FiniteField) -> GroupSpec {
    let q = u64::from(field.order());
    let gl2 = (q * q - 1) * (q * q - q);
    let (order, formula) = match kind {
        CurveKind::WeierstrassGenus1 => (q.pow(3) * (q - 1), "q^3 (q-1)".to_string()),
        CurveKind::HyperellipticGenus2 if field.characteristic() == 2 => {
            (gl2 * q.pow(4), "(q^2-1)(q^2-q) q^(g+2), g=2".to_string())
        }
        CurveKind::HyperellipticGenus2 => (gl2, "(q^2-1)(q^2-q)".to_string()),
    };
    GroupSpec {
        kind,
        q,
        order,
        formula,
    }
}

/// One coordinate change.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Transform {
    /// `x = u^2 x' + r`, `y = u^3 y' + s u^2 x' + t`.
    Weierstrass { u: Fe, r: Fe, s: Fe, t: Fe },
    /// `x = (aX + b)/(cX + d)`, `y = (e Y + j(X)) / (cX + d)^3`.
    Hyperelliptic { m: [Fe; 4], e: Fe, j: [Fe; 4] },
}

/// Every parameter tuple of the transformation family, before identifying
/// the scalar subgroup that acts trivially on curves.
pub fn all_transforms(kind: CurveKind, field: &FiniteField) -> Vec<Transform> {
    let els: Vec<Fe> = field.elements().collect();
    let units: Vec<Fe> = field.elements().skip(1).collect();
    let mut out = Vec::new();
    match kind {
        CurveKind::WeierstrassGenus1 => {
            for &u in &units {
                for &r in &els {
                    for &s in &els {
                        for &t in &els {
                            out.push(Transform::Weierstrass { u, r, s, t });
                        }
                    }
                }
            }
        }
        CurveKind::HyperellipticGenus2 => {
            let translations: Vec<[Fe; 4]> = if field.characteristic() == 2 {
                let q = field.order();
                (0..q.pow(4))
                    .map(|i| [i % q, (i / q) % q, (i / q / q) % q, i / q / q / q])
                    .collect()
            } else {
                vec![[0; 4]]
            };
            for &a in &els {
                for &b in &els {
                    for &c in &els {
                        for &d in &els {
                            if field.sub(field.mul(a, d), field.mul(b, c)) == 0 {
                                continue;
                            }
                            for &e in &units {
                                for j in &translations {
                                    out.push(Transform::Hyperelliptic { m: [a, b, c, d], e, j: *j });
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// `all_transforms(kind, field).len()` without building the list.
pub fn family_size(kind: CurveKind, field: &FiniteField) -> u64 {
    let q = u64::from(field.order());
    match kind {
        CurveKind::WeierstrassGenus1 => group_order(kind, field).order,
        CurveKind::HyperellipticGenus2 => group_order(kind, field).order * (q - 1),
    }
}

/// The subgroup `(lambda I, lambda^3, 0)` that fixes every genus-2 equation
/// (trivial for genus 1).
pub fn identification_subgroup(kind: CurveKind, field: &FiniteField) -> Vec<Transform> {
    match kind {
        CurveKind::WeierstrassGenus1 => vec![Transform::Weierstrass { u: 1, r: 0, s: 0, t: 0 }],
        CurveKind::HyperellipticGenus2 => field
            .elements()
            .skip(1)
            .map(|l| Transform::Hyperelliptic {
                m: [l, 0, 0, l],
                e: field.pow(l, 3),
                j: [0; 4],
            })
            .collect(),
    }
}

/// Transformed equation.
pub fn act(field: &FiniteField, t: &Transform, curve: &CurveEquation) -> CurveEquation {
    match *t {
        Transform::Weierstrass { u, r, s, t } => {
            let a = &curve.coefficients;
            let (a1, a2, a3, a4, a6) = (a[0], a[1], a[2], a[3], a[4]);
            let k = |n: i64| field.from_int(n);
            let mul = |x: Fe, y: Fe| field.mul(x, y);
            let add = |x: Fe, y: Fe| field.add(x, y);
            let sub = |x: Fe, y: Fe| field.sub(x, y);
            let ui = field.inv(u).expect("u is a unit");
            let upow = |e: u64| field.pow(ui, e);

            let na1 = add(a1, mul(k(2), s));
            let na2 = sub(add(sub(a2, mul(s, a1)), mul(k(3), r)), mul(s, s));
            let na3 = add(add(a3, mul(r, a1)), mul(k(2), t));
            let na4 = sub(
                add(
                    sub(add(sub(a4, mul(s, a3)), mul(mul(k(2), r), a2)), mul(add(t, mul(r, s)), a1)),
                    mul(k(3), mul(r, r)),
                ),
                mul(mul(k(2), s), t),
            );
            let na6 = sub(
                sub(
                    sub(
                        add(add(add(a6, mul(r, a4)), mul(mul(r, r), a2)), mul(mul(r, r), r)),
                        mul(t, a3),
                    ),
                    mul(t, t),
                ),
                mul(mul(r, t), a1),
            );
            CurveEquation::genus1([
                mul(na1, upow(1)),
                mul(na2, upow(2)),
                mul(na3, upow(3)),
                mul(na4, upow(4)),
                mul(na6, upow(6)),
            ])
        }
        Transform::Hyperelliptic { m: [a, b, c, d], e, j } => {
            let model = curve.model(field);
            let num = Poly::new(vec![b, a]);
            let den = Poly::new(vec![d, c]);
            let homogenize = |p: &Poly, deg: usize| {
                // sum p_i (aX+b)^i (cX+d)^{deg-i}
                let mut acc = Poly::zero();
                let mut num_pow = vec![Poly::new(vec![1])];
                let mut den_pow = vec![Poly::new(vec![1])];
                for _ in 0..deg {
                    num_pow.push(num_pow.last().unwrap().mul(field, &num));
                    den_pow.push(den_pow.last().unwrap().mul(field, &den));
                }
                for i in 0..=deg {
                    let ci = p.coeff(i);
                    if ci != 0 {
                        let term = num_pow[i].mul(field, &den_pow[deg - i]).scale(field, ci);
                        acc = acc.add(field, &term);
                    }
                }
                acc
            };
            let big_h = homogenize(&model.h, 3);
            let big_f = homogenize(&model.f, 6);
            let jp = Poly::new(j.to_vec());
            let einv = field.inv(e).expect("e is a unit");
            let new_h = big_h.scale(field, einv);
            let new_f = if jp.is_zero() {
                big_f
            } else {
                // characteristic 2 only: (eY + j)^2 + H (eY + j) = F
                big_f.add(field, &jp.mul(field, &jp)).add(field, &big_h.mul(field, &jp))
            }
            .scale(field, field.square(einv));
            let mut hh = new_h.0.clone();
            hh.resize(4, 0);
            let mut ff = new_f.0.clone();
            ff.resize(7, 0);
            CurveEquation::genus2(&hh, &ff)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitValidation {
    pub kind: CurveKind,
    pub q: u64,
    pub smooth_equations: u64,
    /// Size of the enumerated parameter family.
    pub family_size: u64,
    /// Size of the scalar subgroup identified away.
    pub identification: u64,
    pub group_order: u64,
    pub orbits: u64,
    /// `#Aut -> number of classes` over the enumerated locus.
    pub automorphism_histogram: BTreeMap<u64, u64>,
    /// `sum over classes of 1/#Aut`, as "num/den".
    pub groupoid_sum: String,
    /// `smooth_equations / group_order`, as "num/den".
    pub mass_formula: String,
    pub orbit_sizes_consistent: bool,
    pub identification_acts_trivially: bool,
    pub consistent: bool,
}

/// Explicit orbit decomposition of the smooth equations; feasible for `q <= 3`
/// (and `q = 4` for genus 1).
pub fn validate_orbits(kind: CurveKind, field: &FiniteField, smooth: &[CurveEquation]) -> OrbitValidation {
    let family = all_transforms(kind, field);
    let ident = identification_subgroup(kind, field);
    let spec = group_order(kind, field);
    let family_size = family.len() as u64;
    let ident_size = ident.len() as u64;

    let identification_acts_trivially = smooth
        .iter()
        .all(|c| ident.iter().all(|t| act(field, t, c) == *c));

    let mut seen: HashSet<u64> = HashSet::with_capacity(smooth.len());
    let mut orbit_sizes_consistent = true;
    let mut groupoid_sum = BigRational::zero();
    let mut histogram = BTreeMap::new();
    let mut orbits = 0u64;
    let mut covered = 0u64;
    for curve in smooth {
        let idx = curve.index(field);
        if seen.contains(&idx) {
            continue;
        }
        orbits += 1;
        let mut orbit: HashSet<u64> = HashSet::new();
        let mut stabilizer = 0u64;
        for t in &family {
            let image = act(field, t, curve);
            let image_idx = image.index(field);
            if image_idx == idx {
                stabilizer += 1;
            }
            orbit.insert(image_idx);
        }
        let size = orbit.len() as u64;
        if size * stabilizer != family_size || !stabilizer.is_multiple_of(ident_size) {
            orbit_sizes_consistent = false;
        }
        let aut = stabilizer / ident_size;
        *histogram.entry(aut).or_insert(0) += 1;
        groupoid_sum += BigRational::new(BigInt::from(1), BigInt::from(aut.max(1)));
        covered += size;
        seen.extend(orbit);
    }
    // Orbits must stay inside the smooth locus and exhaust it.
    if covered != smooth.len() as u64 {
        orbit_sizes_consistent = false;
    }
    let mass = BigRational::new(BigInt::from(smooth.len()), BigInt::from(spec.order));
    let consistent = orbit_sizes_consistent
        && identification_acts_trivially
        && family_size == spec.order * ident_size
        && groupoid_sum == mass;
    OrbitValidation {
        kind,
        q: u64::from(field.order()),
        smooth_equations: smooth.len() as u64,
        family_size,
        identification: ident_size,
        group_order: spec.order,
        orbits,
        automorphism_histogram: histogram,
        groupoid_sum: ratio_string(&groupoid_sum),
        mass_formula: ratio_string(&mass),
        orbit_sizes_consistent,
        identification_acts_trivially,
        consistent,
    }
}
