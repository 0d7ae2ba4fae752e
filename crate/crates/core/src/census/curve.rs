//! Normal-form curve equations, smoothness predicates and point counts.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::field::{Fe, FiniteField};
use super::poly::Poly;
use crate::error::LabError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveKind {
    /// Long Weierstrass cubics `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6`,
    /// counted as the `M_{1,1}` groupoid (base point at infinity).
    WeierstrassGenus1,
    /// `y^2 + h(x) y = f(x)` with `deg h <= 3`, `deg f <= 6`; `h = 0` in odd characteristic.
    HyperellipticGenus2,
}

impl CurveKind {
    pub fn genus(self) -> u32 {
        match self {
            CurveKind::WeierstrassGenus1 => 1,
            CurveKind::HyperellipticGenus2 => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CurveKind::WeierstrassGenus1 => "genus1",
            CurveKind::HyperellipticGenus2 => "genus2",
        }
    }

    /// Number of free coefficients enumerated over `F_q` of characteristic `p`.
    pub fn coefficient_count(self, p: u32) -> usize {
        match self {
            CurveKind::WeierstrassGenus1 => 5,
            CurveKind::HyperellipticGenus2 if p == 2 => 11,
            CurveKind::HyperellipticGenus2 => 7,
        }
    }
}

impl fmt::Display for CurveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CurveKind {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "genus1" | "weierstrass" | "weierstrass-genus1" => Ok(CurveKind::WeierstrassGenus1),
            "genus2" | "hyperelliptic" | "hyperelliptic-genus2" => Ok(CurveKind::HyperellipticGenus2),
            other => Err(LabError::UnsupportedKind {
                kind: other.to_string(),
                q: 0,
            }),
        }
    }
}

/// Coefficients of a normal-form equation over a fixed base field.
///
/// Genus 1: `[a1, a2, a3, a4, a6]`. Genus 2: `[h0..h3, f0..f6]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct CurveEquation {
    pub kind: CurveKind,
    pub coefficients: Vec<Fe>,
}

/// `y^2 + h(x) y = f(x)` with formal degrees `(g+1, 2g+2)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HyperellipticModel {
    pub h: Poly,
    pub f: Poly,
    pub genus: u32,
}

impl CurveEquation {
    pub fn genus1(a: [Fe; 5]) -> Self {
        Self {
            kind: CurveKind::WeierstrassGenus1,
            coefficients: a.to_vec(),
        }
    }

    /// Genus-2 equation from `h` (up to 4 coefficients) and `f` (up to 7).
    pub fn genus2(h: &[Fe], f: &[Fe]) -> Self {
        assert!(h.len() <= 4 && f.len() <= 7);
        let mut c = vec![0; 11];
        c[..h.len()].copy_from_slice(h);
        c[4..4 + f.len()].copy_from_slice(f);
        Self {
            kind: CurveKind::HyperellipticGenus2,
            coefficients: c,
        }
    }

    /// Decode the `index`-th candidate (base-`q` digits, lowest coefficient first).
    pub fn from_index(kind: CurveKind, field: &FiniteField, mut index: u64) -> Self {
        let q = u64::from(field.order());
        let n = kind.coefficient_count(field.characteristic());
        let mut digits = Vec::with_capacity(n);
        for _ in 0..n {
            digits.push((index % q) as Fe);
            index /= q;
        }
        match kind {
            CurveKind::WeierstrassGenus1 => Self {
                kind,
                coefficients: digits,
            },
            CurveKind::HyperellipticGenus2 if n == 11 => Self {
                kind,
                coefficients: digits,
            },
            CurveKind::HyperellipticGenus2 => Self::genus2(&[], &digits),
        }
    }

    /// Inverse of [`CurveEquation::from_index`].
    pub fn index(&self, field: &FiniteField) -> u64 {
        let q = u64::from(field.order());
        let free: &[Fe] = match self.kind {
            CurveKind::HyperellipticGenus2 if field.characteristic() != 2 => &self.coefficients[4..],
            _ => &self.coefficients,
        };
        free.iter().rev().fold(0, |acc, &c| acc * q + u64::from(c))
    }

    pub fn model(&self, field: &FiniteField) -> HyperellipticModel {
        let c = &self.coefficients;
        match self.kind {
            CurveKind::WeierstrassGenus1 => HyperellipticModel {
                h: Poly::new(vec![c[2], c[0]]),
                f: Poly::new(vec![c[4], c[3], c[1], field.from_int(1)]),
                genus: 1,
            },
            CurveKind::HyperellipticGenus2 => HyperellipticModel {
                h: Poly::new(c[..4].to_vec()),
                f: Poly::new(c[4..].to_vec()),
                genus: 2,
            },
        }
    }

    pub fn is_smooth(&self, field: &FiniteField) -> bool {
        match self.kind {
            CurveKind::WeierstrassGenus1 => weierstrass_discriminant(field, &self.coefficients) != 0,
            CurveKind::HyperellipticGenus2 => {
                let m = self.model(field);
                if field.characteristic() == 2 {
                    smooth_char2(field, &m)
                } else {
                    smooth_odd(field, &m)
                }
            }
        }
    }

    /// `#C(F_{q^k})` given the extension field and the embedding of the base field.
    pub fn point_count(&self, base: &FiniteField, big: &FiniteField, embed: impl Fn(Fe) -> Fe) -> u64 {
        let m = self.model(base);
        let h = m.h.map(&embed);
        let f = m.f.map(&embed);
        count_points(big, &h, &f, m.genus)
    }
}

/// Standard discriminant of a long Weierstrass equation (valid in every characteristic).
pub fn weierstrass_discriminant(field: &FiniteField, a: &[Fe]) -> Fe {
    let (a1, a2, a3, a4, a6) = (a[0], a[1], a[2], a[3], a[4]);
    let k = |n: i64| field.from_int(n);
    let m = |x: Fe, y: Fe| field.mul(x, y);
    let add = |x: Fe, y: Fe| field.add(x, y);
    let sub = |x: Fe, y: Fe| field.sub(x, y);

    let b2 = add(m(a1, a1), m(k(4), a2));
    let b4 = add(m(k(2), a4), m(a1, a3));
    let b6 = add(m(a3, a3), m(k(4), a6));
    let b8 = sub(
        add(add(m(m(a1, a1), a6), m(m(k(4), a2), a6)), m(m(a2, a3), a3)),
        add(m(m(a1, a3), a4), m(a4, a4)),
    );
    // -b2^2 b8 - 8 b4^3 - 27 b6^2 + 9 b2 b4 b6
    let t1 = m(m(b2, b2), b8);
    let t2 = m(k(8), m(m(b4, b4), b4));
    let t3 = m(k(27), m(b6, b6));
    let t4 = m(k(9), m(m(b2, b4), b6));
    sub(sub(sub(t4, t1), t2), t3)
}

fn degree_or_zero(p: &Poly) -> usize {
    p.degree().unwrap_or(0)
}

/// Odd characteristic: `y^2 = h^2/4 + f` is smooth of genus 2 iff the binary
/// sextic `h^2 + 4f` is squarefree, i.e. squarefree with degree 5 or 6.
fn smooth_odd(field: &FiniteField, m: &HyperellipticModel) -> bool {
    let d = discriminant_poly(field, m);
    let top = 2 * m.genus as usize + 2;
    match d.degree() {
        Some(deg) if deg + 1 >= top => d.gcd(field, &d.derivative(field)).degree() == Some(0),
        _ => false,
    }
}

/// `h^2 + 4f`.
fn discriminant_poly(field: &FiniteField, m: &HyperellipticModel) -> Poly {
    m.h.mul(field, &m.h).add(field, &m.f.scale(field, field.from_int(4)))
}

/// Characteristic 2: `h != 0`, `gcd(h, f'^2 + h'^2 f) = 1`, nonsingular at
/// infinity (reversed pair at `x = 0`) and genus check on the degrees.
fn smooth_char2(field: &FiniteField, m: &HyperellipticModel) -> bool {
    if m.h.is_zero() {
        return false;
    }
    let g = m.genus as usize;
    let top = 2 * g + 2;
    let span = (2 * degree_or_zero(&m.h)).max(m.f.degree().unwrap_or(0));
    if span + 1 < top {
        return false;
    }
    let fp = m.f.derivative(field);
    let hp = m.h.derivative(field);
    let crit = fp.mul(field, &fp).add(field, &hp.mul(field, &hp).mul(field, &m.f));
    if m.h.gcd(field, &crit).degree() != Some(0) {
        return false;
    }
    // Chart at infinity: H(x) = x^{g+1} h(1/x), F(x) = x^{2g+2} f(1/x); singular
    // at x = 0 iff H(0) = 0 and F'(0)^2 + H'(0)^2 F(0) = 0.
    let h_top = m.h.coeff(g + 1);
    let h_next = m.h.coeff(g);
    let f_top = m.f.coeff(top);
    let f_next = m.f.coeff(top - 1);
    !(h_top == 0 && field.add(field.square(f_next), field.mul(field.square(h_next), f_top)) == 0)
}

/// Projective points of the smooth model of `y^2 + h y = f` over `field`.
pub fn count_points(field: &FiniteField, h: &Poly, f: &Poly, genus: u32) -> u64 {
    let top = 2 * genus as usize + 2;
    if field.characteristic() == 2 {
        let mut total = 0u64;
        for x in field.elements() {
            let hx = h.eval(field, x);
            total += if hx == 0 {
                1
            } else {
                let w = field.div(f.eval(field, x), field.square(hx)).unwrap();
                if field.trace(w) == 0 {
                    2
                } else {
                    0
                }
            };
        }
        let h_top = h.coeff(genus as usize + 1);
        total
            + if h_top == 0 {
                1
            } else {
                let w = field.div(f.coeff(top), field.square(h_top)).unwrap();
                if field.trace(w) == 0 {
                    2
                } else {
                    0
                }
            }
    } else {
        let d = h.mul(field, h).add(field, &f.scale(field, field.from_int(4)));
        let affine: i64 = field
            .elements()
            .map(|x| 1 + i64::from(field.chi(d.eval(field, x))))
            .sum();
        let lead = d.coeff(top);
        let infinity = if lead == 0 { 1 } else { 1 + i64::from(field.chi(lead)) };
        (affine + infinity) as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn y2_plus_y_equals_x5_over_f2() {
        let f2 = FiniteField::new(2, 1).unwrap();
        let c = CurveEquation::genus2(&[1], &[0, 0, 0, 0, 0, 1]);
        assert!(c.is_smooth(&f2));
        // x = 0: f = 0, trace 0 -> 2 points; x = 1: f = 1, trace 1 -> 0 points;
        // deg f = 5 odd -> one point at infinity.
        assert_eq!(c.point_count(&f2, &f2, |a| a), 3);
    }

    #[test]
    fn repeated_root_is_singular_in_odd_characteristic() {
        let f3 = FiniteField::new(3, 1).unwrap();
        // f = x^2 (x^4 + 1): repeated root at 0
        let c = CurveEquation::genus2(&[], &[0, 0, 1, 0, 0, 0, 1]);
        assert!(!c.is_smooth(&f3));
        // f = x^5 - x: squarefree (all of F_3 plus ...)
        let c = CurveEquation::genus2(&[], &[0, 2, 0, 0, 0, 1]);
        assert!(c.is_smooth(&f3));
        // degree 4 is genus 1
        let c = CurveEquation::genus2(&[], &[1, 0, 0, 0, 1]);
        assert!(!c.is_smooth(&f3));
    }

    #[test]
    fn weierstrass_discriminant_examples() {
        let f5 = FiniteField::new(5, 1).unwrap();
        // y^2 = x^3 + 1: disc = -16*27 = -432 = 3 mod 5
        assert_eq!(weierstrass_discriminant(&f5, &[0, 0, 0, 0, 1]), 3);
        // y^2 = x^3 is singular
        assert_eq!(weierstrass_discriminant(&f5, &[0, 0, 0, 0, 0]), 0);
        let f2 = FiniteField::new(2, 1).unwrap();
        // y^2 + y = x^3 is supersingular and smooth over F_2
        assert_ne!(weierstrass_discriminant(&f2, &[0, 0, 1, 0, 0]), 0);
    }

    #[test]
    fn index_round_trip() {
        for q in [2u64, 3, 4] {
            let f = FiniteField::with_order(q).unwrap();
            for kind in [CurveKind::WeierstrassGenus1, CurveKind::HyperellipticGenus2] {
                let space = q.pow(kind.coefficient_count(f.characteristic()) as u32);
                for idx in [0u64, 1, 17, space - 1] {
                    let c = CurveEquation::from_index(kind, &f, idx);
                    assert_eq!(c.index(&f), idx);
                }
            }
        }
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("genus2".parse::<CurveKind>().unwrap(), CurveKind::HyperellipticGenus2);
        assert!("quartic".parse::<CurveKind>().is_err());
    }
}
