//! Small finite fields `F_{p^k}` with log/antilog tables.
//!
//! Elements are encoded as integers `sum c_i p^i` where `c_0 + c_1 x + ...`
//! is the residue modulo a primitive modulus; the prime subfield is `0..p`.

use std::fmt;

use serde::Serialize;

use crate::error::{LabError, Result};

/// Encoded field element.
pub type Fe = u32;

/// Largest field order built with tables.
pub const MAX_FIELD_ORDER: u64 = 1 << 20;
const ADD_TABLE_LIMIT: u32 = 2048;

/// Conway polynomials, coefficients low to high (monic).
const CONWAY: &[(u32, u32, &[u32])] = &[
    (2, 1, &[1, 1]),
    (2, 2, &[1, 1, 1]),
    (2, 3, &[1, 1, 0, 1]),
    (2, 4, &[1, 1, 0, 0, 1]),
    (2, 5, &[1, 0, 1, 0, 0, 1]),
    (2, 6, &[1, 1, 0, 1, 1, 0, 1]),
    (2, 7, &[1, 1, 0, 0, 0, 0, 0, 1]),
    (2, 8, &[1, 0, 1, 1, 1, 0, 0, 0, 1]),
    (2, 9, &[1, 0, 0, 0, 1, 0, 0, 0, 0, 1]),
    (2, 10, &[1, 1, 1, 1, 0, 1, 1, 0, 0, 0, 1]),
    (2, 12, &[1, 1, 0, 1, 0, 1, 1, 1, 0, 0, 0, 0, 1]),
    (3, 1, &[1, 1]),
    (3, 2, &[2, 2, 1]),
    (3, 3, &[1, 2, 0, 1]),
    (3, 4, &[2, 0, 0, 2, 1]),
    (3, 5, &[1, 2, 0, 0, 0, 1]),
    (3, 6, &[2, 2, 1, 0, 2, 0, 1]),
    (3, 8, &[2, 2, 2, 0, 1, 2, 0, 0, 1]),
    (5, 1, &[3, 1]),
    (5, 2, &[2, 4, 1]),
    (5, 3, &[3, 3, 0, 1]),
    (5, 4, &[2, 4, 4, 0, 1]),
    (5, 6, &[2, 0, 1, 4, 1, 0, 1]),
    (7, 1, &[4, 1]),
    (7, 2, &[3, 6, 1]),
    (7, 3, &[4, 0, 6, 1]),
    (7, 4, &[3, 4, 5, 0, 1]),
    (11, 1, &[9, 1]),
    (11, 2, &[2, 7, 1]),
    (13, 1, &[11, 1]),
    (13, 2, &[2, 12, 1]),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModulusSource {
    Conway,
    /// Lexicographically first primitive polynomial (no table entry).
    FirstPrimitive,
}

pub struct FiniteField {
    p: u32,
    degree: u32,
    order: u32,
    modulus: Vec<u32>,
    source: ModulusSource,
    exp: Vec<Fe>,
    log: Vec<u32>,
    add_table: Option<Vec<u32>>,
    neg: Vec<Fe>,
    trace: Vec<u32>,
}

impl fmt::Debug for FiniteField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{} mod {}", self.p, self.degree, self.modulus_string())
    }
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

/// `Some((p, k))` when `q = p^k` for a prime `p`.
pub fn prime_power(q: u64) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let mut k = 0;
    let mut r = q;
    while r.is_multiple_of(p) {
        r /= p;
        k += 1;
    }
    (r == 1).then_some((p as u32, k))
}

impl FiniteField {
    /// `F_q` for a prime power `q`.
    pub fn with_order(q: u64) -> Result<Self> {
        let (p, k) = prime_power(q).ok_or(LabError::NotPrimePower(q))?;
        Self::new(p, k)
    }

    pub fn new(p: u32, degree: u32) -> Result<Self> {
        if !is_prime(u64::from(p)) || degree == 0 {
            return Err(LabError::InvalidParameter(format!("F_{p}^{degree} is not a field")));
        }
        let order = u64::from(p).checked_pow(degree).unwrap_or(u64::MAX);
        if order > MAX_FIELD_ORDER {
            return Err(LabError::FieldTooLarge(order));
        }
        let order = order as u32;
        let table = CONWAY
            .iter()
            .find(|(pp, kk, _)| *pp == p && *kk == degree)
            .map(|(_, _, m)| m.to_vec());
        let (modulus, source, exp) = match table.and_then(|m| powers_if_primitive(p, &m).map(|e| (m, e))) {
            Some((m, e)) => (m, ModulusSource::Conway, e),
            None => {
                let (m, e) = first_primitive(p, degree);
                (m, ModulusSource::FirstPrimitive, e)
            }
        };
        let mut log = vec![0u32; order as usize];
        for (i, &a) in exp.iter().enumerate() {
            log[a as usize] = i as u32;
        }
        let mut field = Self {
            p,
            degree,
            order,
            modulus,
            source,
            exp,
            log,
            add_table: None,
            neg: Vec::new(),
            trace: Vec::new(),
        };
        field.neg = (0..order).map(|a| field.neg_digits(a)).collect();
        if p != 2 && order <= ADD_TABLE_LIMIT {
            let mut t = vec![0u32; (order * order) as usize];
            for a in 0..order {
                for b in 0..order {
                    t[(a * order + b) as usize] = field.add_digits(a, b);
                }
            }
            field.add_table = Some(t);
        }
        field.trace = (0..order).map(|a| field.compute_trace(a)).collect();
        Ok(field)
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn modulus_source(&self) -> ModulusSource {
        self.source
    }

    /// Modulus rendered as a polynomial in `x`, highest degree first.
    pub fn modulus_string(&self) -> String {
        let mut terms = Vec::new();
        for (i, &c) in self.modulus.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => "x".to_string(),
                _ => format!("x^{i}"),
            };
            terms.push(match (c, i) {
                (_, 0) => c.to_string(),
                (1, _) => mono,
                _ => format!("{c}*{mono}"),
            });
        }
        terms.join(" + ")
    }

    pub fn elements(&self) -> std::ops::Range<Fe> {
        0..self.order
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&self, n: i64) -> Fe {
        n.rem_euclid(i64::from(self.p)) as Fe
    }

    /// Primitive element (the class of `x`, or a primitive root for `k = 1`).
    pub fn generator(&self) -> Fe {
        self.exp[1 % self.exp.len()]
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        if self.p == 2 {
            a ^ b
        } else if let Some(t) = &self.add_table {
            t[(a * self.order + b) as usize]
        } else {
            self.add_digits(a, b)
        }
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        self.neg[a as usize]
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a == 0 || b == 0 {
            return 0;
        }
        let n = self.order - 1;
        let s = self.log[a as usize] + self.log[b as usize];
        self.exp[(if s >= n { s - n } else { s }) as usize]
    }

    pub fn inv(&self, a: Fe) -> Option<Fe> {
        if a == 0 {
            return None;
        }
        let n = self.order - 1;
        let l = self.log[a as usize];
        Some(self.exp[((n - l) % n) as usize])
    }

    pub fn div(&self, a: Fe, b: Fe) -> Option<Fe> {
        self.inv(b).map(|bi| self.mul(a, bi))
    }

    pub fn pow(&self, a: Fe, e: u64) -> Fe {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let n = u64::from(self.order - 1);
        let l = u64::from(self.log[a as usize]);
        self.exp[((l * (e % n)) % n) as usize]
    }

    pub fn square(&self, a: Fe) -> Fe {
        self.mul(a, a)
    }

    /// Frobenius `a -> a^p`.
    pub fn frobenius(&self, a: Fe) -> Fe {
        self.pow(a, u64::from(self.p))
    }

    /// Quadratic character: 0 at 0, 1 on nonzero squares, -1 otherwise.
    /// Only meaningful in odd characteristic.
    pub fn chi(&self, a: Fe) -> i32 {
        if a == 0 {
            0
        } else if self.log[a as usize].is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    /// Absolute trace to the prime field, as an integer in `0..p`.
    #[inline]
    pub fn trace(&self, a: Fe) -> u32 {
        self.trace[a as usize]
    }

    /// The unique square root in characteristic 2.
    pub fn sqrt_char2(&self, a: Fe) -> Fe {
        debug_assert_eq!(self.p, 2);
        if a == 0 {
            return 0;
        }
        let n = self.order - 1;
        let l = self.log[a as usize];
        // n is odd, so halving is multiplication by (n+1)/2.
        self.exp[((u64::from(l) * u64::from(n.div_ceil(2))) % u64::from(n)) as usize]
    }

    fn digits(&self, mut a: Fe) -> Vec<u32> {
        let mut d = vec![0; self.degree as usize];
        for slot in d.iter_mut() {
            *slot = a % self.p;
            a /= self.p;
        }
        d
    }

    fn pack_digits(&self, d: &[u32]) -> Fe {
        d.iter().rev().fold(0, |acc, &c| acc * self.p + c)
    }

    fn add_digits(&self, a: Fe, b: Fe) -> Fe {
        let (da, db) = (self.digits(a), self.digits(b));
        let s: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % self.p).collect();
        self.pack_digits(&s)
    }

    fn neg_digits(&self, a: Fe) -> Fe {
        let d: Vec<u32> = self.digits(a).iter().map(|&c| (self.p - c) % self.p).collect();
        self.pack_digits(&d)
    }

    fn compute_trace(&self, a: Fe) -> u32 {
        let mut acc = 0;
        let mut cur = a;
        for _ in 0..self.degree {
            acc = self.add(acc, cur);
            cur = self.frobenius(cur);
        }
        debug_assert!(acc < self.p, "trace lands in the prime field");
        acc
    }
}

/// Powers `x^0, x^1, ...` modulo `modulus`; `None` unless `x` has order `p^k - 1`.
fn powers_if_primitive(p: u32, modulus: &[u32]) -> Option<Vec<Fe>> {
    let k = modulus.len() - 1;
    let order = p.pow(k as u32);
    let encode = |d: &[u32]| d.iter().rev().fold(0u32, |acc, &c| acc * p + c);
    let mut cur = vec![0u32; k];
    cur[0] = 1;
    let mut seen = vec![false; order as usize];
    let mut out = Vec::with_capacity(order as usize - 1);
    for _ in 0..order - 1 {
        let e = encode(&cur);
        if seen[e as usize] || e == 0 {
            return None;
        }
        seen[e as usize] = true;
        out.push(e);
        if k == 1 {
            // x = -m_0 in F_p
            cur[0] = (cur[0] * ((p - modulus[0]) % p)) % p;
            continue;
        }
        // multiply by x: shift up and reduce by the monic modulus
        let top = cur[k - 1];
        for i in (1..k).rev() {
            cur[i] = cur[i - 1];
        }
        cur[0] = 0;
        if top != 0 {
            for (i, slot) in cur.iter_mut().enumerate() {
                *slot = (*slot + top * (p - modulus[i] % p)) % p;
            }
        }
    }
    (encode(&cur) == 1).then_some(out)
}

fn first_primitive(p: u32, k: u32) -> (Vec<u32>, Vec<Fe>) {
    let count = p.pow(k);
    for code in 0..count {
        let mut m: Vec<u32> = (0..k).map(|i| (code / p.pow(i)) % p).collect();
        m.push(1);
        if m[0] == 0 {
            continue;
        }
        if let Some(e) = powers_if_primitive(p, &m) {
            return (m, e);
        }
    }
    unreachable!("every finite field has a primitive polynomial of each degree")
}

/// Field embedding `F_q -> F_{q^m}` fixed by sending the class of `x` to a root
/// of the small field's modulus.
#[derive(Debug, Clone)]
pub struct Embedding {
    map: Vec<Fe>,
}

impl Embedding {
    pub fn new(small: &FiniteField, big: &FiniteField) -> Result<Self> {
        if small.p != big.p || !big.degree.is_multiple_of(small.degree) {
            return Err(LabError::InvalidParameter(format!(
                "{small:?} does not embed in {big:?}"
            )));
        }
        let eval = |x: Fe| {
            small
                .modulus
                .iter()
                .rev()
                .fold(0, |acc, &c| big.add(big.mul(acc, x), c))
        };
        let root = big
            .elements()
            .find(|&x| eval(x) == 0)
            .expect("a subfield modulus splits in the extension");
        let powers: Vec<Fe> = (0..small.degree).map(|i| big.pow(root, u64::from(i))).collect();
        let map = small
            .elements()
            .map(|a| {
                small
                    .digits(a)
                    .iter()
                    .zip(&powers)
                    .fold(0, |acc, (&c, &pw)| big.add(acc, big.mul(c, pw)))
            })
            .collect();
        Ok(Self { map })
    }

    #[inline]
    pub fn apply(&self, a: Fe) -> Fe {
        self.map[a as usize]
    }
}

/// Base field together with extensions `F_{q^k}`, `k = 1..=max_k`, and embeddings.
pub struct FieldTower {
    pub base: FiniteField,
    pub extensions: Vec<(FiniteField, Embedding)>,
}

impl FieldTower {
    pub fn new(q: u64, max_k: u32) -> Result<Self> {
        let base = FiniteField::with_order(q)?;
        let mut extensions = Vec::new();
        for k in 1..=max_k {
            let big = FiniteField::new(base.p, base.degree * k)
                .map_err(|_| LabError::ExtensionUnavailable(k))?;
            let emb = Embedding::new(&base, &big)?;
            extensions.push((big, emb));
        }
        Ok(Self { base, extensions })
    }

    pub fn extension(&self, k: u32) -> Result<&(FiniteField, Embedding)> {
        k.checked_sub(1)
            .and_then(|i| self.extensions.get(i as usize))
            .ok_or(LabError::ExtensionUnavailable(k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn conway_entries_are_primitive() {
        for &(p, k, m) in CONWAY {
            assert!(powers_if_primitive(p, m).is_some(), "F_{p}^{k}");
            assert_eq!(m.len() as u32, k + 1);
        }
    }

    #[test]
    fn prime_power_detection() {
        assert_eq!(prime_power(8), Some((2, 3)));
        assert_eq!(prime_power(9), Some((3, 2)));
        assert_eq!(prime_power(6), None);
        assert_eq!(prime_power(1), None);
        assert!(FiniteField::with_order(12).is_err());
    }

    #[test]
    fn field_axioms_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (p, k) in [(2, 1), (2, 4), (2, 6), (3, 1), (3, 4), (5, 2), (7, 4), (11, 2), (3, 7)] {
            let f = FiniteField::new(p, k).unwrap();
            let q = f.order();
            for _ in 0..500 {
                let (a, b, c) = (rng.random_range(0..q), rng.random_range(0..q), rng.random_range(0..q));
                assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
                }
                // Frobenius is a ring homomorphism
                assert_eq!(f.frobenius(f.add(a, b)), f.add(f.frobenius(a), f.frobenius(b)));
                assert_eq!(f.frobenius(f.mul(a, b)), f.mul(f.frobenius(a), f.frobenius(b)));
            }
            assert_eq!(f.pow(f.generator(), u64::from(q - 1)), 1);
        }
    }

    #[test]
    fn trace_is_additive_and_onto() {
        let f = FiniteField::new(2, 5).unwrap();
        let zeros = f.elements().filter(|&a| f.trace(a) == 0).count();
        assert_eq!(zeros, 16);
        for a in f.elements() {
            for b in [1, 7, 19] {
                assert_eq!(f.trace(f.add(a, b)), f.trace(a) ^ f.trace(b));
            }
        }
    }

    #[test]
    fn chi_counts_squares() {
        let f = FiniteField::new(3, 4).unwrap();
        let squares: std::collections::BTreeSet<Fe> = f.elements().map(|a| f.square(a)).collect();
        for a in f.elements().skip(1) {
            assert_eq!(f.chi(a) == 1, squares.contains(&a));
        }
    }

    #[test]
    fn sqrt_in_char2() {
        let f = FiniteField::new(2, 6).unwrap();
        for a in f.elements() {
            assert_eq!(f.square(f.sqrt_char2(a)), a);
        }
    }

    #[test]
    fn embeddings_are_homomorphisms() {
        for (q, m) in [(4u64, 3u32), (9, 2), (2, 6), (5, 2)] {
            let small = FiniteField::with_order(q).unwrap();
            let (p, k) = prime_power(q).unwrap();
            let big = FiniteField::new(p, k * m).unwrap();
            let e = Embedding::new(&small, &big).unwrap();
            for a in small.elements() {
                for b in small.elements() {
                    assert_eq!(e.apply(small.add(a, b)), big.add(e.apply(a), e.apply(b)));
                    assert_eq!(e.apply(small.mul(a, b)), big.mul(e.apply(a), e.apply(b)));
                }
                // image is fixed by the q-power Frobenius
                assert_eq!(big.pow(e.apply(a), q), e.apply(a));
            }
        }
    }
}
