//! Clifford word algebra with `c_i c_j + c_j c_i = -2 δ_ij` and its normalized trace.
//!
//! Literal words are stored as bit masks (generator `k` is bit `k-1`), which is
//! automatically the strictly increasing canonical order. Words over symbolic
//! indices are never reduced here; their traces go through [`wick_pairings`].

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{CRat, PiScalar, Rational};

/// Minimal ring interface for Clifford coefficients.
pub trait Ring: Clone + PartialEq + fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
}

impl Ring for i64 {
    fn zero() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
}

impl Ring for Rational {
    fn zero() -> Self {
        Rational::zero()
    }
    fn one() -> Self {
        Rational::one()
    }
    fn is_zero(&self) -> bool {
        Rational::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
}

impl Ring for CRat {
    fn zero() -> Self {
        CRat::zero()
    }
    fn one() -> Self {
        CRat::one()
    }
    fn is_zero(&self) -> bool {
        CRat::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
}

/// Products beyond the π-degree cap panic; Clifford computations over
/// `PiScalar` stay far below it.
impl Ring for PiScalar {
    fn zero() -> Self {
        PiScalar::zero()
    }
    fn one() -> Self {
        PiScalar::one()
    }
    fn is_zero(&self) -> bool {
        PiScalar::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        PiScalar::add(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        PiScalar::mul(self, o).expect("π-degree overflow in Clifford product")
    }
    fn neg(&self) -> Self {
        PiScalar::neg(self)
    }
}

/// A canonical literal word: strictly increasing generator indices.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct CliffordWord(pub u64);

impl CliffordWord {
    pub const EMPTY: CliffordWord = CliffordWord(0);

    pub fn generator(k: u8) -> Self {
        assert!((1..=64).contains(&k));
        CliffordWord(1 << (k - 1))
    }

    pub fn len(&self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn indices(&self) -> Vec<u8> {
        (0..64).filter(|b| self.0 >> b & 1 == 1).map(|b| b as u8 + 1).collect()
    }

    /// Product of canonical words: returns (sign, word).
    #[allow(clippy::should_implement_trait)]
    pub fn mul(self, other: CliffordWord) -> (i32, CliffordWord) {
        let mut sign = 1i32;
        let mut b = other.0;
        while b != 0 {
            let j = b.trailing_zeros();
            b &= b - 1;
            let above = (self.0 >> j) >> 1;
            if above.count_ones() % 2 == 1 {
                sign = -sign;
            }
        }
        if (self.0 & other.0).count_ones() % 2 == 1 {
            sign = -sign;
        }
        (sign, CliffordWord(self.0 ^ other.0))
    }

    /// Reduces an arbitrary generator sequence to (sign, canonical word).
    pub fn reduce(seq: &[u8]) -> (i32, CliffordWord) {
        seq.iter().fold((1, CliffordWord::EMPTY), |(s, w), &k| {
            let (s2, w2) = w.mul(CliffordWord::generator(k));
            (s * s2, w2)
        })
    }
}

impl fmt::Display for CliffordWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "1");
        }
        for k in self.indices() {
            write!(f, "c(dx_{k})")?;
        }
        Ok(())
    }
}

impl fmt::Debug for CliffordWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for CliffordWord {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.indices().serialize(s)
    }
}

/// Formal sum of canonical words over a coefficient ring.
#[derive(Clone, PartialEq)]
pub struct CliffordElement<R: Ring> {
    n: u8,
    terms: BTreeMap<CliffordWord, R>,
}

impl<R: Ring> CliffordElement<R> {
    pub fn zero(n: u8) -> Self {
        CliffordElement { n, terms: BTreeMap::new() }
    }

    pub fn scalar(n: u8, r: R) -> Self {
        let mut e = CliffordElement::zero(n);
        e.add_term(CliffordWord::EMPTY, r);
        e
    }

    pub fn generator(n: u8, k: u8) -> Self {
        assert!(k >= 1 && k <= n, "generator {k} out of range 1..={n}");
        let mut e = CliffordElement::zero(n);
        e.add_term(CliffordWord::generator(k), R::one());
        e
    }

    /// The product `c_{k1} c_{k2} ...` with unit coefficient.
    pub fn word(n: u8, seq: &[u8]) -> Self {
        assert!(seq.iter().all(|&k| k >= 1 && k <= n));
        let (s, w) = CliffordWord::reduce(seq);
        let mut e = CliffordElement::zero(n);
        e.add_term(w, if s > 0 { R::one() } else { R::one().neg() });
        e
    }

    pub fn dim(&self) -> u8 {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&CliffordWord, &R)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, w: CliffordWord) -> R {
        self.terms.get(&w).cloned().unwrap_or_else(R::zero)
    }

    pub fn add_term(&mut self, w: CliffordWord, r: R) {
        if r.is_zero() {
            return;
        }
        let sum = match self.terms.get(&w) {
            Some(old) => old.add(&r),
            None => r,
        };
        if sum.is_zero() {
            self.terms.remove(&w);
        } else {
            self.terms.insert(w, sum);
        }
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        if self.n != o.n {
            return Err(Error::DimensionMismatch(self.n, o.n));
        }
        let mut out = self.clone();
        for (w, r) in &o.terms {
            out.add_term(*w, r.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, r: &R) -> Self {
        let mut out = CliffordElement::zero(self.n);
        for (w, c) in &self.terms {
            out.add_term(*w, c.mul(r));
        }
        out
    }

    /// Bilinear product with full anticommutation reduction.
    pub fn mul(&self, o: &Self) -> Result<Self> {
        if self.n != o.n {
            return Err(Error::DimensionMismatch(self.n, o.n));
        }
        let mut out = CliffordElement::zero(self.n);
        for (wa, ra) in &self.terms {
            for (wb, rb) in &o.terms {
                let (s, w) = wa.mul(*wb);
                let c = ra.mul(rb);
                out.add_term(w, if s > 0 { c } else { c.neg() });
            }
        }
        Ok(out)
    }

    /// Trace normalized so that `tr[id] = 2^{n/2}`.
    pub fn trace(&self) -> Result<R> {
        if self.n % 2 == 1 {
            return Err(Error::OddDimension(self.n));
        }
        let dim = 1i64 << (self.n / 2);
        let mut scale = R::zero();
        for _ in 0..dim {
            scale = scale.add(&R::one());
        }
        Ok(self.coeff(CliffordWord::EMPTY).mul(&scale))
    }
}

/// `cw_mul` in the operation table.
pub fn cw_mul<R: Ring>(a: &CliffordElement<R>, b: &CliffordElement<R>) -> Result<CliffordElement<R>> {
    a.mul(b)
}

/// `cw_trace` in the operation table: `tr[id]` times the empty-word coefficient.
pub fn cw_trace<R: Ring>(a: &CliffordElement<R>, n: u8) -> Result<R> {
    if n % 2 == 1 {
        return Err(Error::OddDimension(n));
    }
    if a.n != n {
        return Err(Error::DimensionMismatch(a.n, n));
    }
    a.trace()
}

impl<R: Ring + fmt::Display> fmt::Display for CliffordElement<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(w, r)| format!("({r}){w}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl<R: Ring> fmt::Debug for CliffordElement<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

impl<R: Ring + Serialize> Serialize for CliffordElement<R> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<(&CliffordWord, &R)> = self.terms.iter().collect();
        v.serialize(s)
    }
}

/// A perfect matching of word positions with its permutation sign.
#[derive(Clone, Debug)]
pub struct Pairing {
    pub sign: i32,
    pub pairs: Vec<(usize, usize)>,
}

/// All perfect matchings of `0..len` with Wick signs. For a word of `2m`
/// generators with symbolic indices,
/// `tr(c_{a1}...c_{a2m}) = tr[id]·(-1)^m Σ_pairings sign·Π δ(a_i, a_j)`.
/// Returns an empty list for odd lengths.
pub fn wick_pairings(len: usize) -> &'static [Pairing] {
    static CACHE: OnceLock<Vec<Vec<Pairing>>> = OnceLock::new();
    let table = CACHE.get_or_init(|| (0..=12).map(build_pairings).collect());
    &table[len]
}

fn build_pairings(len: usize) -> Vec<Pairing> {
    if len % 2 == 1 {
        return Vec::new();
    }
    fn rec(rest: &[usize], sign: i32, acc: &mut Vec<(usize, usize)>, out: &mut Vec<Pairing>) {
        if rest.is_empty() {
            out.push(Pairing { sign, pairs: acc.clone() });
            return;
        }
        let first = rest[0];
        for k in 1..rest.len() {
            // moving rest[k] next to rest[0] crosses k-1 generators
            let s = if (k - 1) % 2 == 0 { sign } else { -sign };
            let remaining: Vec<usize> =
                rest[1..].iter().enumerate().filter(|(j, _)| *j + 1 != k).map(|(_, &x)| x).collect();
            acc.push((first, rest[k]));
            rec(&remaining, s, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    let idx: Vec<usize> = (0..len).collect();
    rec(&idx, 1, &mut Vec::new(), &mut out);
    out
}

/// Trace of a generator sequence whose indices may repeat, using the Wick
/// expansion with a caller-supplied Kronecker delta. Literal reference used to
/// test the symbolic path.
pub fn wick_trace_literal(seq: &[u8], n: u8) -> i64 {
    let tr_id = 1i64 << (n / 2);
    let m = seq.len() / 2;
    let base = if m.is_multiple_of(2) { 1 } else { -1 };
    wick_pairings(seq.len())
        .iter()
        .filter(|p| p.pairs.iter().all(|&(a, b)| seq[a] == seq[b]))
        .map(|p| p.sign as i64)
        .sum::<i64>()
        * base
        * tr_id
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type E = CliffordElement<i64>;

    #[test]
    fn product_examples() {
        let c1 = E::generator(6, 1);
        let c2 = E::generator(6, 2);
        assert_eq!(cw_mul(&c1, &c1).unwrap(), E::scalar(6, -1));
        assert_eq!(cw_mul(&c2, &c1).unwrap(), E::word(6, &[1, 2]).scale(&-1));
        let a = E::word(6, &[1, 2]);
        let b = E::word(6, &[2, 3]);
        assert_eq!(cw_mul(&a, &b).unwrap(), E::word(6, &[1, 3]).scale(&-1));
        assert!(cw_mul(&E::generator(4, 1), &c1).is_err());
    }

    #[test]
    fn trace_examples() {
        for i in 1..=6u8 {
            for j in 1..=6u8 {
                let t = cw_trace(&E::word(6, &[i, j]), 6).unwrap();
                assert_eq!(t, if i == j { -8 } else { 0 });
            }
        }
        assert_eq!(cw_trace(&E::word(6, &[1, 2, 3, 4]), 6).unwrap(), 0);
        assert_eq!(cw_trace(&E::word(6, &[1, 2, 1, 2]), 6).unwrap(), -8);
        assert_eq!(cw_trace(&E::word(5, &[1]), 5), Err(Error::OddDimension(5)));
    }

    #[test]
    fn pairing_counts() {
        assert_eq!(wick_pairings(2).len(), 1);
        assert_eq!(wick_pairings(4).len(), 3);
        assert_eq!(wick_pairings(6).len(), 15);
        assert_eq!(wick_pairings(8).len(), 105);
        assert!(wick_pairings(3).is_empty());
    }

    #[test]
    fn display() {
        assert_eq!(CliffordWord::reduce(&[3, 1]).1.to_string(), "c(dx_1)c(dx_3)");
        assert_eq!(CliffordWord::reduce(&[3, 1]).0, -1);
    }

    proptest! {
        #[test]
        fn wick_matches_reduction(seq in proptest::collection::vec(1u8..=6, 0..=8)) {
            let direct = cw_trace(&E::word(6, &seq), 6).unwrap();
            prop_assert_eq!(direct, wick_trace_literal(&seq, 6));
        }

        #[test]
        fn cyclic(a in proptest::collection::vec(1u8..=6, 0..=5), b in proptest::collection::vec(1u8..=6, 0..=5)) {
            let x = E::word(6, &a);
            let y = E::word(6, &b);
            prop_assert_eq!(x.mul(&y).unwrap().trace().unwrap(), y.mul(&x).unwrap().trace().unwrap());
        }

        #[test]
        fn associative(a in proptest::collection::vec(1u8..=6, 0..=4), b in proptest::collection::vec(1u8..=6, 0..=4), c in proptest::collection::vec(1u8..=6, 0..=4)) {
            let (x, y, z) = (E::word(6, &a), E::word(6, &b), E::word(6, &c));
            prop_assert_eq!(x.mul(&y).unwrap().mul(&z).unwrap(), x.mul(&y.mul(&z).unwrap()).unwrap());
        }
    }
}
