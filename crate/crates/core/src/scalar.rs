//! Exact coefficient rings: big rationals, polynomials in π, and their
//! Gaussian (complex-rational) extensions.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Highest power of π a [`PiScalar`] may carry.
pub const MAX_PI_DEGREE: u8 = 6;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_int(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_big(r: BigRational) -> Self {
        Rational(r)
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn inner(&self) -> &BigRational {
        &self.0
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(self.0.recip()))
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Rational::one();
        for _ in 0..e {
            out = &out * self;
        }
        out
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or_else(|| {
            // enormous numerators: divide in floating point after scaling
            let n = self.0.numer().to_f64().unwrap_or(f64::INFINITY);
            let d = self.0.denom().to_f64().unwrap_or(f64::INFINITY);
            n / d
        })
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("bad rational `{s}`"));
        match s.split_once('/') {
            Some((n, d)) => {
                let n: BigInt = n.trim().parse().map_err(|_| bad())?;
                let d: BigInt = d.trim().parse().map_err(|_| bad())?;
                if d.is_zero() {
                    return Err(bad());
                }
                Ok(Rational(BigRational::new(n, d)))
            }
            None => {
                let n: BigInt = s.parse().map_err(|_| bad())?;
                Ok(Rational(BigRational::from_integer(n)))
            }
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($ty:ident, $tr:ident, $m:ident, $body:expr) => {
        impl $tr<&$ty> for &$ty {
            type Output = $ty;
            fn $m(self, rhs: &$ty) -> $ty {
                let f: fn(&$ty, &$ty) -> $ty = $body;
                f(self, rhs)
            }
        }
        impl $tr<$ty> for $ty {
            type Output = $ty;
            fn $m(self, rhs: $ty) -> $ty {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&$ty> for $ty {
            type Output = $ty;
            fn $m(self, rhs: &$ty) -> $ty {
                (&self).$m(rhs)
            }
        }
    };
}

forward_binop!(Rational, Add, add, |a, b| Rational(&a.0 + &b.0));
forward_binop!(Rational, Sub, sub, |a, b| Rational(&a.0 - &b.0));
forward_binop!(Rational, Mul, mul, |a, b| Rational(&a.0 * &b.0));

impl std::ops::Div<&Rational> for &Rational {
    type Output = Rational;
    fn div(self, rhs: &Rational) -> Rational {
        assert!(!rhs.is_zero(), "division by zero rational");
        Rational(&self.0 / &rhs.0)
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

/// A polynomial in π with rational coefficients and degree at most
/// [`MAX_PI_DEGREE`].
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PiScalar {
    coeffs: BTreeMap<u8, Rational>,
}

impl PiScalar {
    pub fn zero() -> Self {
        PiScalar::default()
    }

    pub fn one() -> Self {
        PiScalar::rational(Rational::one())
    }

    pub fn rational(r: Rational) -> Self {
        PiScalar::monomial(r, 0).expect("degree 0")
    }

    pub fn int(n: i64) -> Self {
        PiScalar::rational(Rational::from_int(n))
    }

    /// `c·π^k`
    pub fn monomial(c: Rational, k: u8) -> Result<Self> {
        if k > MAX_PI_DEGREE {
            return Err(Error::DegreeOverflow(k as u32));
        }
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(k, c);
        }
        Ok(PiScalar { coeffs })
    }

    /// Shorthand for `(num/den)·π^k` in tables and tests.
    pub fn frac_pi(num: i64, den: i64, k: u8) -> Self {
        PiScalar::monomial(Rational::new(num, den), k).expect("degree within cap")
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, k: u8) -> Rational {
        self.coeffs.get(&k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u8, &Rational)> {
        self.coeffs.iter().map(|(k, c)| (*k, c))
    }

    pub fn degree(&self) -> Option<u8> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn scale(&self, r: &Rational) -> Self {
        let mut out = PiScalar::zero();
        for (k, c) in &self.coeffs {
            out.insert_add(*k, &(c * r));
        }
        out
    }

    fn insert_add(&mut self, k: u8, c: &Rational) {
        if c.is_zero() {
            return;
        }
        let e = self.coeffs.entry(k).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.coeffs.remove(&k);
        }
    }

    pub fn add(&self, other: &PiScalar) -> PiScalar {
        let mut out = self.clone();
        for (k, c) in &other.coeffs {
            out.insert_add(*k, c);
        }
        out
    }

    pub fn sub(&self, other: &PiScalar) -> PiScalar {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> PiScalar {
        PiScalar {
            coeffs: self.coeffs.iter().map(|(k, c)| (*k, -c)).collect(),
        }
    }

    pub fn mul(&self, other: &PiScalar) -> Result<PiScalar> {
        let mut out = PiScalar::zero();
        for (i, a) in &self.coeffs {
            for (j, b) in &other.coeffs {
                let k = *i as u32 + *j as u32;
                if k > MAX_PI_DEGREE as u32 {
                    return Err(Error::DegreeOverflow(k));
                }
                out.insert_add(k as u8, &(a * b));
            }
        }
        Ok(out)
    }

    /// Divides by the monomial `c·π^k`; fails if a negative π-power would result.
    pub fn div_monomial(&self, c: &Rational, k: u8) -> Result<PiScalar> {
        let inv = c.recip()?;
        let mut out = PiScalar::zero();
        for (d, a) in &self.coeffs {
            if *d < k {
                return Err(Error::NegativePiPower);
            }
            out.insert_add(d - k, &(a * &inv));
        }
        Ok(out)
    }

    pub fn to_f64(&self) -> f64 {
        let pi = std::f64::consts::PI;
        self.coeffs
            .iter()
            .map(|(k, c)| c.to_f64() * pi.powi(*k as i32))
            .sum()
    }
}

impl fmt::Display for PiScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in &self.coeffs {
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{mag}")?,
                _ => {
                    if !mag.is_one() {
                        write!(f, "{mag}·")?;
                    }
                    if *k == 1 {
                        write!(f, "π")?;
                    } else {
                        write!(f, "π^{k}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for PiScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PiScalar({self})")
    }
}

/// Accepts sums such as `-1/16 pi + 1/12 pi^3`, `3/5*π^3`, `-5/2`.
impl FromStr for PiScalar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let text: String = s
            .replace('π', "pi")
            .replace('·', "*")
            .chars()
            .filter(|c| !c.is_whitespace())
            .collect();
        if text.is_empty() {
            return Err(Error::Parse("empty π-scalar".into()));
        }
        let mut out = PiScalar::zero();
        let mut rest = text.as_str();
        while !rest.is_empty() {
            let mut sign = Rational::one();
            if let Some(r) = rest.strip_prefix('+') {
                rest = r;
            } else if let Some(r) = rest.strip_prefix('-') {
                sign = -sign;
                rest = r;
            }
            let end = rest[1.min(rest.len())..]
                .find(['+', '-'])
                .map(|p| p + 1)
                .unwrap_or(rest.len());
            let term = &rest[..end];
            rest = &rest[end..];
            let (coef, deg) = parse_pi_term(term)?;
            let m = PiScalar::monomial(&sign * &coef, deg)?;
            out = out.add(&m);
        }
        Ok(out)
    }
}

fn parse_pi_term(term: &str) -> Result<(Rational, u8)> {
    let bad = || Error::Parse(format!("bad π-term `{term}`"));
    match term.find("pi") {
        None => Ok((term.parse()?, 0)),
        Some(pos) => {
            let head = term[..pos].trim_end_matches('*');
            let tail = &term[pos + 2..];
            let coef = if head.is_empty() {
                Rational::one()
            } else {
                head.parse()?
            };
            let deg = if tail.is_empty() {
                1
            } else {
                tail.strip_prefix('^')
                    .ok_or_else(bad)?
                    .parse::<u8>()
                    .map_err(|_| bad())?
            };
            Ok((coef, deg))
        }
    }
}

impl Serialize for PiScalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let map: BTreeMap<String, String> = self
            .coeffs
            .iter()
            .map(|(k, c)| (format!("pi{k}"), c.to_string()))
            .collect();
        map.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PiScalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let map = BTreeMap::<String, String>::deserialize(d)?;
        let mut out = PiScalar::zero();
        for (k, v) in map {
            let deg: u8 = k
                .strip_prefix("pi")
                .and_then(|x| x.parse().ok())
                .ok_or_else(|| serde::de::Error::custom(format!("bad key {k}")))?;
            let c: Rational = v.parse().map_err(serde::de::Error::custom)?;
            let m = PiScalar::monomial(c, deg).map_err(serde::de::Error::custom)?;
            out = out.add(&m);
        }
        Ok(out)
    }
}

/// Gaussian rational `re + i·im`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct CRat {
    pub re: Rational,
    pub im: Rational,
}

impl CRat {
    pub fn new(re: Rational, im: Rational) -> Self {
        CRat { re, im }
    }

    pub fn real(re: Rational) -> Self {
        CRat { re, im: Rational::zero() }
    }

    pub fn int(n: i64) -> Self {
        CRat::real(Rational::from_int(n))
    }

    pub fn zero() -> Self {
        CRat::default()
    }

    pub fn one() -> Self {
        CRat::int(1)
    }

    pub fn i() -> Self {
        CRat::new(Rational::zero(), Rational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> CRat {
        CRat::new(self.re.clone(), -&self.im)
    }

    pub fn scale(&self, r: &Rational) -> CRat {
        CRat::new(&self.re * r, &self.im * r)
    }

    pub fn norm_sqr(&self) -> Rational {
        &(&self.re * &self.re) + &(&self.im * &self.im)
    }

    pub fn inv(&self) -> Result<CRat> {
        let n = self.norm_sqr();
        if n.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let inv = n.recip()?;
        Ok(self.conj().scale(&inv))
    }

    pub fn pow(&self, e: u32) -> CRat {
        let mut out = CRat::one();
        for _ in 0..e {
            out = &out * self;
        }
        out
    }
}

impl fmt::Display for CRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "{}i", self.im),
            (false, false) => {
                if self.im.is_negative() {
                    write!(f, "({} - {}i)", self.re, self.im.abs())
                } else {
                    write!(f, "({} + {}i)", self.re, self.im)
                }
            }
        }
    }
}

impl fmt::Debug for CRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

forward_binop!(CRat, Add, add, |a, b| CRat::new(&a.re + &b.re, &a.im + &b.im));
forward_binop!(CRat, Sub, sub, |a, b| CRat::new(&a.re - &b.re, &a.im - &b.im));
forward_binop!(CRat, Mul, mul, |a, b| CRat::new(
    &(&a.re * &b.re) - &(&a.im * &b.im),
    &(&a.re * &b.im) + &(&a.im * &b.re)
));

impl Neg for CRat {
    type Output = CRat;
    fn neg(self) -> CRat {
        CRat::new(-self.re, -self.im)
    }
}

impl Neg for &CRat {
    type Output = CRat;
    fn neg(self) -> CRat {
        CRat::new(-&self.re, -&self.im)
    }
}

/// A π-polynomial with Gaussian-rational coefficients, kept as a real and an
/// imaginary [`PiScalar`]. Final boundary coefficients must have zero
/// imaginary part.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct CPi {
    pub re: PiScalar,
    pub im: PiScalar,
}

impl CPi {
    pub fn zero() -> Self {
        CPi::default()
    }

    pub fn real(re: PiScalar) -> Self {
        CPi { re, im: PiScalar::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    /// `c·π^k` for a Gaussian rational `c`.
    pub fn from_crat(c: &CRat, k: u8) -> Result<Self> {
        Ok(CPi {
            re: PiScalar::monomial(c.re.clone(), k)?,
            im: PiScalar::monomial(c.im.clone(), k)?,
        })
    }

    pub fn add(&self, o: &CPi) -> CPi {
        CPi { re: self.re.add(&o.re), im: self.im.add(&o.im) }
    }

    pub fn neg(&self) -> CPi {
        CPi { re: self.re.neg(), im: self.im.neg() }
    }

    pub fn mul(&self, o: &CPi) -> Result<CPi> {
        Ok(CPi {
            re: self.re.mul(&o.re)?.sub(&self.im.mul(&o.im)?),
            im: self.re.mul(&o.im)?.add(&self.im.mul(&o.re)?),
        })
    }

    pub fn mul_real(&self, p: &PiScalar) -> Result<CPi> {
        Ok(CPi { re: self.re.mul(p)?, im: self.im.mul(p)? })
    }

    pub fn mul_crat(&self, c: &CRat) -> CPi {
        CPi {
            re: self.re.scale(&c.re).sub(&self.im.scale(&c.im)),
            im: self.re.scale(&c.im).add(&self.im.scale(&c.re)),
        }
    }

    /// The reality check: returns the real part or reports the stray imaginary one.
    pub fn into_real(self) -> Result<PiScalar> {
        if self.im.is_zero() {
            Ok(self.re)
        } else {
            Err(Error::ImaginaryResidue(self.im.to_string()))
        }
    }
}

impl fmt::Display for CPi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else {
            write!(f, "({}) + i({})", self.re, self.im)
        }
    }
}

impl fmt::Debug for CPi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pis(s: &str) -> PiScalar {
        s.parse().unwrap()
    }

    #[test]
    fn rational_canonical() {
        let r = Rational::new(6, -4);
        assert_eq!(r.to_string(), "-3/2");
        assert_eq!(Rational::new(0, 5), Rational::zero());
        assert_eq!(Rational::new(0, 5).to_string(), "0");
        assert_eq!("10/4".parse::<Rational>().unwrap(), Rational::new(5, 2));
    }

    #[test]
    fn add_examples() {
        let a = PiScalar::frac_pi(-1, 16, 1);
        let b = PiScalar::frac_pi(1, 12, 3);
        let s = a.add(&b);
        assert_eq!(s.coeff(1), Rational::new(-1, 16));
        assert_eq!(s.coeff(3), Rational::new(1, 12));
        assert_eq!(s, pis("-1/16 pi + 1/12 pi^3"));
        let x = pis("3/5 pi^3 - 2");
        assert_eq!(x.add(&PiScalar::zero()), x);
        let c = PiScalar::frac_pi(1, 24, 3);
        assert!(c.add(&c.neg()).is_zero());
    }

    #[test]
    fn mul_examples() {
        let a = PiScalar::frac_pi(8, 15, 2);
        let b = PiScalar::frac_pi(1, 2, 1);
        assert_eq!(a.mul(&b).unwrap(), PiScalar::frac_pi(4, 15, 3));
        let x = pis("1/3 pi - 7");
        assert_eq!(x.mul(&PiScalar::one()).unwrap(), x);
        let vol = PiScalar::frac_pi(8, 3, 2);
        let r = PiScalar::rational(Rational::new(3, 8));
        assert_eq!(vol.mul(&r).unwrap(), PiScalar::frac_pi(1, 1, 2));
    }

    #[test]
    fn mul_overflow() {
        let a = PiScalar::frac_pi(1, 1, 4);
        let b = PiScalar::frac_pi(1, 1, 3);
        assert!(matches!(a.mul(&b), Err(Error::DegreeOverflow(7))));
        assert!(PiScalar::monomial(Rational::one(), 7).is_err());
    }

    #[test]
    fn float_examples() {
        let a = PiScalar::frac_pi(1, 12, 3);
        assert!((a.to_f64() - 2.583856390024).abs() < 1e-9);
        assert_eq!(PiScalar::zero().to_f64(), 0.0);
        let b = PiScalar::frac_pi(-1, 16, 1);
        assert!((b.to_f64() + 0.19634954084936207).abs() < 1e-15);
    }

    #[test]
    fn display_and_json() {
        let s = pis("-1/16 pi + 1/12 pi^3 + 2");
        assert_eq!(s.to_string(), "2 - 1/16·π + 1/12·π^3");
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, r#"{"pi0":"2","pi1":"-1/16","pi3":"1/12"}"#);
        let back: PiScalar = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
        assert_eq!(s.to_string().parse::<PiScalar>().unwrap(), s);
    }

    #[test]
    fn div_monomial() {
        let s = pis("8/3 pi^3 + 16/15 pi^2");
        let d = s.div_monomial(&Rational::new(8, 3), 2).unwrap();
        assert_eq!(d, pis("pi + 2/5"));
        assert!(pis("pi").div_monomial(&Rational::one(), 2).is_err());
    }

    #[test]
    fn gaussian() {
        let a = CRat::new(Rational::new(1, 2), Rational::from_int(3));
        let inv = a.inv().unwrap();
        assert_eq!(&a * &inv, CRat::one());
        assert_eq!(&CRat::i() * &CRat::i(), CRat::int(-1));
        let c = CPi::from_crat(&CRat::i(), 1).unwrap();
        assert!(c.clone().into_real().is_err());
        let sq = c.mul(&c).unwrap();
        assert_eq!(sq.into_real().unwrap(), PiScalar::frac_pi(-1, 1, 2));
    }

    fn arb_pis() -> impl Strategy<Value = PiScalar> {
        proptest::collection::vec((-20i64..20, 1i64..12), 3).prop_map(|v| {
            let mut s = PiScalar::zero();
            for (k, (n, d)) in v.into_iter().enumerate() {
                s = s.add(&PiScalar::frac_pi(n, d, k as u8));
            }
            s
        })
    }

    proptest! {
        #[test]
        fn ring_axioms(a in arb_pis(), b in arb_pis(), c in arb_pis()) {
            prop_assert_eq!(a.add(&b), b.add(&a));
            prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
            prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
            prop_assert_eq!(a.mul(&b).unwrap().mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
            prop_assert_eq!(a.mul(&b.add(&c)).unwrap(), a.mul(&b).unwrap().add(&a.mul(&c).unwrap()));
        }

        #[test]
        fn float_additive(a in arb_pis(), b in arb_pis()) {
            let lhs = a.add(&b).to_f64();
            let rhs = a.to_f64() + b.to_f64();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs().max(rhs.abs())));
        }

        #[test]
        fn parse_roundtrip(a in arb_pis()) {
            prop_assert_eq!(a.to_string().parse::<PiScalar>().unwrap(), a);
        }
    }
}
