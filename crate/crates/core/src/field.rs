//! Scalar fields used to evaluate symbolic objects at concrete points:
//! `f64`, `Complex64`, and a prime field with a square root of −1 for exact
//! randomized identity testing.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::scalar::{CRat, Rational};

pub trait Field:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn inv(&self) -> Self;
    fn is_zero(&self) -> bool;

    fn from_i64(n: i64) -> Self {
        Self::from_rational(&Rational::from_int(n))
    }

    fn powi(&self, e: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..e {
            out = out * self.clone();
        }
        out
    }
}

/// Fields that contain a square root of −1.
pub trait ComplexField: Field {
    fn imag() -> Self;

    fn from_crat(c: &CRat) -> Self {
        Self::from_rational(&c.re) + Self::imag() * Self::from_rational(&c.im)
    }
}

impl Field for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_rational(r: &Rational) -> Self {
        r.to_f64()
    }
    fn inv(&self) -> Self {
        1.0 / self
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
}

impl Field for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_rational(r: &Rational) -> Self {
        Complex64::new(r.to_f64(), 0.0)
    }
    fn inv(&self) -> Self {
        1.0 / self
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
}

impl ComplexField for Complex64 {
    fn imag() -> Self {
        Complex64::new(0.0, 1.0)
    }
}

/// Prime modulus, ≡ 1 (mod 4) so that −1 is a square.
pub const P: u64 = 2_305_843_009_213_693_921;
const SQRT_M1: u64 = 583_529_827_753_931_384;

/// Element of the prime field of order [`P`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub struct Fp(pub u64);

impl Fp {
    pub fn new(x: u64) -> Self {
        Fp(x % P)
    }

    pub fn from_big(n: &BigInt) -> Self {
        let m = n.mod_floor(&BigInt::from(P));
        Fp(m.to_u64().expect("reduced residue fits"))
    }

    pub fn pow(self, mut e: u64) -> Self {
        let mut base = self;
        let mut acc = Fp(1);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }
}

impl Add for Fp {
    type Output = Fp;
    fn add(self, o: Fp) -> Fp {
        let s = self.0 + o.0;
        Fp(if s >= P { s - P } else { s })
    }
}

impl Sub for Fp {
    type Output = Fp;
    fn sub(self, o: Fp) -> Fp {
        Fp(if self.0 >= o.0 { self.0 - o.0 } else { self.0 + P - o.0 })
    }
}

impl Mul for Fp {
    type Output = Fp;
    fn mul(self, o: Fp) -> Fp {
        Fp(((self.0 as u128 * o.0 as u128) % P as u128) as u64)
    }
}

impl Neg for Fp {
    type Output = Fp;
    fn neg(self) -> Fp {
        Fp(if self.0 == 0 { 0 } else { P - self.0 })
    }
}

impl Field for Fp {
    fn zero() -> Self {
        Fp(0)
    }
    fn one() -> Self {
        Fp(1)
    }
    fn from_rational(r: &Rational) -> Self {
        let n = Fp::from_big(r.numer());
        let d = Fp::from_big(r.denom());
        n * d.inv()
    }
    fn inv(&self) -> Self {
        assert!(!self.0.is_zero(), "inverse of zero in Fp");
        self.pow(P - 2)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
}

impl ComplexField for Fp {
    fn imag() -> Self {
        Fp(SQRT_M1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_minus_one() {
        let i = Fp::imag();
        assert_eq!(i * i, -Fp::one());
    }

    #[test]
    fn rational_embedding() {
        let a = Fp::from_rational(&Rational::new(-3, 7));
        assert_eq!(a * Fp::from_i64(7), Fp::from_i64(-3));
        assert_eq!(Fp::from_i64(5).inv() * Fp::from_i64(5), Fp::one());
    }
}
