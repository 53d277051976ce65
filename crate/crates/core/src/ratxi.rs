//! Rational functions of the normal covariable ξ_n whose only poles are ±i.

use std::fmt;

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{CPi, CRat, Rational};

/// Polynomial in ξ_n with Gaussian-rational coefficients, lowest degree first.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    c: Vec<CRat>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(CRat::one())
    }

    pub fn constant(c: CRat) -> Self {
        Poly::from_coeffs(vec![c])
    }

    /// The variable ξ_n.
    pub fn x() -> Self {
        Poly::from_coeffs(vec![CRat::zero(), CRat::one()])
    }

    /// `ξ_n - r`
    pub fn linear(r: &CRat) -> Self {
        Poly::from_coeffs(vec![-r, CRat::one()])
    }

    pub fn from_coeffs(mut c: Vec<CRat>) -> Self {
        while c.last().is_some_and(CRat::is_zero) {
            c.pop();
        }
        Poly { c }
    }

    pub fn coeffs(&self) -> &[CRat] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn eval(&self, x: &CRat) -> CRat {
        self.c.iter().rev().fold(CRat::zero(), |acc, a| &(&acc * x) + a)
    }

    pub fn eval_c64(&self, x: Complex64) -> Complex64 {
        self.c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| {
            acc * x + Complex64::new(a.re.to_f64(), a.im.to_f64())
        })
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        let z = CRat::zero();
        Poly::from_coeffs((0..n).map(|k| self.c.get(k).unwrap_or(&z) + o.c.get(k).unwrap_or(&z)).collect())
    }

    pub fn neg(&self) -> Poly {
        Poly { c: self.c.iter().map(|a| -a).collect() }
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![CRat::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] = &c[i + j] + &(a * b);
            }
        }
        Poly::from_coeffs(c)
    }

    pub fn scale(&self, s: &CRat) -> Poly {
        Poly::from_coeffs(self.c.iter().map(|a| a * s).collect())
    }

    pub fn pow(&self, e: u32) -> Poly {
        (0..e).fold(Poly::one(), |acc, _| acc.mul(self))
    }

    pub fn deriv(&self) -> Poly {
        Poly::from_coeffs(
            self.c.iter().enumerate().skip(1).map(|(k, a)| a.scale(&Rational::from_int(k as i64))).collect(),
        )
    }

    /// Synthetic division by `ξ_n - r`: (quotient, remainder).
    pub fn div_linear(&self, r: &CRat) -> (Poly, CRat) {
        if self.c.is_empty() {
            return (Poly::zero(), CRat::zero());
        }
        let mut q = vec![CRat::zero(); self.c.len() - 1];
        let mut acc = CRat::zero();
        for k in (0..self.c.len()).rev() {
            acc = &(&acc * r) + &self.c[k];
            if k > 0 {
                q[k - 1] = acc.clone();
            }
        }
        (Poly::from_coeffs(q), acc)
    }

    /// Coefficients of `p(a + t)` in powers of `t`.
    pub fn shift(&self, a: &CRat) -> Poly {
        let mut out = Vec::with_capacity(self.c.len());
        let mut cur = self.clone();
        while !cur.is_zero() {
            let (q, r) = cur.div_linear(a);
            out.push(r);
            cur = q;
        }
        Poly::from_coeffs(out)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.c.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .c
            .iter()
            .enumerate()
            .filter(|(_, a)| !a.is_zero())
            .map(|(k, a)| match k {
                0 => format!("({a})"),
                1 => format!("({a})ξn"),
                _ => format!("({a})ξn^{k}"),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// `num / ((ξ_n - i)^plus (ξ_n + i)^minus)`, with common factors cancelled.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct RatXi {
    num: Poly,
    plus: u32,
    minus: u32,
}

impl RatXi {
    pub fn new(num: Poly, plus: u32, minus: u32) -> Self {
        let mut r = RatXi { num, plus, minus };
        r.normalize();
        r
    }

    pub fn zero() -> Self {
        RatXi::default()
    }

    pub fn poly(p: Poly) -> Self {
        RatXi::new(p, 0, 0)
    }

    pub fn constant(c: CRat) -> Self {
        RatXi::poly(Poly::constant(c))
    }

    /// `(1 + ξ_n²)^{-k}`
    pub fn inv_one_plus_sq(k: u32) -> Self {
        RatXi::new(Poly::one(), k, k)
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.plus = 0;
            self.minus = 0;
            return;
        }
        let i = CRat::i();
        while self.plus > 0 {
            let (q, r) = self.num.div_linear(&i);
            if !r.is_zero() {
                break;
            }
            self.num = q;
            self.plus -= 1;
        }
        let mi = -&i;
        while self.minus > 0 {
            let (q, r) = self.num.div_linear(&mi);
            if !r.is_zero() {
                break;
            }
            self.num = q;
            self.minus -= 1;
        }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn plus(&self) -> u32 {
        self.plus
    }

    pub fn minus(&self) -> u32 {
        self.minus
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// `deg(num) - plus - minus`; `i64::MIN` for the zero function.
    pub fn decay(&self) -> i64 {
        match self.num.degree() {
            None => i64::MIN,
            Some(d) => d as i64 - self.plus as i64 - self.minus as i64,
        }
    }

    fn lift(&self, plus: u32, minus: u32) -> Poly {
        let up = Poly::linear(&CRat::i()).pow(plus - self.plus);
        let down = Poly::linear(&-CRat::i()).pow(minus - self.minus);
        self.num.mul(&up).mul(&down)
    }

    pub fn add(&self, o: &RatXi) -> RatXi {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let p = self.plus.max(o.plus);
        let m = self.minus.max(o.minus);
        RatXi::new(self.lift(p, m).add(&o.lift(p, m)), p, m)
    }

    pub fn neg(&self) -> RatXi {
        RatXi { num: self.num.neg(), plus: self.plus, minus: self.minus }
    }

    pub fn sub(&self, o: &RatXi) -> RatXi {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &RatXi) -> RatXi {
        RatXi::new(self.num.mul(&o.num), self.plus + o.plus, self.minus + o.minus)
    }

    pub fn scale(&self, c: &CRat) -> RatXi {
        RatXi::new(self.num.scale(c), self.plus, self.minus)
    }

    /// Exact derivative in ξ_n.
    pub fn diff(&self) -> RatXi {
        if self.is_zero() {
            return RatXi::zero();
        }
        let i = CRat::i();
        let xm = Poly::linear(&i);
        let xp = Poly::linear(&-&i);
        let p = Rational::from_int(self.plus as i64);
        let m = Rational::from_int(self.minus as i64);
        let num = self
            .num
            .deriv()
            .mul(&xm)
            .mul(&xp)
            .sub(&self.num.mul(&xp).scale(&CRat::real(p)))
            .sub(&self.num.mul(&xm).scale(&CRat::real(m)));
        RatXi::new(num, self.plus + 1, self.minus + 1)
    }

    /// Laurent coefficients `g_0..g_{plus-1}` of `(ξ_n - i)^plus · f` at `ξ_n = i`.
    fn upper_taylor(&self) -> Vec<CRat> {
        let p = self.plus as usize;
        let i = CRat::i();
        let shifted = self.num.shift(&i);
        // (2i + t)^{-m} = (2i)^{-m} Σ_k C(-m, k) (t / 2i)^k
        let two_i = CRat::new(Rational::zero(), Rational::from_int(2));
        let inv_two_i = two_i.inv().expect("2i is invertible");
        let m = self.minus as i64;
        let lead = inv_two_i.pow(self.minus);
        let mut series = Vec::with_capacity(p);
        let mut binom = Rational::one();
        for k in 0..p {
            if k > 0 {
                binom = &(&binom * &Rational::from_int(-m - k as i64 + 1)) / &Rational::from_int(k as i64);
            }
            series.push(&(&lead * &inv_two_i.pow(k as u32)) * &CRat::real(binom.clone()));
        }
        (0..p)
            .map(|k| {
                (0..=k).fold(CRat::zero(), |acc, j| {
                    let a = shifted.coeffs().get(j).cloned().unwrap_or_else(CRat::zero);
                    &acc + &(&a * &series[k - j])
                })
            })
            .collect()
    }

    /// Sum of the principal parts at `ξ_n = +i`.
    pub fn pi_plus(&self) -> Result<RatXi> {
        if self.is_zero() {
            return Ok(RatXi::zero());
        }
        let d = self.decay();
        if d > -1 {
            return Err(Error::InsufficientDecay(d, -1));
        }
        if self.plus == 0 {
            return Ok(RatXi::zero());
        }
        let g = self.upper_taylor();
        let i = CRat::i();
        let mut num = Poly::zero();
        let base = Poly::linear(&i);
        for (j, gj) in g.iter().enumerate() {
            num = num.add(&base.pow(j as u32).scale(gj));
        }
        Ok(RatXi::new(num, self.plus, 0))
    }

    /// `∫_ℝ f dξ_n = 2πi · Res_{ξ_n=i} f`.
    pub fn integrate_line(&self) -> Result<CPi> {
        if self.is_zero() {
            return Ok(CPi::zero());
        }
        let d = self.decay();
        if d > -2 {
            return Err(Error::InsufficientDecay(d, -2));
        }
        if self.plus == 0 {
            return Ok(CPi::zero());
        }
        let res = self.upper_taylor().pop().expect("plus > 0");
        let two_i = CRat::new(Rational::zero(), Rational::from_int(2));
        CPi::from_crat(&(&two_i * &res), 1)
    }

    pub fn eval_c64(&self, x: Complex64) -> Complex64 {
        let i = Complex64::new(0.0, 1.0);
        self.num.eval_c64(x) / ((x - i).powu(self.plus) * (x + i).powu(self.minus))
    }
}

impl fmt::Display for RatXi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] / ((ξn−i)^{} (ξn+i)^{})", self.num, self.plus, self.minus)
    }
}

impl fmt::Debug for RatXi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Serialize)]
struct RatXiJson {
    numerator: Vec<[String; 2]>,
    poles: (u32, u32),
}

impl Serialize for RatXi {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RatXiJson {
            numerator: self.num.coeffs().iter().map(|c| [c.re.to_string(), c.im.to_string()]).collect(),
            poles: (self.plus, self.minus),
        }
        .serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::PiScalar;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> CRat {
        CRat::real(Rational::new(n, d))
    }

    #[test]
    fn pi_plus_examples() {
        let f = RatXi::inv_one_plus_sq(1);
        let expect = RatXi::new(Poly::constant(CRat::new(Rational::zero(), Rational::new(-1, 2))), 1, 0);
        assert_eq!(f.pi_plus().unwrap(), expect);
        let g = RatXi::new(Poly::one(), 2, 0);
        assert_eq!(g.pi_plus().unwrap(), g);
        assert!(RatXi::new(Poly::one(), 0, 2).pi_plus().unwrap().is_zero());
        assert!(RatXi::poly(Poly::x()).pi_plus().is_err());
    }

    #[test]
    fn diff_examples() {
        let f = RatXi::inv_one_plus_sq(2);
        let expect = RatXi::new(Poly::x().scale(&r(-4, 1)), 3, 3);
        assert_eq!(f.diff(), expect);
        let g = RatXi::new(Poly::x(), 2, 2);
        let num = Poly::from_coeffs(vec![r(1, 1), CRat::zero(), r(-3, 1)]);
        assert_eq!(g.diff(), RatXi::new(num, 3, 3));
        assert!(RatXi::constant(r(5, 1)).diff().is_zero());
    }

    #[test]
    fn integrate_examples() {
        let half_pi = CPi::real(PiScalar::frac_pi(1, 2, 1));
        assert_eq!(RatXi::inv_one_plus_sq(2).integrate_line().unwrap(), half_pi);
        assert_eq!(RatXi::inv_one_plus_sq(1).integrate_line().unwrap(), CPi::real(PiScalar::frac_pi(1, 1, 1)));
        assert!(RatXi::new(Poly::one(), 0, 3).integrate_line().unwrap().is_zero());
        assert!(RatXi::inv_one_plus_sq(1).mul(&RatXi::poly(Poly::x())).integrate_line().is_err());
    }

    #[test]
    fn normalization_cancels() {
        let f = RatXi::new(Poly::linear(&CRat::i()).mul(&Poly::x()), 2, 1);
        assert_eq!(f.plus(), 1);
        assert_eq!(f.decay(), -1);
    }

    fn arb_crat() -> impl Strategy<Value = CRat> {
        (-6i64..=6, -6i64..=6, 1i64..=4).prop_map(|(a, b, d)| CRat::new(Rational::new(a, d), Rational::new(b, d)))
    }

    fn arb_ratxi() -> impl Strategy<Value = RatXi> {
        (prop::collection::vec(arb_crat(), 0..5), 0u32..=4, 0u32..=4)
            .prop_map(|(c, p, m)| RatXi::new(Poly::from_coeffs(c), p, m))
    }

    proptest! {
        #[test]
        fn pi_plus_idempotent_and_complete(f in arb_ratxi()) {
            prop_assume!(f.decay() <= -1);
            let p = f.pi_plus().unwrap();
            prop_assert_eq!(p.pi_plus().unwrap(), p.clone());
            let rest = f.sub(&p);
            prop_assert_eq!(rest.plus(), 0);
            prop_assert!(p.minus() == 0);
        }

        #[test]
        fn diff_linear_and_leibniz(f in arb_ratxi(), g in arb_ratxi(), c in arb_crat()) {
            prop_assert_eq!(f.add(&g.scale(&c)).diff(), f.diff().add(&g.diff().scale(&c)));
            prop_assert_eq!(f.mul(&g).diff(), f.diff().mul(&g).add(&f.mul(&g.diff())));
        }
    }
}
