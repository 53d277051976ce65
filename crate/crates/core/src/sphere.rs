//! Moments of monomials in ξ₁…ξ_{n−1} over the unit sphere S^{n−2}.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{PiScalar, Rational};

/// Engine bound on the total order of a moment.
pub const MAX_ORDER: u32 = 8;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(d: usize) -> Self {
        MultiIndex(vec![0; d])
    }

    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Γ(t/2) as `r · √π^e`.
fn gamma_half(t: u32) -> (Rational, u32) {
    assert!(t > 0);
    if t.is_multiple_of(2) {
        let k = t / 2;
        let mut r = Rational::one();
        for j in 1..k {
            r = &r * &Rational::from_int(j as i64);
        }
        (r, 0)
    } else {
        // Γ(1/2) = √π, Γ(x+1) = xΓ(x)
        let mut r = Rational::one();
        let mut x = Rational::new(1, 2);
        for _ in 0..(t - 1) / 2 {
            r = &r * &x;
            x = &x + &Rational::one();
        }
        (r, 1)
    }
}

/// `∫_{S^{d−1}} ξ^α dσ = 2 ∏Γ((αᵢ+1)/2) / Γ((|α|+d)/2)` with `d = α.len()`.
pub fn sphere_moment(alpha: &MultiIndex) -> Result<PiScalar> {
    let order = alpha.order();
    if order > MAX_ORDER {
        return Err(Error::MomentBound(order));
    }
    if alpha.0.iter().any(|a| a % 2 == 1) {
        return Ok(PiScalar::zero());
    }
    let d = alpha.0.len() as u32;
    let mut r = Rational::from_int(2);
    let mut roots = 0i64;
    for a in &alpha.0 {
        let (g, e) = gamma_half(a + 1);
        r = &r * &g;
        roots += e as i64;
    }
    let (g, e) = gamma_half(order + d);
    r = &r / &g;
    roots -= e as i64;
    debug_assert!(roots >= 0 && roots % 2 == 0, "half-integer powers of π cancel");
    PiScalar::monomial(r, (roots / 2) as u8)
}

/// How the tangential sphere integral is normalized.
#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize)]
pub enum SphereMeasure {
    /// True surface measure on S⁴.
    Exact,
    /// The area of S⁴ factored out of the order-zero moment only, leaving
    /// higher moments at their surface values. This is the bookkeeping in
    /// which the published tables are written.
    Bookkeeping,
}

/// `C_m` in `∫ ξ_{i₁}…ξ_{i_{2m}} = C_m Σ_{pairings} ∏δ` over S⁴.
pub fn pairing_constant(m: u32, measure: SphereMeasure) -> Result<PiScalar> {
    if m == 0 && measure == SphereMeasure::Bookkeeping {
        return Ok(PiScalar::one());
    }
    let mut alpha = vec![0u32; 5];
    for slot in alpha.iter_mut().take(m as usize) {
        *slot = 2;
    }
    if m > 4 {
        return Err(Error::MomentBound(2 * m));
    }
    sphere_moment(&MultiIndex(alpha))
}

/// Area of S⁴.
pub fn omega4() -> PiScalar {
    PiScalar::frac_pi(8, 3, 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex(v.to_vec())
    }

    #[test]
    fn moment_examples() {
        assert_eq!(sphere_moment(&mi(&[0; 5])).unwrap(), PiScalar::frac_pi(8, 3, 2));
        assert_eq!(sphere_moment(&mi(&[2, 0, 0, 0, 0])).unwrap(), PiScalar::frac_pi(8, 15, 2));
        assert!(sphere_moment(&mi(&[1, 0, 0, 0, 0])).unwrap().is_zero());
        assert_eq!(sphere_moment(&mi(&[2, 2, 0, 0, 0])).unwrap(), PiScalar::frac_pi(8, 105, 2));
        assert_eq!(sphere_moment(&mi(&[4, 0, 0, 0, 0])).unwrap(), PiScalar::frac_pi(8, 35, 2));
        assert!(sphere_moment(&mi(&[4, 4, 2, 0, 0])).is_err());
    }

    #[test]
    fn low_dimensions() {
        // circle length and S² area
        assert_eq!(sphere_moment(&mi(&[0, 0])).unwrap(), PiScalar::frac_pi(2, 1, 1));
        assert_eq!(sphere_moment(&mi(&[0, 0, 0])).unwrap(), PiScalar::frac_pi(4, 1, 1));
        assert_eq!(sphere_moment(&mi(&[2, 0, 0])).unwrap(), PiScalar::frac_pi(4, 3, 1));
    }

    #[test]
    fn squares_sum_to_area() {
        let mut s = PiScalar::zero();
        for i in 0..5 {
            let mut a = vec![0; 5];
            a[i] = 2;
            s = s.add(&sphere_moment(&MultiIndex(a)).unwrap());
        }
        assert_eq!(s, omega4());
    }

    #[test]
    fn permutation_symmetric() {
        let a = sphere_moment(&mi(&[2, 0, 4, 0, 0])).unwrap();
        let b = sphere_moment(&mi(&[0, 0, 0, 4, 2])).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pairing_constants() {
        assert_eq!(pairing_constant(0, SphereMeasure::Exact).unwrap(), omega4());
        assert_eq!(pairing_constant(0, SphereMeasure::Bookkeeping).unwrap(), PiScalar::one());
        assert_eq!(pairing_constant(1, SphereMeasure::Bookkeeping).unwrap(), PiScalar::frac_pi(8, 15, 2));
        assert_eq!(pairing_constant(2, SphereMeasure::Exact).unwrap(), PiScalar::frac_pi(8, 105, 2));
    }
}
