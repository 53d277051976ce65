//! Independent numeric verification: explicit 8×8 gamma matrices, random
//! instances of the tensor data, a metric model for the collar near the
//! boundary, and a purely numeric evaluation of every boundary case.

use nalgebra::Matrix6;
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::boundary::CaseId;
use crate::clifford::{cw_trace, CliffordElement};
use crate::error::{Error, Result};
use crate::field::{ComplexField, Field, Fp};
use crate::fixture::Fixture;
use crate::scalar::{CRat, Rational};
use crate::sphere::MultiIndex;
use crate::tensor::TensorValues;

const I: C = C::new(0.0, 1.0);

// ---------------------------------------------------------------------------
// gamma matrices

/// Dense square matrix over a field.
#[derive(Clone, PartialEq, Debug)]
pub struct DenseMat<K> {
    pub n: usize,
    pub data: Vec<K>,
}

impl<K: Field> DenseMat<K> {
    pub fn zero(n: usize) -> Self {
        DenseMat { n, data: vec![K::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n);
        for i in 0..n {
            m.data[i * n + i] = K::one();
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> K {
        self.data[i * self.n + j].clone()
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zero(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] = out.data[i * n + j].clone() + a.clone() * o.get(k, j);
                }
            }
        }
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        DenseMat { n: self.n, data: self.data.iter().zip(&o.data).map(|(a, b)| a.clone() + b.clone()).collect() }
    }

    pub fn scale(&self, s: &K) -> Self {
        DenseMat { n: self.n, data: self.data.iter().map(|a| a.clone() * s.clone()).collect() }
    }

    pub fn trace(&self) -> K {
        (0..self.n).fold(K::zero(), |acc, i| acc + self.get(i, i))
    }
}

/// Six anticommuting 8×8 matrices with `γᵢγⱼ + γⱼγᵢ = −2δᵢⱼ`.
#[derive(Clone, Debug)]
pub struct GammaRep<K> {
    pub g: Vec<DenseMat<K>>,
}

fn kron<K: Field>(a: &DenseMat<K>, b: &DenseMat<K>) -> DenseMat<K> {
    let n = a.n * b.n;
    let mut out = DenseMat::zero(n);
    for i in 0..a.n {
        for j in 0..a.n {
            for k in 0..b.n {
                for l in 0..b.n {
                    out.data[(i * b.n + k) * n + j * b.n + l] = a.get(i, j) * b.get(k, l);
                }
            }
        }
    }
    out
}

impl<K: ComplexField> GammaRep<K> {
    pub fn new() -> Self {
        let m2 = |v: [(i64, i64); 4]| DenseMat {
            n: 2,
            data: v
                .iter()
                .map(|&(re, im)| K::from_crat(&CRat::new(Rational::from_int(re), Rational::from_int(im))))
                .collect(),
        };
        let id = DenseMat::<K>::identity(2);
        let s1 = m2([(0, 0), (1, 0), (1, 0), (0, 0)]);
        let s2 = m2([(0, 0), (0, -1), (0, 1), (0, 0)]);
        let s3 = m2([(1, 0), (0, 0), (0, 0), (-1, 0)]);
        let k3 = |a: &DenseMat<K>, b: &DenseMat<K>, c: &DenseMat<K>| kron(&kron(a, b), c);
        let herm = [
            k3(&s1, &id, &id),
            k3(&s2, &id, &id),
            k3(&s3, &s1, &id),
            k3(&s3, &s2, &id),
            k3(&s3, &s3, &s1),
            k3(&s3, &s3, &s2),
        ];
        GammaRep { g: herm.iter().map(|m| m.scale(&K::imag())).collect() }
    }

    /// Product of generators `γ_{w₁}…γ_{w_k}` (1-based).
    pub fn word(&self, w: &[u8]) -> DenseMat<K> {
        w.iter().fold(DenseMat::identity(8), |acc, &k| acc.mul(&self.g[k as usize - 1]))
    }

    /// Largest entry of `γᵢγⱼ + γⱼγᵢ + 2δᵢⱼ` over all pairs, as a zero test.
    pub fn clifford_residual_is_zero(&self) -> bool {
        for i in 0..6 {
            for j in 0..6 {
                let mut m = self.g[i].mul(&self.g[j]).add(&self.g[j].mul(&self.g[i]));
                if i == j {
                    m = m.add(&DenseMat::identity(8).scale(&K::from_i64(2)));
                }
                if m.data.iter().any(|x| !x.is_zero()) {
                    return false;
                }
            }
        }
        true
    }
}

impl<K: ComplexField> Default for GammaRep<K> {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceCheck {
    pub word: Vec<u8>,
    pub symbolic: i64,
    pub matrix: i64,
    pub ok: bool,
}

/// Compares `cw_trace` with traces of explicit gamma-matrix products.
pub fn matrix_trace_check(words: &[Vec<u8>]) -> Vec<TraceCheck> {
    let rep = GammaRep::<Fp>::new();
    words
        .iter()
        .map(|w| {
            let sym = cw_trace(&CliffordElement::<i64>::word(6, w), 6).expect("even dimension");
            let tr = rep.word(w).trace();
            let matrix = if tr.0 > crate::field::P / 2 { -((crate::field::P - tr.0) as i64) } else { tr.0 as i64 };
            TraceCheck { word: w.clone(), symbolic: sym, matrix, ok: sym == matrix }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// tensor data instances

/// Values of `a`, `∂a`, `∇J` and `h'(0)` at the boundary point.
#[derive(Clone, Debug, Serialize)]
pub struct JInstance<K> {
    pub a: [[K; 6]; 6],
    /// `da[j][p][h] = ∂_{x_{j+1}} a[p+1,h+1]`
    pub da: [[[K; 6]; 6]; 6],
    /// `nj[α][β][γ]`
    pub nj: [[[K; 6]; 6]; 6],
    pub hp: K,
    pub seed: u64,
}

impl<K: Field> TensorValues<K> for JInstance<K> {
    fn a(&self, p: u8, h: u8) -> K {
        self.a[p as usize - 1][h as usize - 1].clone()
    }
    fn da(&self, dir: u8, p: u8, h: u8) -> K {
        self.da[dir as usize - 1][p as usize - 1][h as usize - 1].clone()
    }
    fn nj(&self, a: u8, b: u8, c: u8) -> K {
        self.nj[a as usize - 1][b as usize - 1][c as usize - 1].clone()
    }
    fn hp(&self) -> K {
        self.hp.clone()
    }
}

/// A real instance viewed with complex values.
pub struct Complexified<'a>(pub &'a JInstance<f64>);

impl TensorValues<C> for Complexified<'_> {
    fn a(&self, p: u8, h: u8) -> C {
        C::from(self.0.a(p, h))
    }
    fn da(&self, d: u8, p: u8, h: u8) -> C {
        C::from(self.0.da(d, p, h))
    }
    fn nj(&self, a: u8, b: u8, c: u8) -> C {
        C::from(self.0.nj(a, b, c))
    }
    fn hp(&self) -> C {
        C::from(self.0.hp)
    }
}

fn commutator_family<K: Field>(a: &[[K; 6]; 6], ks: &[[[K; 6]; 6]; 6]) -> [[[K; 6]; 6]; 6] {
    std::array::from_fn(|j| {
        std::array::from_fn(|p| {
            std::array::from_fn(|h| {
                let mut s = K::zero();
                for m in 0..6 {
                    s = s + a[p][m].clone() * ks[j][m][h].clone() - ks[j][p][m].clone() * a[m][h].clone();
                }
                s
            })
        })
    })
}

fn antisymmetric<K: Field>(mut f: impl FnMut() -> K) -> [[[K; 6]; 6]; 6] {
    let mut out: [[[K; 6]; 6]; 6] = std::array::from_fn(|_| std::array::from_fn(|_| std::array::from_fn(|_| K::zero())));
    for m in out.iter_mut() {
        for p in 0..6 {
            for h in p + 1..6 {
                let x = f();
                m[p][h] = x.clone();
                m[h][p] = -x;
            }
        }
    }
    out
}

/// `a = Q·diag(±1)·Qᵀ` with a random orthogonal `Q` and a mixed signature;
/// `da[j] = a·K_j − K_j·a` with random antisymmetric `K_j`; unconstrained `nj`.
pub fn random_j_instance(seed: u64) -> JInstance<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = || -> f64 { rng.sample(StandardNormal) };
    let g = Matrix6::<f64>::from_fn(|_, _| normal());
    let q = g.qr().q();
    let mut signs = [1.0f64; 6];
    loop {
        for s in signs.iter_mut() {
            *s = if normal() > 0.0 { 1.0 } else { -1.0 };
        }
        if signs.iter().any(|s| *s > 0.0) && signs.iter().any(|s| *s < 0.0) {
            break;
        }
    }
    let d = Matrix6::from_diagonal(&nalgebra::Vector6::from_row_slice(&signs));
    let am = q * d * q.transpose();
    let a: [[f64; 6]; 6] = std::array::from_fn(|p| std::array::from_fn(|h| 0.5 * (am[(p, h)] + am[(h, p)])));
    let ks = antisymmetric(&mut normal);
    let da = commutator_family(&a, &ks);
    let nj = std::array::from_fn(|_| std::array::from_fn(|_| std::array::from_fn(|_| normal())));
    let hp = normal();
    JInstance { a, da, nj, hp, seed }
}

/// The `J = id` degeneration: `a = I`, `∂a = 0`, `∇J = 0`, random `h'(0)`.
pub fn identity_instance(seed: u64) -> JInstance<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = std::array::from_fn(|p| std::array::from_fn(|h| if p == h { 1.0 } else { 0.0 }));
    let zero3 = [[[0.0; 6]; 6]; 6];
    JInstance { a, da: zero3, nj: zero3, hp: rng.sample(StandardNormal), seed }
}

fn random_fp(rng: &mut ChaCha8Rng) -> Fp {
    Fp::new(rng.gen::<u64>())
}

fn solve_fp(m: &[Vec<Fp>], rhs: &[Vec<Fp>]) -> Option<Vec<Vec<Fp>>> {
    let n = m.len();
    let cols = rhs[0].len();
    let mut aug: Vec<Vec<Fp>> = (0..n).map(|i| [m[i].clone(), rhs[i].clone()].concat()).collect();
    for c in 0..n {
        let piv = (c..n).find(|&r| !aug[r][c].is_zero())?;
        aug.swap(c, piv);
        let inv = aug[c][c].inv();
        for x in aug[c].iter_mut() {
            *x = *x * inv;
        }
        for r in 0..n {
            if r != c && !aug[r][c].is_zero() {
                let f = aug[r][c];
                for k in 0..n + cols {
                    aug[r][k] = aug[r][k] - f * aug[c][k];
                }
            }
        }
    }
    Some(aug.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Instance over the prime field: `a = 2V(VᵀV)⁻¹Vᵀ − I` is a symmetric
/// involution for any `V` with `VᵀV` invertible.
pub fn modular_instance(seed: u64) -> JInstance<Fp> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_f00d);
    let r = 1 + (seed % 5) as usize;
    let a = loop {
        let v: Vec<Vec<Fp>> = (0..6).map(|_| (0..r).map(|_| random_fp(&mut rng)).collect()).collect();
        let vtv: Vec<Vec<Fp>> = (0..r)
            .map(|i| (0..r).map(|j| (0..6).fold(Fp::zero(), |s, k| s + v[k][i] * v[k][j])).collect())
            .collect();
        let vt: Vec<Vec<Fp>> = (0..r).map(|i| (0..6).map(|k| v[k][i]).collect()).collect();
        let Some(x) = solve_fp(&vtv, &vt) else { continue };
        break std::array::from_fn(|p| {
            std::array::from_fn(|h| {
                let proj = (0..r).fold(Fp::zero(), |s, i| s + v[p][i] * x[i][h]);
                proj + proj - if p == h { Fp::one() } else { Fp::zero() }
            })
        });
    };
    let ks = antisymmetric(|| random_fp(&mut rng));
    let da = commutator_family(&a, &ks);
    let nj = std::array::from_fn(|_| std::array::from_fn(|_| std::array::from_fn(|_| random_fp(&mut rng))));
    let hp = random_fp(&mut rng);
    JInstance { a, da, nj, hp, seed }
}

pub fn random_fp5(seed: u64) -> [Fp; 5] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcdef);
    std::array::from_fn(|_| random_fp(&mut rng))
}

/// A point of the unit sphere `S⁴` over the prime field, by inverse
/// stereographic projection of a random point of `F⁴`.
pub fn unit_tangent_fp(seed: u64) -> [Fp; 5] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1234_5678);
    loop {
        let u: [Fp; 4] = std::array::from_fn(|_| random_fp(&mut rng));
        let s = u.iter().fold(Fp::zero(), |acc, x| acc + *x * *x);
        let d = s + Fp::one();
        if d.is_zero() {
            continue;
        }
        let inv = d.inv();
        let two = Fp::from_i64(2);
        return [two * u[0] * inv, two * u[1] * inv, two * u[2] * inv, two * u[3] * inv, (s - Fp::one()) * inv];
    }
}

pub fn random_unit5(rng: &mut impl Rng) -> [f64; 5] {
    loop {
        let v: [f64; 5] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-8 {
            return v.map(|x| x / n);
        }
    }
}

// ---------------------------------------------------------------------------
// collar metric model

/// `g = h(x_n)⁻¹ Σ_{i<n} dx_i² + dx_n²` with `h(x) = 1 + h'(0)x + h₂x²`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CollarMetric {
    pub hp: f64,
    pub h2: f64,
}

const CSTEP: f64 = 1e-20;

impl CollarMetric {
    pub fn new(hp: f64) -> Self {
        CollarMetric { hp, h2: 0.3 }
    }

    fn h(&self, xn: C) -> C {
        C::from(1.0) + xn * self.hp + xn * xn * self.h2
    }

    /// Diagonal of `g_{ij}` at `x`.
    pub fn g(&self, x: &[C; 6]) -> [C; 6] {
        let h = self.h(x[5]);
        std::array::from_fn(|i| if i < 5 { h.inv() } else { C::from(1.0) })
    }

    /// Diagonal of `g^{ij}` at `x`.
    pub fn ginv(&self, x: &[C; 6]) -> [C; 6] {
        self.g(x).map(|v| v.inv())
    }

    /// Coordinate derivative at the origin by the complex step.
    fn d0<const M: usize>(f: impl Fn(&[C; 6]) -> [C; M], l: usize) -> [f64; M] {
        let mut x = [C::from(0.0); 6];
        x[l] = C::new(0.0, CSTEP);
        f(&x).map(|v| v.im / CSTEP)
    }

    /// `∂_l g^{ii}` at the origin, indexed `[l][i]`.
    pub fn dginv(&self) -> [[f64; 6]; 6] {
        std::array::from_fn(|l| Self::d0(|x| self.ginv(x), l))
    }

    /// `Γ^k_{ij}` at the origin, indexed `[k][i][j]`.
    pub fn christoffel(&self) -> [[[f64; 6]; 6]; 6] {
        let dg: [[f64; 6]; 6] = std::array::from_fn(|l| Self::d0(|x| self.g(x), l));
        let dgm = |l: usize, i: usize, j: usize| if i == j { dg[l][i] } else { 0.0 };
        std::array::from_fn(|k| {
            std::array::from_fn(|i| std::array::from_fn(|j| 0.5 * (dgm(i, j, k) + dgm(j, i, k) - dgm(k, i, j))))
        })
    }

    /// `Γ^k = g^{ij}Γ^k_{ij}` at the origin.
    pub fn contracted(&self) -> [f64; 6] {
        let ch = self.christoffel();
        std::array::from_fn(|k| (0..6).map(|i| ch[k][i][i]).sum())
    }

    /// Scale of the orthonormal frame `e_i = f_i ∂_i`.
    fn frame(&self, x: &[C; 6]) -> [C; 6] {
        self.ginv(x).map(|v| v.sqrt())
    }

    /// `ω_{s,t}(e_l) = ⟨∇_{e_l} e_t, e_s⟩` at the origin, indexed `[s][t][l]`.
    pub fn omega(&self) -> [[[f64; 6]; 6]; 6] {
        let ch = self.christoffel();
        let df: [[f64; 6]; 6] = std::array::from_fn(|l| Self::d0(|x| self.frame(x), l));
        std::array::from_fn(|s| {
            std::array::from_fn(|t| std::array::from_fn(|l| if s == t { df[l][t] } else { 0.0 } + ch[s][l][t]))
        })
    }

    /// `∂_l |dx_h|`, indexed `[l][h]`; `c(dx_h) = |dx_h| c(e_h)`.
    pub fn dclifford(&self) -> [[f64; 6]; 6] {
        std::array::from_fn(|l| Self::d0(|x| self.frame(x), l))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditLine {
    pub entry: String,
    pub line: usize,
    pub fixture: f64,
    pub numeric: f64,
    pub ok: bool,
}

/// Recomputes every fixture entry from the collar metric by numeric
/// differentiation (all tangential indices are checked).
pub fn audit_fixture(fx: &Fixture) -> Vec<AuditLine> {
    let hp = 0.7;
    let m = CollarMetric::new(hp);
    let dg = m.dginv();
    let ch = m.christoffel();
    let om = m.omega();
    let con = m.contracted();
    let dc = m.dclifford();
    let n = 5;
    let worst = |vals: Vec<f64>, target: f64| {
        vals.into_iter().max_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs())).unwrap_or(target)
    };
    let mut out = Vec::new();
    for (_, name) in crate::fixture::ENTRIES {
        let e = &fx.entries[name];
        let target = e.value.to_f64() * hp;
        let vals: Vec<f64> = match name {
            "dn_ginv_tt" => (0..n).map(|i| dg[n][i]).collect(),
            "dt_ginv" => (0..n).flat_map(|l| (0..6).map(move |i| (l, i))).map(|(l, i)| dg[l][i]).collect(),
            "dn_ginv_nn" => vec![dg[n][n]],
            "omega_nt" => (0..n).map(|i| om[n][i][i]).collect(),
            "omega_tn" => (0..n).map(|i| om[i][n][i]).collect(),
            "gamma_n_tt" => (0..n).map(|i| ch[n][i][i]).collect(),
            "gamma_t_tn" => (0..n).flat_map(|i| [ch[i][i][n], ch[i][n][i]]).collect(),
            "contracted_n" => vec![con[n]],
            "contracted_t" => (0..n).map(|k| con[k]).collect(),
            "dn_c_t" => (0..n).map(|h| dc[n][h]).collect(),
            _ => unreachable!("entry list is closed"),
        };
        let numeric = worst(vals, target);
        out.push(AuditLine {
            entry: name.to_string(),
            line: e.line,
            fixture: target,
            numeric,
            ok: (numeric - target).abs() < 1e-9,
        });
    }
    out
}

pub fn check_fixture(fx: &Fixture) -> Result<()> {
    for l in audit_fixture(fx) {
        if !l.ok {
            return Err(Error::Fixture {
                file: fx.file.clone(),
                line: l.line,
                msg: format!("`{}` is {} at h'(0) = 0.7 but the metric gives {}", l.entry, l.fixture, l.numeric),
            });
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// numeric symbols

/// 8×8 complex matrix.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct Mat8(pub [[C; 8]; 8]);

impl Mat8 {
    pub const ZERO: Mat8 = Mat8([[C::new(0.0, 0.0); 8]; 8]);

    pub fn identity() -> Mat8 {
        let mut m = Mat8::ZERO;
        for i in 0..8 {
            m.0[i][i] = C::from(1.0);
        }
        m
    }

    pub fn trace(&self) -> C {
        (0..8).map(|i| self.0[i][i]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|x| x.norm()).fold(0.0, f64::max)
    }

    fn axpy(&mut self, s: C, o: &Mat8) {
        for i in 0..8 {
            for j in 0..8 {
                self.0[i][j] += s * o.0[i][j];
            }
        }
    }

    /// `tr(self · o)` without forming the product.
    pub fn trace_mul(&self, o: &Mat8) -> C {
        let mut s = C::from(0.0);
        for i in 0..8 {
            for k in 0..8 {
                s += self.0[i][k] * o.0[k][i];
            }
        }
        s
    }
}

impl std::ops::Add for Mat8 {
    type Output = Mat8;
    fn add(mut self, o: Mat8) -> Mat8 {
        self.axpy(C::from(1.0), &o);
        self
    }
}

impl std::ops::Sub for Mat8 {
    type Output = Mat8;
    fn sub(mut self, o: Mat8) -> Mat8 {
        self.axpy(C::from(-1.0), &o);
        self
    }
}

impl std::ops::Mul for Mat8 {
    type Output = Mat8;
    fn mul(self, o: Mat8) -> Mat8 {
        let mut out = Mat8::ZERO;
        for i in 0..8 {
            for k in 0..8 {
                let a = self.0[i][k];
                if a == C::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..8 {
                    out.0[i][j] += a * o.0[k][j];
                }
            }
        }
        out
    }
}

impl std::ops::Mul<C> for Mat8 {
    type Output = Mat8;
    fn mul(mut self, s: C) -> Mat8 {
        for x in self.0.iter_mut().flatten() {
            *x *= s;
        }
        self
    }
}

impl std::ops::Mul<f64> for Mat8 {
    type Output = Mat8;
    fn mul(self, s: f64) -> Mat8 {
        self * C::from(s)
    }
}

/// Each gamma matrix has exactly one nonzero per row: `(column, value)`.
#[derive(Clone, Copy, Debug)]
struct SparseGamma([(usize, C); 8]);

/// First derivative at `z0` by the trapezoidal Cauchy integral.
pub fn cauchy_d1(f: impl Fn(C) -> Mat8, z0: C, r: f64, m: usize) -> Mat8 {
    let mut acc = Mat8::ZERO;
    for k in 0..m {
        let w = C::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / m as f64);
        acc.axpy(w.inv() / (r * m as f64), &f(z0 + w * r));
    }
    acc
}

/// Where the x-dependent data is evaluated: the boundary point moved by `t`
/// along coordinate `dir`.
#[derive(Clone, Copy)]
struct Path {
    dir: usize,
    t: C,
}

struct State {
    /// `a[p][h]` along the path (first-order model)
    a: [[C; 6]; 6],
    /// `|dx_h|`
    scale: [C; 6],
    /// diagonal of `g^{ij}`
    ginv: [C; 6],
}

/// Numeric versions of all symbols for one instance.
pub struct NumericSymbols<'a> {
    inst: &'a JInstance<f64>,
    metric: CollarMetric,
    gam: [SparseGamma; 6],
    sigma: [Mat8; 6],
    sigma0: Mat8,
    dginv: [[f64; 6]; 6],
    contracted: [f64; 6],
}

const RT: f64 = 1e-2;
const MT: usize = 12;

impl<'a> NumericSymbols<'a> {
    pub fn new(inst: &'a JInstance<f64>) -> Self {
        let rep = GammaRep::<C>::new();
        let gam = std::array::from_fn(|k| {
            SparseGamma(std::array::from_fn(|i| {
                let j = (0..8).find(|&j| rep.g[k].get(i, j) != C::new(0.0, 0.0)).expect("one entry per row");
                (j, rep.g[k].get(i, j))
            }))
        });
        let metric = CollarMetric::new(inst.hp);
        let om = metric.omega();
        let mut s = NumericSymbols {
            inst,
            metric,
            gam,
            sigma: [Mat8::ZERO; 6],
            sigma0: Mat8::ZERO,
            dginv: metric.dginv(),
            contracted: metric.contracted(),
        };
        // σ_i = ¼ Σ_{j,k} ⟨∇_{e_i} e_j, e_k⟩ c(e_j)c(e_k)
        for i in 0..6 {
            let mut m = Mat8::ZERO;
            for j in 0..6 {
                for k in 0..6 {
                    if om[k][j][i] != 0.0 {
                        m.axpy(C::from(0.25 * om[k][j][i]), &(s.gen(j) * s.gen(k)));
                    }
                }
            }
            s.sigma[i] = m;
        }
        // σ₀(D_J) = Σ_i c[J(e_i)] σ_i
        let st = s.state(None);
        let mut s0 = Mat8::ZERO;
        for i in 0..6 {
            s0 = s0 + s.c_j_dx(&st, i) * s.sigma[i];
        }
        s.sigma0 = s0;
        s
    }

    fn gen(&self, k: usize) -> Mat8 {
        self.lin(&{
            let mut w = [C::from(0.0); 6];
            w[k] = C::from(1.0);
            w
        })
    }

    /// `Σ_h w_h γ_h`
    fn lin(&self, w: &[C; 6]) -> Mat8 {
        let mut m = Mat8::ZERO;
        for (h, g) in self.gam.iter().enumerate() {
            if w[h] == C::new(0.0, 0.0) {
                continue;
            }
            for (i, (j, v)) in g.0.iter().enumerate() {
                m.0[i][*j] += w[h] * v;
            }
        }
        m
    }

    fn state(&self, path: Option<Path>) -> State {
        let mut x = [C::from(0.0); 6];
        let mut a: [[C; 6]; 6] = std::array::from_fn(|p| std::array::from_fn(|h| C::from(self.inst.a[p][h])));
        if let Some(p) = path {
            x[p.dir] = p.t;
            for (row, drow) in a.iter_mut().zip(&self.inst.da[p.dir]) {
                for (v, d) in row.iter_mut().zip(drow) {
                    *v += p.t * d;
                }
            }
        }
        State { a, scale: self.metric.ginv(&x).map(|v| v.sqrt()), ginv: self.metric.ginv(&x) }
    }

    fn c_j_xi(&self, st: &State, xi: &[C; 6]) -> Mat8 {
        let w: [C; 6] = std::array::from_fn(|h| (0..6).map(|p| xi[p] * st.a[p][h]).sum::<C>() * st.scale[h]);
        self.lin(&w)
    }

    fn c_j_dx(&self, st: &State, q: usize) -> Mat8 {
        let w: [C; 6] = std::array::from_fn(|h| st.a[q][h] * st.scale[h]);
        self.lin(&w)
    }

    fn norm2(&self, st: &State, xi: &[C; 6]) -> C {
        (0..6).map(|i| st.ginv[i] * xi[i] * xi[i]).sum()
    }

    fn dx(&self, dir: usize, f: impl Fn(&State) -> Mat8) -> Mat8 {
        let r = RT / self.inst.hp.abs().max(1.0);
        cauchy_d1(|t| f(&self.state(Some(Path { dir, t }))), C::from(0.0), r, MT)
    }

    fn dx_scalar(&self, dir: usize, f: impl Fn(&State) -> C) -> C {
        self.dx(dir, |st| Mat8::identity() * f(st)).0[0][0]
    }

    pub fn sigma_m1(&self, xi: &[C; 6]) -> Mat8 {
        let st = self.state(None);
        self.c_j_xi(&st, xi) * (I / self.norm2(&st, xi))
    }

    fn sm3_at(&self, st: &State, xi: &[C; 6]) -> Mat8 {
        let n = self.norm2(st, xi);
        self.c_j_xi(st, xi) * (I / (n * n))
    }

    pub fn sigma_m3(&self, xi: &[C; 6]) -> Mat8 {
        self.sm3_at(&self.state(None), xi)
    }

    fn s3_at(&self, st: &State, xi: &[C; 6]) -> Mat8 {
        self.c_j_xi(st, xi) * (I * self.norm2(st, xi))
    }

    /// `∂_{x_dir} σ₋₁` at the boundary point.
    pub fn dx_sigma_m1(&self, dir: usize, xi: &[C; 6]) -> Mat8 {
        self.dx(dir, |st| self.c_j_xi(st, xi) * (I / self.norm2(st, xi)))
    }

    pub fn dx_sigma_m3(&self, dir: usize, xi: &[C; 6]) -> Mat8 {
        self.dx(dir, |st| self.sm3_at(st, xi))
    }

    /// `−q₋₁[σ₀q₋₁ + Σ_j ∂_{ξ_j}p₁ D_{x_j}(q₋₁)]` with `p₁ = i c[J(ξ)]`.
    pub fn sigma_m2_composed(&self, xi: &[C; 6]) -> Mat8 {
        let st = self.state(None);
        let q1 = self.sigma_m1(xi);
        let mut inner = self.sigma0 * q1;
        for j in 0..6 {
            inner = inner + (self.c_j_dx(&st, j) * I) * self.dx_sigma_m1(j, xi) * (-I);
        }
        (q1 * inner) * -1.0
    }

    pub fn sigma_m2(&self, xi: &[C; 6]) -> Mat8 {
        let [a1, a2, a3] = self.sigma_m2_parts(xi);
        a1 + a2 + a3
    }

    /// `c σ₀ c/|ξ|⁴`, `c Σ_j c[J(dx_j)] ∂_j(c)/|ξ|⁴` and `−c Σ_j c[J(dx_j)] c ∂_j|ξ|²/|ξ|⁶`.
    pub fn sigma_m2_parts(&self, xi: &[C; 6]) -> [Mat8; 3] {
        let st = self.state(None);
        let c = self.c_j_xi(&st, xi);
        let n = self.norm2(&st, xi);
        let mut s2 = Mat8::ZERO;
        let mut s3 = Mat8::ZERO;
        for j in 0..6 {
            let dc = self.dx(j, |s| self.c_j_xi(s, xi));
            let dn = self.dx_scalar(j, |s| self.norm2(s, xi));
            s2 = s2 + self.c_j_dx(&st, j) * dc * n;
            s3 = s3 - self.c_j_dx(&st, j) * c * dn;
        }
        let n3 = (n * n * n).inv();
        [c * self.sigma0 * c * (n * n).inv(), c * s2 * n3, c * s3 * n3]
    }

    pub fn sigma_2(&self, xi: &[C; 6]) -> Mat8 {
        let st = self.state(None);
        let c = self.c_j_xi(&st, xi);
        let mut out = Mat8::ZERO;
        for l in 0..6 {
            let s: C = (0..6).map(|i| self.dginv[l][i] * xi[i] * xi[i]).sum();
            out.axpy(s, &self.c_j_dx(&st, l));
        }
        let mut conn = Mat8::ZERO;
        for k in 0..6 {
            conn.axpy(4.0 * xi[k], &self.sigma[k]);
            conn.axpy(-2.0 * self.contracted[k] * xi[k], &Mat8::identity());
        }
        out = out + c * conn;
        for alpha in 0..6 {
            let w: [C; 6] = std::array::from_fn(|g| (0..6).map(|b| xi[b] * self.inst.nj[alpha][b][g]).sum());
            out.axpy(C::from(-2.0), &(c * self.c_j_dx(&st, alpha) * self.lin(&w)));
        }
        out.axpy(self.norm2(&st, xi), &self.sigma0);
        out
    }

    /// `−p₃⁻¹[p₂p₃⁻¹ + Σ_j ∂_{ξ_j}p₃ D_{x_j}(p₃⁻¹)]`
    pub fn sigma_m4(&self, xi: &[C; 6]) -> Mat8 {
        let st = self.state(None);
        let q3 = self.sm3_at(&st, xi);
        let mut inner = self.sigma_2(xi) * q3;
        for j in 0..6 {
            let dp3 = cauchy_d1(
                |z| {
                    let mut x2 = *xi;
                    x2[j] = z;
                    self.s3_at(&st, &x2)
                },
                xi[j],
                0.5,
                6,
            );
            let dq3 = self.dx_sigma_m3(j, xi);
            inner = inner + dp3 * dq3 * (-I);
        }
        (q3 * inner) * -1.0
    }

    /// `c σ₂ c/|ξ|⁸ + c/|ξ|¹⁰ Σ_j (c[J(dx_j)]|ξ|² + 2ξ_j c)(∂_j(c)|ξ|² − 2c∂_j|ξ|²)`
    pub fn sigma_m4_printed(&self, xi: &[C; 6]) -> Mat8 {
        let st = self.state(None);
        let c = self.c_j_xi(&st, xi);
        let n = self.norm2(&st, xi);
        let mut sum = Mat8::ZERO;
        for j in 0..6 {
            let left = self.c_j_dx(&st, j) * n + c * (2.0 * xi[j]);
            let dc = self.dx(j, |s| self.c_j_xi(s, xi));
            let dn = self.dx_scalar(j, |s| self.norm2(s, xi));
            sum = sum + left * (dc * n - c * (2.0 * dn));
        }
        c * self.sigma_2(xi) * c * n.powi(4).inv() + c * sum * n.powi(5).inv()
    }
}

// ---------------------------------------------------------------------------
// π⁺ and quadrature

/// Principal part at `ξ_n = i` of a matrix function, from contour Laurent
/// coefficients: `π⁺X(ξ) = Σ_k c_k (ξ − i)^{−k}`.
pub struct PrincipalPart {
    pub coeffs: Vec<Mat8>,
}

const LAURENT_RADIUS: f64 = 0.5;
const LAURENT_POINTS: usize = 48;
const LAURENT_ORDER: usize = 12;

impl PrincipalPart {
    pub fn new(f: impl Fn(C) -> Mat8) -> Self {
        let vals: Vec<(C, Mat8)> = (0..LAURENT_POINTS)
            .map(|m| {
                let w = C::from_polar(LAURENT_RADIUS, 2.0 * std::f64::consts::PI * m as f64 / LAURENT_POINTS as f64);
                (w, f(I + w))
            })
            .collect();
        let coeffs = (1..=LAURENT_ORDER)
            .map(|k| {
                let mut acc = Mat8::ZERO;
                for (w, v) in &vals {
                    acc.axpy(w.powi(k as i32) / LAURENT_POINTS as f64, v);
                }
                acc
            })
            .collect();
        PrincipalPart { coeffs }
    }

    /// `d`-th ξ_n-derivative of `π⁺X` at real `x`.
    pub fn eval(&self, x: f64, d: u32) -> Mat8 {
        let z = C::from(x) - I;
        let mut acc = Mat8::ZERO;
        for (j, c) in self.coeffs.iter().enumerate() {
            let k = j as i32 + 1;
            // d^d/dz^d z^{-k} = (-1)^d k(k+1)…(k+d-1) z^{-k-d}
            let mut f = 1.0;
            for s in 0..d as i32 {
                f *= -((k + s) as f64);
            }
            acc.axpy(z.powi(-k - d as i32) * f, c);
        }
        acc
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct QuadConfig {
    pub tol: f64,
    pub start: usize,
    pub max: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig { tol: 1e-10, start: 16, max: 4096 }
    }
}

/// `∫_ℝ f` for integrands decaying at least like `ξ⁻²`, via `ξ = tan θ` and a
/// midpoint rule doubled until two successive estimates agree.
pub fn integrate_real_line(f: impl Fn(f64) -> C, cfg: &QuadConfig) -> Result<(C, f64)> {
    let rule = |n: usize| -> C {
        let h = std::f64::consts::PI / n as f64;
        (0..n)
            .map(|j| {
                let th = -std::f64::consts::FRAC_PI_2 + (j as f64 + 0.5) * h;
                let c = th.cos();
                f(th.tan()) / (c * c)
            })
            .sum::<C>()
            * h
    };
    let mut n = cfg.start;
    let mut prev = rule(n);
    loop {
        n *= 2;
        let cur = rule(n);
        let err = (cur - prev).norm();
        if err < cfg.tol * cur.norm().max(1.0) {
            return Ok((cur, err));
        }
        if n >= cfg.max {
            return Err(Error::Quadrature(err));
        }
        prev = cur;
    }
}

// ---------------------------------------------------------------------------
// sphere integration

/// Degree-5 rule on `S⁴`: the ten points `±e_i` with weight `1/35` and the 32
/// points `(±1,…,±1)/√5` with weight `5/224`, normalized to total mass 1.
pub fn sphere_rule_s4() -> Vec<([f64; 5], f64)> {
    let mut out = Vec::with_capacity(42);
    for i in 0..5 {
        for s in [1.0, -1.0] {
            let mut p = [0.0; 5];
            p[i] = s;
            out.push((p, 1.0 / 35.0));
        }
    }
    let r = 1.0 / 5f64.sqrt();
    for mask in 0..32u32 {
        let p = std::array::from_fn(|i| if mask >> i & 1 == 1 { -r } else { r });
        out.push((p, 5.0 / 224.0));
    }
    out
}

/// The same rule after an orthogonal change of coordinates.
pub fn rotated_rule(seed: u64) -> Vec<([f64; 5], f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = nalgebra::Matrix5::<f64>::from_fn(|_, _| rng.sample(StandardNormal));
    let q = g.qr().q();
    sphere_rule_s4()
        .into_iter()
        .map(|(p, w)| (std::array::from_fn(|i| (0..5).map(|j| q[(i, j)] * p[j]).sum()), w))
        .collect()
}

pub fn area_s4() -> f64 {
    8.0 * std::f64::consts::PI.powi(2) / 3.0
}

/// Monte Carlo estimate of `∫_{S⁴} ξ^α` with its standard error.
pub fn mc_sphere_moment(alpha: &MultiIndex, samples: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..samples {
        let p = random_unit5(&mut rng);
        let v: f64 = alpha.0.iter().zip(&p).map(|(a, x)| f64::powi(*x, *a as i32)).product();
        s += v;
        s2 += v * v;
    }
    let n = samples as f64;
    let mean = s / n;
    let var = (s2 / n - mean * mean).max(0.0);
    (mean * area_s4(), (var / n).sqrt() * area_s4())
}

/// Monte Carlo estimates of several moments from one shared sample.
pub fn mc_sphere_moments(alphas: &[MultiIndex], samples: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = vec![0.0; alphas.len()];
    let mut s2 = vec![0.0; alphas.len()];
    for _ in 0..samples {
        let p = random_unit5(&mut rng);
        let pows: [[f64; 5]; 5] = std::array::from_fn(|i| std::array::from_fn(|e| f64::powi(p[i], e as i32)));
        for (k, a) in alphas.iter().enumerate() {
            let v: f64 = a.0.iter().enumerate().map(|(i, e)| pows[i][*e as usize]).product();
            s[k] += v;
            s2[k] += v * v;
        }
    }
    let n = samples as f64;
    s.iter()
        .zip(&s2)
        .map(|(a, b)| {
            let mean = a / n;
            let var = (b / n - mean * mean).max(0.0);
            (mean * area_s4(), (var / n).sqrt() * area_s4())
        })
        .collect()
}

// ---------------------------------------------------------------------------
// end-to-end numeric cases

#[derive(Clone, Debug, Serialize)]
pub struct NumericCase {
    pub case: CaseId,
    pub seed: u64,
    pub value: f64,
    pub imag: f64,
    pub quad_error: f64,
}

fn xi_vec(u: &[f64; 5], xn: C) -> [C; 6] {
    [C::from(u[0]), C::from(u[1]), C::from(u[2]), C::from(u[3]), C::from(u[4]), xn]
}

/// The ξ_n integral for one case at one unit ξ′. Derivatives in ξ_n are moved
/// onto the principal part by integrating by parts.
fn case_line(case: CaseId, s: &NumericSymbols, u: &[f64; 5], q: &QuadConfig) -> Result<(C, f64)> {
    let re = |x: f64| xi_vec(u, C::from(x));
    match case {
        CaseId::A1 => {
            let mut total = C::from(0.0);
            let mut err: f64 = 0.0;
            for t in 0..5 {
                let pp = PrincipalPart::new(|z| {
                    cauchy_d1(
                        |w| {
                            let mut xi = xi_vec(u, z);
                            xi[t] = w;
                            s.sigma_m1(&xi)
                        },
                        C::from(u[t]),
                        0.25,
                        16,
                    )
                });
                let (v, e) = integrate_real_line(|x| -pp.eval(x, 1).trace_mul(&s.dx_sigma_m3(t, &re(x))), q)?;
                total += v;
                err = err.max(e);
            }
            Ok((total * -1.0, err))
        }
        CaseId::A2 => {
            let pp = PrincipalPart::new(|z| s.dx_sigma_m1(5, &xi_vec(u, z)));
            let (v, e) = integrate_real_line(|x| pp.eval(x, 2).trace_mul(&s.sigma_m3(&re(x))), q)?;
            Ok((v * -0.5, e))
        }
        CaseId::A3 => {
            let pp = PrincipalPart::new(|z| s.sigma_m1(&xi_vec(u, z)));
            let (v, e) = integrate_real_line(|x| -pp.eval(x, 2).trace_mul(&s.dx_sigma_m3(5, &re(x))), q)?;
            Ok((v * -0.5, e))
        }
        CaseId::B => {
            let pp = PrincipalPart::new(|z| s.sigma_m1(&xi_vec(u, z)));
            let (v, e) = integrate_real_line(|x| -pp.eval(x, 1).trace_mul(&s.sigma_m4(&re(x))), q)?;
            Ok((v * -I, e))
        }
        CaseId::C => {
            let pp = PrincipalPart::new(|z| s.sigma_m2(&xi_vec(u, z)));
            let (v, e) = integrate_real_line(|x| -pp.eval(x, 1).trace_mul(&s.sigma_m3(&re(x))), q)?;
            Ok((v * -I, e))
        }
    }
}

/// Boundary density of one case at the boundary point, with the true surface
/// measure on `S⁴` and the trace over the 8-dimensional spinor space.
pub fn numeric_case_with(
    case: CaseId,
    inst: &JInstance<f64>,
    rule: &[([f64; 5], f64)],
    q: &QuadConfig,
) -> Result<NumericCase> {
    let s = NumericSymbols::new(inst);
    let mut total = C::from(0.0);
    let mut err: f64 = 0.0;
    for (u, w) in rule {
        let (v, e) = case_line(case, &s, u, q)?;
        total += v * *w;
        err = err.max(e);
    }
    total *= area_s4();
    Ok(NumericCase { case, seed: inst.seed, value: total.re, imag: total.im, quad_error: err })
}

pub fn numeric_case(case: CaseId, inst: &JInstance<f64>) -> Result<NumericCase> {
    numeric_case_with(case, inst, &sphere_rule_s4(), &QuadConfig::default())
}

/// One of the three parts of case c (see [`NumericSymbols::sigma_m2_parts`]).
pub fn numeric_c_part(part: usize, inst: &JInstance<f64>) -> Result<NumericCase> {
    numeric_c_part_with(part, inst, &QuadConfig::default())
}

pub fn numeric_c_part_with(part: usize, inst: &JInstance<f64>, q: &QuadConfig) -> Result<NumericCase> {
    let s = NumericSymbols::new(inst);
    let mut total = C::from(0.0);
    let mut err: f64 = 0.0;
    for (u, w) in &sphere_rule_s4() {
        let pp = PrincipalPart::new(|z| s.sigma_m2_parts(&xi_vec(u, z))[part]);
        let (v, e) = integrate_real_line(|x| -pp.eval(x, 1).trace_mul(&s.sigma_m3(&xi_vec(u, C::from(x)))), q)?;
        total += v * -I * *w;
        err = err.max(e);
    }
    total *= area_s4();
    Ok(NumericCase { case: CaseId::C, seed: inst.seed, value: total.re, imag: total.im, quad_error: err })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::sphere_moment;

    #[test]
    fn sigma_m2_composition_detects_metric_factor() {
        let inst = random_j_instance(4);
        let ns = NumericSymbols::new(&inst);
        let xi = [0.3, -0.7, 1.1, 0.2, -0.4, 0.9].map(C::from);
        let composed = ns.sigma_m2_composed(&xi);
        assert!((ns.sigma_m2(&xi) - composed).max_abs() < 1e-10);
        let [a, b, c] = ns.sigma_m2_parts(&xi);
        assert!((a + b + c * 2.0 - composed).max_abs() > 1e-3);
    }

    #[test]
    fn gamma_relations_exact() {
        let rep = GammaRep::<Fp>::new();
        assert!(rep.clifford_residual_is_zero());
        assert_eq!(rep.word(&[]).trace(), Fp::from_i64(8));
        let c = GammaRep::<C>::new();
        assert!(c.clifford_residual_is_zero());
    }

    #[test]
    fn trace_check_examples() {
        let r = matrix_trace_check(&[vec![1, 2], vec![1, 1], vec![1, 2, 1, 2], vec![3, 4, 5, 6, 1, 2]]);
        assert!(r.iter().all(|c| c.ok));
        assert_eq!(r[0].matrix, 0);
        assert_eq!(r[1].matrix, -8);
        assert!(matrix_trace_check(&[]).is_empty());
    }

    #[test]
    fn instance_constraints() {
        for seed in 0..5 {
            let inst = random_j_instance(seed);
            for p in 0..6 {
                for h in 0..6 {
                    let sq: f64 = (0..6).map(|m| inst.a[p][m] * inst.a[m][h]).sum();
                    assert!((sq - if p == h { 1.0 } else { 0.0 }).abs() < 1e-13);
                    assert!((inst.a[p][h] - inst.a[h][p]).abs() < 1e-15);
                    for j in 0..6 {
                        let ac: f64 = (0..6).map(|m| inst.a[p][m] * inst.da[j][m][h] + inst.da[j][p][m] * inst.a[m][h]).sum();
                        assert!(ac.abs() < 1e-12);
                        assert!((inst.da[j][p][h] - inst.da[j][h][p]).abs() < 1e-12);
                    }
                }
            }
        }
        let m = modular_instance(4);
        for p in 0..6 {
            for h in 0..6 {
                let sq = (0..6).fold(Fp::zero(), |s, k| s + m.a[p][k] * m.a[k][h]);
                assert_eq!(sq, if p == h { Fp::one() } else { Fp::zero() });
            }
        }
        let u = unit_tangent_fp(9);
        assert_eq!(u.iter().fold(Fp::zero(), |s, x| s + *x * *x), Fp::one());
    }

    #[test]
    fn fixture_audit_passes_and_catches_corruption() {
        assert!(check_fixture(&Fixture::builtin()).is_ok());
        let bad = crate::fixture::DEFAULT_FIXTURE.replace("contracted_n | 5/2 hp", "contracted_n | 3/2 hp");
        let fx = Fixture::parse(&bad, "bad.txt").unwrap();
        match check_fixture(&fx) {
            Err(Error::Fixture { line, .. }) => assert_eq!(line, 14),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sphere_rule_degree_five() {
        let rule = sphere_rule_s4();
        let mut alphas = vec![];
        for a in 0..=5u32 {
            for b in 0..=5 - a {
                for c in 0..=(5 - a - b).min(2) {
                    alphas.push(MultiIndex(vec![a, b, c, 0, 0]));
                    alphas.push(MultiIndex(vec![a, 0, b, c, 0]));
                }
            }
        }
        for al in alphas {
            let exact = sphere_moment(&al).unwrap().to_f64();
            let num: f64 = rule
                .iter()
                .map(|(p, w)| w * al.0.iter().zip(p).map(|(e, x)| f64::powi(*x, *e as i32)).product::<f64>())
                .sum::<f64>()
                * area_s4();
            assert!((exact - num).abs() < 1e-12, "{al}: {exact} vs {num}");
        }
    }

    #[test]
    fn line_quadrature() {
        let (v, _) = integrate_real_line(|x| C::from(1.0 / (1.0 + x * x)), &QuadConfig::default()).unwrap();
        assert!((v.re - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn principal_part_of_simple_pole() {
        // 1/(1+ξ²) has principal part −i/(2(ξ−i)) at i
        let pp = PrincipalPart::new(|z| Mat8::identity() * (C::from(1.0) + z * z).inv());
        let x = 0.3;
        let want = -I / (2.0 * (C::from(x) - I));
        assert!((pp.eval(x, 0).0[0][0] - want).norm() < 1e-13);
    }

    #[test]
    fn identity_instance_kills_a1() {
        let r = numeric_case(CaseId::A1, &identity_instance(2)).unwrap();
        assert!(r.value.abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn rotated_rule_agrees() {
        let inst = random_j_instance(5);
        let q = QuadConfig::default();
        for case in [CaseId::A3, CaseId::C] {
            let a = numeric_case_with(case, &inst, &sphere_rule_s4(), &q).unwrap().value;
            let b = numeric_case_with(case, &inst, &rotated_rule(11), &q).unwrap().value;
            assert!((a - b).abs() < 1e-8 * a.abs().max(1.0), "{case:?}: {a} vs {b}");
        }
    }
}
