//! Self-checks of the building blocks: Clifford traces against gamma
//! matrices, trace contractions, tensor relations, π⁺ and line integrals,
//! sphere moments, the fixture audit and the symbol composition rule.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::boundary::{compute_case, rel_close, trace_word, CaseId, CaseOptions, OracleCache, TR_ID};
use crate::field::{Field, Fp};
use crate::fixture::Fixture;
use crate::oracle::{self, integrate_real_line, mc_sphere_moments, modular_instance, random_j_instance, unit_tangent_fp, QuadConfig};
use crate::ratxi::{Poly, RatXi};
use crate::scalar::{CRat, PiScalar, Rational};
use crate::sphere::{omega4, sphere_moment, MultiIndex};
use crate::symbols::{build_sigma, eval_expr, verify_composition, CompositionReport, EvalPoint, Expr, Sigma4Mode, SigmaTag, Term, XiPart};
use crate::tensor::{apply_relations, Factor, Idx, Range, TensorMonomial, TensorPoly, VarId};
use crate::Result;

#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Clifford,
    Relations,
    Residue,
    Sphere,
    Fixture,
    Composition,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn check(suite: Suite, name: &str, pass: bool, detail: String) -> Check {
    Check { suite, name: name.into(), pass, detail }
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaConfig {
    pub words: usize,
    pub ratxi_samples: usize,
    pub mc_samples: usize,
    pub points: usize,
    pub relation_instances: usize,
    pub seed: u64,
}

impl Default for LemmaConfig {
    fn default() -> Self {
        LemmaConfig { words: 1000, ratxi_samples: 200, mc_samples: 1_000_000, points: 20, relation_instances: 50, seed: 1 }
    }
}

/// A published value the engine refuses to adopt.
#[derive(Clone, Debug, Serialize)]
pub struct Inconsistency {
    pub quantity: String,
    pub published: String,
    pub exact: String,
    pub numeric: f64,
    pub published_numeric: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaReport {
    pub checks: Vec<Check>,
    pub inconsistencies: Vec<Inconsistency>,
    pub composition: CompositionReport,
}

impl LemmaReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn suite(&self, s: Suite) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(move |c| c.suite == s)
    }
}

pub fn run_lemmas(fx: &Fixture, cfg: &LemmaConfig) -> Result<LemmaReport> {
    let mut checks = clifford_suite(cfg)?;
    checks.extend(relations_suite(cfg)?);
    checks.extend(residue_suite(fx, cfg)?);
    let (sphere, inconsistencies) = sphere_suite(cfg)?;
    checks.extend(sphere);
    checks.extend(fixture_suite(fx));
    let (comp, composition) = composition_suite(fx, cfg)?;
    checks.extend(comp);
    Ok(LemmaReport { checks, inconsistencies, composition })
}

// ---------------------------------------------------------------------------
// Clifford

pub fn random_words(count: usize, seed: u64) -> Vec<Vec<u8>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let len = rng.gen_range(0..=8);
            (0..len).map(|_| rng.gen_range(1..=6u8)).collect()
        })
        .collect()
}

fn v(k: VarId) -> Idx {
    Idx::Var(k)
}

const NN: Idx = Idx::NORMAL;

/// `Σ_{α,h} tr[ξ… a[α,x] d[i]a[h,y] c(dx_α) c(dx_h)] = −Σ_h ξ… a[h,x] d[i]a[h,y] tr[id]`
/// with `x`, `y` either tangential summation indices or the normal index.
struct Contraction {
    name: &'static str,
    xi: &'static [VarId],
    x: Option<VarId>,
    y: Option<VarId>,
}

// variables: 0 = α, 1 = h, 2 = i, 3 = p, 4 = q
const CONTRACTIONS: [Contraction; 6] = [
    Contraction { name: "ξ_p a[α,i] ∂_i a[h,p]", xi: &[3], x: Some(2), y: Some(3) },
    Contraction { name: "a[α,i] ∂_i a[h,n]", xi: &[], x: Some(2), y: None },
    Contraction { name: "ξ_i ξ_q ξ_p a[α,q] ∂_i a[h,p]", xi: &[2, 4, 3], x: Some(4), y: Some(3) },
    Contraction { name: "ξ_i ξ_q a[α,q] ∂_i a[h,n]", xi: &[2, 4], x: Some(4), y: None },
    Contraction { name: "ξ_i ξ_p a[α,n] ∂_i a[h,p]", xi: &[2, 3], x: None, y: Some(3) },
    Contraction { name: "ξ_i a[α,n] ∂_i a[h,n]", xi: &[2], x: None, y: None },
];

impl Contraction {
    fn vars(&self, with_alpha: bool) -> BTreeMap<VarId, Range> {
        let mut m = BTreeMap::from([(1, Range::Full), (2, Range::Tangent)]);
        if with_alpha {
            m.insert(0, Range::Full);
        }
        for k in self.xi.iter().copied().chain(self.x).chain(self.y) {
            m.insert(k, Range::Tangent);
        }
        m
    }

    fn factors(&self, first: Idx) -> Vec<Factor> {
        let x = self.x.map(v).unwrap_or(NN);
        let y = self.y.map(v).unwrap_or(NN);
        vec![Factor::A(first, x), Factor::DA(v(2), v(1), y)]
    }

    fn term(&self, coef: i64, with_alpha: bool) -> Term {
        let first = if with_alpha { v(0) } else { v(1) };
        Term {
            xi_part: XiPart::Unres { num: Poly::constant(CRat::int(coef)), k: 0 },
            xps: 0,
            xi: self.xi.iter().map(|k| v(*k)).collect(),
            cliff: if with_alpha { vec![v(0), v(1)] } else { vec![] },
            tensor: self.factors(first),
            vars: self.vars(with_alpha),
        }
    }

    /// Symbolic: the ξ-free trace through the pipeline's pairing and
    /// reduction. Exact: the ξ-weighted identity in the explicit Clifford
    /// basis at prime-field points.
    fn verify(&self, points: usize) -> Result<(bool, bool)> {
        let lhs = trace_word(&[v(0), v(1)], &self.factors(v(0)), &self.vars(true))?;
        let mut rhs = TensorPoly::zero();
        let m = TensorMonomial::new(self.factors(v(1)), self.vars(false));
        rhs.add_term(&m, &PiScalar::int(-TR_ID))?;
        let symbolic = apply_relations(&lhs)? == apply_relations(&rhs)?;
        let l = Expr::from_terms(vec![self.term(1, true)]);
        let r = Expr::from_terms(vec![self.term(-1, false)]);
        let mut exact = true;
        for s in 0..points as u64 {
            let inst = modular_instance(s);
            let pt = EvalPoint { xi: oracle::random_fp5(s), xin: Fp::new(s + 3), vals: &inst };
            exact &= eval_expr(&l, &pt).trace_unit() == eval_expr(&r, &pt).trace_unit();
        }
        Ok((symbolic, exact))
    }
}

pub fn clifford_suite(cfg: &LemmaConfig) -> Result<Vec<Check>> {
    let words = random_words(cfg.words, cfg.seed);
    let res = oracle::matrix_trace_check(&words);
    let bad = res.iter().filter(|r| !r.ok).count();
    let mut out = vec![check(
        Suite::Clifford,
        "cw_trace vs gamma matrices",
        bad == 0 && oracle::GammaRep::<Fp>::new().clifford_residual_is_zero(),
        format!("{} random words of length <= 8 on 6 generators, {bad} disagreements", res.len()),
    )];
    for (k, c) in CONTRACTIONS.iter().enumerate() {
        let (sym, ex) = c.verify(cfg.points)?;
        out.push(check(
            Suite::Clifford,
            &format!("trace contraction {}", k + 1),
            sym && ex,
            format!("Σ tr[{} c_α c_h] = −8 Σ (α→h); symbolic {}, exact {}", c.name, ok(sym), ok(ex)),
        ));
    }
    Ok(out)
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAILED"
    }
}

// ---------------------------------------------------------------------------
// tensor relations

/// The rewrite `lhs → rhs` holds in normal form and preserves values on
/// random constraint-satisfying instances.
fn relation(cfg: &LemmaConfig, name: &str, lhs: &str, rhs: &str, factor: i64) -> Result<Check> {
    let l = TensorPoly::parse_line(lhs, "1")?;
    let r = TensorPoly::parse_line(rhs, "1")?.scale(&Rational::from_int(factor));
    let exact = apply_relations(&l)? == apply_relations(&r)?;
    let mut worst: f64 = 0.0;
    for s in 0..cfg.relation_instances as u64 {
        let inst = random_j_instance(1000 + s);
        let before = l.eval_f64(&inst)?;
        let after = apply_relations(&l)?.eval_f64(&inst)?;
        let target = r.eval_f64(&inst)?;
        worst = worst.max((before - after).abs()).max((before - target).abs());
    }
    let numeric = worst < 1e-9;
    Ok(check(
        Suite::Relations,
        name,
        exact && numeric,
        format!("{lhs} = {factor}·{rhs}: normal form {}, max numeric deviation {worst:.1e}", ok(exact)),
    ))
}

pub fn relations_suite(cfg: &LemmaConfig) -> Result<Vec<Check>> {
    let mut out = vec![
        relation(cfg, "involution contraction", "sum{p:1..n} a[3,p] a[p,3]", "1", 1)?,
        relation(cfg, "involution off-diagonal", "sum{p:1..n} a[1,p] a[p,2]", "1", 0)?,
        relation(cfg, "symmetry of a", "a[2,5] d[1]a[3,4]", "a[5,2] d[1]a[4,3]", 1)?,
        relation(
            cfg,
            "tangential split",
            "sum{h:1..n, i:1..n-1} a[h,i] d[i]a[h,n]",
            "sum{h:1..n, i:1..n} a[h,i] d[i]a[h,n]",
            1,
        )?,
        relation(
            cfg,
            "derivative mirror",
            "sum{h:1..n, i:1..n-1} a[h,i] d[i]a[h,n]",
            "sum{h:1..n, i:1..n-1} a[h,n] d[i]a[h,i]",
            -1,
        )?,
    ];
    let mut worst: f64 = 0.0;
    for s in 0..cfg.relation_instances as u64 {
        let inst = random_j_instance(2000 + s);
        for j in 0..6 {
            for l in 0..6 {
                for m in 0..6 {
                    let x: f64 = (0..6).map(|p| inst.a[l][p] * inst.da[j][p][m] + inst.da[j][l][p] * inst.a[p][m]).sum();
                    worst = worst.max(x.abs());
                }
            }
        }
    }
    out.push(check(
        Suite::Relations,
        "a·∂a + ∂a·a = 0 on instances",
        worst < 1e-12,
        format!("max entry {worst:.1e} over {} instances", cfg.relation_instances),
    ));
    Ok(out)
}

// ---------------------------------------------------------------------------
// π⁺ and line integrals

pub fn random_ratxi(rng: &mut ChaCha8Rng) -> RatXi {
    let deg = rng.gen_range(0..=4);
    let part = |rng: &mut ChaCha8Rng| Rational::new(rng.gen_range(-6..=6), rng.gen_range(1..=4));
    let coeffs: Vec<CRat> = (0..=deg).map(|_| CRat::new(part(rng), part(rng))).collect();
    let plus = rng.gen_range(0..=4);
    let minus = rng.gen_range(0..=4);
    RatXi::new(Poly::from_coeffs(coeffs), plus, minus)
}

fn res_term(num: Vec<CRat>, plus: u32, xi: Vec<Idx>, tensor: Vec<Factor>, vars: &[(VarId, Range)]) -> Term {
    Term {
        xi_part: XiPart::Res(RatXi::new(Poly::from_coeffs(num), plus, 0)),
        xps: 0,
        xi,
        cliff: vec![v(0)],
        tensor,
        vars: vars.iter().copied().collect(),
    }
}

fn ci(re: (i64, i64), im: (i64, i64)) -> CRat {
    CRat::new(Rational::new(re.0, re.1), Rational::new(im.0, im.1))
}

/// Hand-entered principal parts of `∂_{ξ_2}σ₋₁` and `∂_{ξ_n}σ₋₁` at `|ξ'| = 1`.
pub fn pi_plus_fixture() -> [(String, Expr, Expr); 2] {
    let fx = Fixture::builtin();
    let sm1 = build_sigma(SigmaTag::Sm1, &fx).expect("σ₋₁ builds");
    let t = Idx::Lit(2);
    let (f, tg) = (Range::Full, Range::Tangent);
    let expect_xi = Expr::from_terms(vec![
        // c[J(dx_2)] / (2(ξ_n − i))
        res_term(vec![ci((1, 2), (0, 1))], 1, vec![], vec![Factor::A(t, v(0))], &[(0, f)]),
        // (2i − ξ_n)/(2(ξ_n − i)²) Σ_q ξ_2 ξ_q c[J(dx_q)]
        res_term(vec![ci((0, 1), (1, 1)), ci((-1, 2), (0, 1))], 2, vec![t, v(1)], vec![Factor::A(v(1), v(0))], &[(0, f), (1, tg)]),
        // −ξ_2 c[J(dx_n)] / (2(ξ_n − i)²)
        res_term(vec![ci((-1, 2), (0, 1))], 2, vec![t], vec![Factor::A(NN, v(0))], &[(0, f)]),
    ]);
    let expect_xin = Expr::from_terms(vec![
        // −Σ_i ξ_i c[J(dx_i)] / (2(ξ_n − i)²)
        res_term(vec![ci((-1, 2), (0, 1))], 2, vec![v(1)], vec![Factor::A(v(1), v(0))], &[(0, f), (1, tg)]),
        // −i c[J(dx_n)] / (2(ξ_n − i)²)
        res_term(vec![ci((0, 1), (-1, 2))], 2, vec![], vec![Factor::A(NN, v(0))], &[(0, f)]),
    ]);
    let eng_xi = sm1.d_xi(t).and_then(|e| e.restrict().pi_plus()).expect("π⁺ of ∂_ξ σ₋₁");
    let eng_xin = sm1.restrict().d_xin().pi_plus().expect("π⁺ of ∂_ξn σ₋₁");
    [("π⁺∂_{ξ_2}σ₋₁".into(), eng_xi, expect_xi), ("π⁺∂_{ξ_n}σ₋₁".into(), eng_xin, expect_xin)]
}

pub fn residue_suite(_fx: &Fixture, cfg: &LemmaConfig) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x7a7a);
    let (mut idem, mut complete, mut tested) = (0, 0, 0);
    let (mut quad_n, mut quad_bad, mut worst) = (0, 0, 0.0f64);
    let q = QuadConfig { tol: 1e-12, start: 64, max: 1 << 20 };
    // π⁺ needs decay at infinity; draws without it are redrawn
    while tested < cfg.ratxi_samples {
        let f = random_ratxi(&mut rng);
        if f.decay() > -1 {
            continue;
        }
        tested += 1;
        let p = f.pi_plus()?;
        idem += usize::from(p.pi_plus()? == p);
        let rest = f.sub(&p);
        complete += usize::from(rest.plus() == 0 && p.minus() == 0);
        if f.decay() <= -2 {
            quad_n += 1;
            let exact = f.integrate_line()?;
            let (re, im) = (exact.re.to_f64(), exact.im.to_f64());
            let (num, _) = integrate_real_line(|x| f.eval_c64(num_complex::Complex64::new(x, 0.0)), &q)?;
            let scale = (re * re + im * im).sqrt().max(1.0);
            let err = ((num.re - re).powi(2) + (num.im - im).powi(2)).sqrt() / scale;
            worst = worst.max(err);
            quad_bad += usize::from(err >= 1e-8);
        }
    }
    let mut out = vec![
        check(Suite::Residue, "π⁺ idempotent", idem == tested, format!("{idem}/{tested} random rational functions")),
        check(
            Suite::Residue,
            "partial fractions complete",
            complete == tested,
            format!("{complete}/{tested}: f − π⁺f has no pole at +i and π⁺f none at −i"),
        ),
        check(
            Suite::Residue,
            "line integral vs quadrature",
            quad_bad == 0 && quad_n > 0,
            format!("{quad_n} integrable samples, worst relative error {worst:.1e}"),
        ),
    ];
    for (name, eng, expect) in pi_plus_fixture() {
        let diff = eng.sub(&expect);
        let mut same = true;
        for s in 0..cfg.points as u64 {
            let inst = modular_instance(s);
            let pt = EvalPoint { xi: unit_tangent_fp(s), xin: Fp::new(97 * s + 5), vals: &inst };
            same &= eval_expr(&diff, &pt).is_zero();
        }
        out.push(check(
            Suite::Residue,
            &format!("regression {name}"),
            same,
            format!("engine output vs hand-entered principal part at {} points", cfg.points),
        ));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// sphere

pub fn sphere_suite(cfg: &LemmaConfig) -> Result<(Vec<Check>, Vec<Inconsistency>)> {
    let zero = sphere_moment(&MultiIndex(vec![0; 5]))?;
    let sq = sphere_moment(&MultiIndex(vec![2, 0, 0, 0, 0]))?;
    let mut out = vec![
        check(Suite::Sphere, "area of S⁴", zero == omega4(), format!("{zero}")),
        check(Suite::Sphere, "∫ξ_i²", sq == PiScalar::frac_pi(8, 15, 2), format!("{sq}")),
    ];
    let total = (0..5).try_fold(PiScalar::zero(), |acc, i| {
        let mut a = vec![0; 5];
        a[i] = 2;
        sphere_moment(&MultiIndex(a)).map(|m| acc.add(&m))
    })?;
    out.push(check(Suite::Sphere, "Σ∫ξ_i² = area", total == zero, format!("{total}")));
    let alphas = multi_indices(5, 4);
    let mc = mc_sphere_moments(&alphas, cfg.mc_samples, cfg.seed);
    let mut bad = Vec::new();
    for (a, (mean, se)) in alphas.iter().zip(&mc) {
        let exact = sphere_moment(a)?.to_f64();
        if (mean - exact).abs() > 3.0 * se + 1e-12 * exact.abs().max(1.0) {
            bad.push(format!("{a}"));
        }
    }
    out.push(check(
        Suite::Sphere,
        "moments |α| <= 4 vs Monte Carlo",
        bad.is_empty(),
        format!("{} multi-indices, {} samples, outside 3σ: {:?}", alphas.len(), cfg.mc_samples, bad),
    ));
    let published = PiScalar::frac_pi(1, 6, 3);
    let flagged = published != sq;
    out.push(check(
        Suite::Sphere,
        "π³/6 second moment flagged",
        flagged,
        format!("published ∫ξ_iξ_j = π³/6 δ disagrees with the exact {sq}"),
    ));
    let inc = Inconsistency {
        quantity: "∫_{S⁴} ξ_i ξ_j".into(),
        published: "π³/6 δ_ij".into(),
        exact: format!("{sq} δ_ij"),
        numeric: mc[alphas.iter().position(|a| a.0 == [2, 0, 0, 0, 0]).expect("present")].0,
        published_numeric: published.to_f64(),
    };
    Ok((out, vec![inc]))
}

pub fn multi_indices(d: usize, max: u32) -> Vec<MultiIndex> {
    let mut out = vec![];
    let mut cur = vec![0u32; d];
    fn rec(k: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if k == cur.len() {
            out.push(MultiIndex(cur.clone()));
            return;
        }
        for e in 0..=left {
            cur[k] = e;
            rec(k + 1, left - e, cur, out);
        }
        cur[k] = 0;
    }
    rec(0, max, &mut cur, &mut out);
    out
}

// ---------------------------------------------------------------------------
// fixture and composition

pub fn fixture_suite(fx: &Fixture) -> Vec<Check> {
    oracle::audit_fixture(fx)
        .into_iter()
        .map(|l| {
            check(
                Suite::Fixture,
                &format!("{} (line {})", l.entry, l.line),
                l.ok,
                format!("fixture {:.6} vs collar metric {:.6} at h'(0) = 0.7", l.fixture, l.numeric),
            )
        })
        .collect()
}

pub fn composition_suite(fx: &Fixture, cfg: &LemmaConfig) -> Result<(Vec<Check>, CompositionReport)> {
    let rep = verify_composition(fx, cfg.points)?;
    let mut out = Vec::new();
    for c in &rep.checks {
        let name = match c.mode {
            None => "order 0: p₃q₋₃ = 1".to_string(),
            Some(m) => format!("order −1 with {m:?} σ₋₄"),
        };
        // only the derived construction is required to satisfy the rule
        let required = c.mode.is_none() || c.mode == Some(Sigma4Mode::Derived);
        out.push(check(
            Suite::Composition,
            &name,
            !required || c.pass,
            format!("nonzero residual at {}/{} points{}", c.nonzero, c.points, if required { "" } else { " (informational)" }),
        ));
    }
    // σ₋₂(D_J⁻¹) at order −1 of the first-order composition, checked numerically
    let mut worst = 0.0f64;
    for seed in 0..cfg.points as u64 {
        let inst = random_j_instance(cfg.seed * 1000 + seed);
        let ns = oracle::NumericSymbols::new(&inst);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xi: [num_complex::Complex64; 6] = std::array::from_fn(|_| rng.gen_range(-1.5..1.5f64).into());
        let printed = ns.sigma_m2(&xi);
        let composed = ns.sigma_m2_composed(&xi);
        worst = worst.max((printed - composed).max_abs() / printed.max_abs().max(1.0));
    }
    out.push(check(
        Suite::Composition,
        "order −1 of D_J·D_J⁻¹ fixes σ₋₂",
        worst < 1e-8,
        format!("σ₋₂ as implemented vs −q₋₁[σ₀q₋₁ + Σ∂_ξp₁ D_x q₋₁] at {} random points, worst relative error {worst:.1e}", cfg.points),
    ));
    Ok((out, rep))
}

/// Outcome of comparing the transcribed σ₋₄ with the derived one through the
/// end-to-end case (b) pipeline.
#[derive(Clone, Debug, Serialize)]
pub struct Sigma4Adjudication {
    pub mode: Sigma4Mode,
    /// points where the symbol differs from the derived one
    pub differing_points: usize,
    /// seeds where the oracle agrees with the case (b) value built from this mode
    pub oracle_agrees_mode: usize,
    /// seeds where the oracle agrees with the derived construction
    pub oracle_agrees_derived: usize,
    pub seeds: usize,
    pub adjudicated: bool,
}

pub fn adjudicate_sigma4(
    fx: &Fixture,
    rep: &CompositionReport,
    seeds: &[u64],
    tol: f64,
    cache: &mut OracleCache,
) -> Result<Vec<Sigma4Adjudication>> {
    let derived = compute_case(CaseId::B, fx, &CaseOptions { sigma4: Sigma4Mode::Derived })?.exact()?;
    let mut out = Vec::new();
    for (mode, differing) in &rep.mode_diff {
        let other = compute_case(CaseId::B, fx, &CaseOptions { sigma4: *mode })?.exact()?;
        let (mut am, mut ad) = (0, 0);
        for s in seeds {
            let inst = random_j_instance(*s);
            let num = cache.case(CaseId::B, &inst)?;
            am += usize::from(rel_close(other.eval_f64(&inst)?, num, tol));
            ad += usize::from(rel_close(derived.eval_f64(&inst)?, num, tol));
        }
        let n = seeds.len();
        let adjudicated = *differing == 0 || (n >= 20 && ((ad == n && am == 0) || (am == n && ad == 0)));
        out.push(Sigma4Adjudication {
            mode: *mode,
            differing_points: *differing,
            oracle_agrees_mode: am,
            oracle_agrees_derived: ad,
            seeds: n,
            adjudicated,
        });
    }
    Ok(out)
}

/// Evaluates a result at an exact `J = id` instance over the prime field.
pub fn identity_instance_fp(seed: u64) -> oracle::JInstance<Fp> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1d);
    let z = || std::array::from_fn(|_| std::array::from_fn(|_| std::array::from_fn(|_| Fp::zero())));
    oracle::JInstance {
        a: std::array::from_fn(|p| std::array::from_fn(|h| if p == h { Fp::one() } else { Fp::zero() })),
        da: z(),
        nj: z(),
        hp: Fp::new(rng.gen()),
        seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> LemmaConfig {
        LemmaConfig { words: 200, ratxi_samples: 60, mc_samples: 20_000, points: 4, relation_instances: 5, seed: 3 }
    }

    #[test]
    fn contractions_hold() {
        for c in &CONTRACTIONS {
            assert_eq!(c.verify(3).unwrap(), (true, true), "{}", c.name);
        }
    }

    #[test]
    fn a_wrong_contraction_is_rejected() {
        // dropping the minus sign must fail
        let c = &CONTRACTIONS[0];
        let lhs = trace_word(&[v(0), v(1)], &c.factors(v(0)), &c.vars(true)).unwrap();
        let mut rhs = TensorPoly::zero();
        rhs.add_term(&TensorMonomial::new(c.factors(v(1)), c.vars(false)), &PiScalar::int(TR_ID)).unwrap();
        assert_ne!(apply_relations(&lhs).unwrap(), apply_relations(&rhs).unwrap());
    }

    #[test]
    fn suites_pass() {
        let fx = Fixture::builtin();
        let r = run_lemmas(&fx, &quick()).unwrap();
        for c in &r.checks {
            assert!(c.pass, "{c:?}");
        }
        assert_eq!(r.inconsistencies.len(), 1);
    }

    #[test]
    fn multi_index_count() {
        assert_eq!(multi_indices(5, 4).len(), 126);
    }

    #[test]
    fn empty_word_batch() {
        assert!(oracle::matrix_trace_check(&[]).is_empty());
    }
}
