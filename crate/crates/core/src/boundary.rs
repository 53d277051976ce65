//! The five boundary cases: integrand assembly, Clifford trace, ξ′ and ξ_n
//! integration, reduction to normal form, and comparison with published
//! coefficient tables.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::clifford::wick_pairings;
use crate::error::{Error, Result};
use crate::fixture::Fixture;
use crate::oracle::{self, JInstance, QuadConfig};
use crate::scalar::{CPi, CRat, PiScalar, Rational};
use crate::sphere::{omega4, pairing_constant, SphereMeasure};
use crate::symbols::{build_sigma, free, sigma_m2_parts, Expr, Sigma4Mode, SigmaTag, Term, XiPart};
use crate::tensor::{apply_relations, reduce_monomial, Factor, Idx, Range, TensorMonomial, TensorPoly, VarId, N};

/// Trace of the identity on spinors in dimension six.
pub const TR_ID: i64 = 8;

#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseId {
    A1,
    A2,
    A3,
    B,
    C,
}

/// Orders in the boundary sum: `r` of the first symbol, `l` of the second,
/// `j` and `k` normal derivative counts, `alpha` the tangential multi-index.
#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize)]
pub struct CaseIndices {
    pub r: i32,
    pub l: i32,
    pub j: i32,
    pub k: i32,
    pub alpha: i32,
}

impl CaseIndices {
    pub fn admissible(&self) -> bool {
        self.r + self.l - self.k - self.j - self.alpha - 1 == -6 && self.r <= -1 && self.l <= -3
    }
}

impl CaseId {
    pub const ALL: [CaseId; 5] = [CaseId::A1, CaseId::A2, CaseId::A3, CaseId::B, CaseId::C];

    pub fn name(self) -> &'static str {
        match self {
            CaseId::A1 => "a1",
            CaseId::A2 => "a2",
            CaseId::A3 => "a3",
            CaseId::B => "b",
            CaseId::C => "c",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            CaseId::A1 => "phi1",
            CaseId::A2 => "phi2",
            CaseId::A3 => "phi3",
            CaseId::B => "phi4",
            CaseId::C => "phi5",
        }
    }

    pub fn indices(self) -> CaseIndices {
        let (r, l, j, k, alpha) = match self {
            CaseId::A1 => (-1, -3, 0, 0, 1),
            CaseId::A2 => (-1, -3, 1, 0, 0),
            CaseId::A3 => (-1, -3, 0, 1, 0),
            CaseId::B => (-1, -4, 0, 0, 0),
            CaseId::C => (-2, -3, 0, 0, 0),
        };
        CaseIndices { r, l, j, k, alpha }
    }

    /// Scalar in front of the trace integral.
    pub fn prefactor(self) -> CRat {
        match self {
            CaseId::A1 => CRat::int(-1),
            CaseId::A2 | CaseId::A3 => CRat::real(Rational::new(-1, 2)),
            CaseId::B | CaseId::C => CRat::new(Rational::zero(), Rational::from_int(-1)),
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CaseId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        CaseId::ALL
            .into_iter()
            .find(|c| c.name() == s || c.label() == s)
            .ok_or(Error::UnknownId(s))
    }
}

#[derive(Copy, Clone, Debug, Serialize)]
pub struct CaseOptions {
    pub sigma4: Sigma4Mode,
}

impl Default for CaseOptions {
    fn default() -> Self {
        CaseOptions { sigma4: Sigma4Mode::Derived }
    }
}

const TAN_DIR: u32 = 50;

/// `left × right` for a case, both restricted to `|ξ′| = 1`.
fn case_factors(case: CaseId, fx: &Fixture, opts: &CaseOptions) -> Result<(Expr, Expr)> {
    let nn = Idx::NORMAL;
    let sm1 = build_sigma(SigmaTag::Sm1, fx)?;
    let sm3 = build_sigma(SigmaTag::Sm3, fx)?;
    Ok(match case {
        CaseId::A1 => {
            let t = Idx::Var(free(TAN_DIR));
            let l = sm1.d_xi(t)?.restrict().pi_plus()?;
            let r = sm3.dx(t, fx)?.d_xin().restrict();
            (l, r)
        }
        CaseId::A2 => (sm1.dx(nn, fx)?.restrict().pi_plus()?, sm3.restrict().d_xin().d_xin()),
        CaseId::A3 => (sm1.restrict().pi_plus()?.d_xin(), sm3.dx(nn, fx)?.d_xin().restrict()),
        CaseId::B => {
            let sm4 = build_sigma(SigmaTag::Sm4(opts.sigma4), fx)?;
            (sm1.restrict().pi_plus()?, sm4.restrict().d_xin())
        }
        CaseId::C => {
            let sm2 = build_sigma(SigmaTag::Sm2, fx)?;
            (sm2.restrict().pi_plus()?, sm3.restrict().d_xin())
        }
    })
}

/// The restricted integrand of a case before trace and integration; the
/// prefactor is applied separately.
pub fn case_integrand(case: CaseId, fx: &Fixture, opts: &CaseOptions) -> Result<Expr> {
    let (l, r) = case_factors(case, fx, opts)?;
    let prod = l.mul(&r)?;
    Ok(match case {
        CaseId::A1 => prod.bind(free(TAN_DIR), Range::Tangent),
        _ => prod,
    })
}

/// Result of one case or a sum of cases, in the bookkeeping normalization:
/// tr[id] = 8 included; the order-zero sphere moment taken as 1 so the area
/// of S⁴ stays factored out of the `m0` part; higher moments at their
/// surface values in `rest`.
#[derive(Clone, Debug, Serialize)]
pub struct PhiResult {
    pub label: String,
    pub cases: Vec<CaseId>,
    pub m0: TensorPoly,
    pub rest: TensorPoly,
}

impl PhiResult {
    pub fn zero(label: &str) -> PhiResult {
        PhiResult { label: label.into(), cases: vec![], m0: TensorPoly::zero(), rest: TensorPoly::zero() }
    }

    /// Coefficients with the area of S⁴ factored out of the order-zero part.
    pub fn bookkeeping(&self) -> TensorPoly {
        self.m0.add(&self.rest)
    }

    /// Coefficients per unit of tr[id].
    pub fn per_trace(&self) -> TensorPoly {
        self.bookkeeping().scale(&Rational::new(1, TR_ID))
    }

    /// True boundary density with the given value for the area of S⁴.
    pub fn exact_with(&self, omega: &PiScalar) -> Result<TensorPoly> {
        Ok(self.m0.mul_scalar(omega)?.add(&self.rest))
    }

    pub fn exact(&self) -> Result<TensorPoly> {
        self.exact_with(&omega4())
    }

    pub fn add(&self, o: &PhiResult) -> PhiResult {
        let mut cases = self.cases.clone();
        cases.extend(o.cases.iter().copied());
        cases.sort();
        PhiResult {
            label: format!("{}+{}", self.label, o.label),
            cases,
            m0: self.m0.add(&o.m0),
            rest: self.rest.add(&o.rest),
        }
    }

    pub fn relabel(mut self, label: &str) -> PhiResult {
        self.label = label.into();
        self
    }
}

pub fn sum_phi(parts: &[PhiResult], label: &str) -> PhiResult {
    let mut out = PhiResult::zero(label);
    for p in parts {
        out = out.add(p);
    }
    out.label = label.into();
    out
}

// ---------------------------------------------------------------------------
// trace and integration

/// Eliminates Kronecker deltas. Returns the multiplicity from summed-out
/// unused indices and the reduced factor list, or `None` if the term vanishes.
fn resolve_deltas(mut factors: Vec<Factor>, mut vars: BTreeMap<VarId, Range>) -> Option<(i64, TensorMonomial)> {
    while let Some(pos) = factors.iter().position(|f| matches!(f, Factor::Delta(..))) {
        let Factor::Delta(x, y) = factors.swap_remove(pos) else { unreachable!() };
        let (v, by) = match (x, y) {
            (Idx::Lit(a), Idx::Lit(b)) => {
                if a != b {
                    return None;
                }
                continue;
            }
            (Idx::Var(v), Idx::Var(u)) if v == u => continue,
            (Idx::Var(v), Idx::Var(u)) => {
                let rv = vars.remove(&v)?;
                let ru = vars.get_mut(&u)?;
                *ru = ru.meet(rv);
                (v, Idx::Var(u))
            }
            (Idx::Var(v), Idx::Lit(k)) | (Idx::Lit(k), Idx::Var(v)) => {
                if vars.remove(&v)? == Range::Tangent && k == N {
                    return None;
                }
                (v, Idx::Lit(k))
            }
        };
        let sub = |i: Idx| if i == Idx::Var(v) { by } else { i };
        for f in factors.iter_mut() {
            *f = f.map_idx(&sub);
        }
    }
    let mut used = std::collections::BTreeSet::new();
    for f in &factors {
        for s in f.slots() {
            if let Idx::Var(u) = s {
                used.insert(u);
            }
        }
    }
    let mut mult = 1i64;
    vars.retain(|u, r| {
        if used.contains(u) {
            true
        } else {
            mult *= r.size() as i64;
            false
        }
    });
    Some((mult, TensorMonomial::new(factors, vars)))
}

/// Relabels bound indices by first occurrence after sorting factors by shape;
/// a cheap key that merges most duplicate monomials before full reduction.
fn quick_key(m: &TensorMonomial) -> TensorMonomial {
    let shape = |f: &Factor| {
        f.normalized().map_idx(&|i| match i {
            Idx::Var(_) => Idx::Var(0),
            l => l,
        })
    };
    let mut fs: Vec<Factor> = m.factors.iter().map(Factor::normalized).collect();
    fs.sort_by_key(shape);
    let mut label: BTreeMap<VarId, VarId> = BTreeMap::new();
    for f in &fs {
        for s in f.slots() {
            if let Idx::Var(v) = s {
                let next = label.len() as VarId;
                label.entry(v).or_insert(next);
            }
        }
    }
    let map = |i: Idx| match i {
        Idx::Var(v) => Idx::Var(label[&v]),
        l => l,
    };
    let mut factors: Vec<Factor> = fs.iter().map(|f| f.map_idx(&map).normalized()).collect();
    factors.sort();
    let vars = m.vars.iter().map(|(v, r)| (label[v], *r)).collect();
    TensorMonomial::new(factors, vars)
}

/// Exact Clifford trace and ξ′, ξ_n integration of a restricted expression
/// times `prefactor`. Returns the order-zero-moment part and the rest; fails
/// with [`Error::ImaginaryResidue`] if an imaginary coefficient survives.
pub fn integrate_expr(e: &Expr, prefactor: &CRat, strip_odd: bool) -> Result<(TensorPoly, TensorPoly)> {
    let mut buckets: [HashMap<TensorMonomial, CPi>; 2] = [HashMap::new(), HashMap::new()];
    let consts: Vec<PiScalar> =
        (0..=4).map(|m| pairing_constant(m, SphereMeasure::Bookkeeping)).collect::<Result<_>>()?;
    for t in &e.terms {
        if t.cliff.len() % 2 == 1 || (strip_odd && t.xi.len() % 2 == 1) {
            continue;
        }
        let XiPart::Res(rx) = &t.xi_part else {
            return Err(Error::Unsupported("integration needs |ξ'| = 1".into()));
        };
        if t.xps != 0 {
            return Err(Error::Unsupported("|ξ'| power left after restriction".into()));
        }
        let w = rx.integrate_line()?.mul_crat(prefactor);
        if w.is_zero() {
            continue;
        }
        accumulate_term(t, &w, &consts, &mut buckets)?;
    }
    let mut out = [TensorPoly::zero(), TensorPoly::zero()];
    for (b, bucket) in buckets.into_iter().enumerate() {
        let mut acc: BTreeMap<TensorMonomial, CPi> = BTreeMap::new();
        for (m, c) in bucket {
            if c.is_zero() {
                continue;
            }
            for (r, nf) in reduce_monomial(&m)? {
                let e = acc.entry(nf).or_default();
                *e = e.add(&c.mul_crat(&CRat::real(r)));
            }
        }
        for (m, c) in acc {
            let re = c.into_real()?;
            out[b].add_canonical(m, &re);
        }
    }
    let [m0, rest] = out;
    Ok((m0, rest))
}

fn accumulate_term(
    t: &Term,
    w: &CPi,
    consts: &[PiScalar],
    buckets: &mut [HashMap<TensorMonomial, CPi>; 2],
) -> Result<()> {
    let mc = t.cliff.len() / 2;
    let mx = t.xi.len() / 2;
    let cliff_sign = if mc.is_multiple_of(2) { TR_ID } else { -TR_ID };
    for pc in wick_pairings(t.cliff.len()) {
        for px in wick_pairings(t.xi.len()) {
            let mut factors = t.tensor.clone();
            factors.extend(pc.pairs.iter().map(|(i, j)| Factor::Delta(t.cliff[*i], t.cliff[*j])));
            factors.extend(px.pairs.iter().map(|(i, j)| Factor::Delta(t.xi[*i], t.xi[*j])));
            let Some((mult, m)) = resolve_deltas(factors, t.vars.clone()) else {
                continue;
            };
            let r = Rational::from_int(cliff_sign * pc.sign as i64 * mult);
            let c = w.mul_real(&consts[mx].scale(&r))?;
            let bucket = &mut buckets[usize::from(mx > 0)];
            let e = bucket.entry(quick_key(&m)).or_default();
            *e = e.add(&c);
        }
    }
    Ok(())
}

/// `tr[∏ c(dx_k) · ∏ tensor factors]` summed over the bound indices, through
/// the same pairing and reduction steps the pipeline uses.
pub fn trace_word(cliff: &[Idx], tensor: &[Factor], vars: &BTreeMap<VarId, Range>) -> Result<TensorPoly> {
    let mut out = TensorPoly::zero();
    if cliff.len() % 2 == 1 {
        return Ok(out);
    }
    let sign = if (cliff.len() / 2).is_multiple_of(2) { TR_ID } else { -TR_ID };
    for pc in wick_pairings(cliff.len()) {
        let mut factors = tensor.to_vec();
        factors.extend(pc.pairs.iter().map(|(i, j)| Factor::Delta(cliff[*i], cliff[*j])));
        let Some((mult, m)) = resolve_deltas(factors, vars.clone()) else {
            continue;
        };
        let c = Rational::from_int(sign * pc.sign as i64 * mult);
        for (r, nf) in reduce_monomial(&m)? {
            out.add_canonical(nf, &PiScalar::rational(&c * &r));
        }
    }
    Ok(out)
}

fn integrate_to_phi(label: &str, cases: Vec<CaseId>, e: &Expr, prefactor: &CRat) -> Result<PhiResult> {
    let (m0, rest) = integrate_expr(e, prefactor, true)?;
    Ok(PhiResult { label: label.into(), cases, m0, rest })
}

pub fn compute_case(case: CaseId, fx: &Fixture, opts: &CaseOptions) -> Result<PhiResult> {
    let e = case_integrand(case, fx, opts)?;
    integrate_to_phi(case.label(), vec![case], &e, &case.prefactor())
}

/// The three parts of case c from the split of σ₋₂(D_J⁻¹) into the σ₀ term,
/// the derivative terms of J and c(dx), and the metric term.
pub fn compute_c_parts(fx: &Fixture) -> Result<[PhiResult; 3]> {
    let sm3 = build_sigma(SigmaTag::Sm3, fx)?.restrict().d_xin();
    let parts = sigma_m2_parts(fx)?;
    let mut out = Vec::new();
    for (k, p) in parts.iter().enumerate() {
        let e = p.restrict().pi_plus()?.mul(&sm3)?;
        out.push(integrate_to_phi(&format!("phi5-a{}", k + 1), vec![CaseId::C], &e, &CaseId::C.prefactor())?);
    }
    Ok(out.try_into().expect("three parts"))
}

/// Case b with π⁺σ₋₁ split into its tangential half (terms carrying ξ′) and
/// its normal half.
pub fn case_b_halves(fx: &Fixture, opts: &CaseOptions) -> Result<(PhiResult, PhiResult)> {
    let (l, r) = case_factors(CaseId::B, fx, opts)?;
    let (b1, b2): (Vec<Term>, Vec<Term>) = l.terms.into_iter().partition(|t| !t.xi.is_empty());
    let pre = CaseId::B.prefactor();
    let h1 = integrate_to_phi("phi4-b1", vec![CaseId::B], &Expr { terms: b1 }.mul(&r)?, &pre)?;
    let h2 = integrate_to_phi("phi4-b2", vec![CaseId::B], &Expr { terms: b2 }.mul(&r)?, &pre)?;
    Ok((h1, h2))
}

/// Runs the integration with and without dropping odd ξ′ monomials first.
pub fn odd_moment_check(case: CaseId, fx: &Fixture, opts: &CaseOptions) -> Result<bool> {
    let e = case_integrand(case, fx, opts)?;
    let a = integrate_expr(&e, &case.prefactor(), true)?;
    let b = integrate_expr(&e, &case.prefactor(), false)?;
    Ok(a == b)
}

// ---------------------------------------------------------------------------
// published targets

/// How a target table is normalized.
#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetUnits {
    /// Coefficients of tr[id]·Ω₄ (the per-case tables).
    PerTrace,
    /// Coefficients with tr[id] = 8 already multiplied in.
    Total,
}

/// Which numeric quantity a target is checked against.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scope {
    Cases(Vec<CaseId>),
    CPart(usize),
}

pub struct TargetSpec {
    pub id: &'static str,
    pub units: TargetUnits,
    pub src: &'static str,
}

macro_rules! target {
    ($id:literal, $u:expr) => {
        TargetSpec { id: $id, units: $u, src: include_str!(concat!("../fixtures/targets/", $id, ".txt")) }
    };
}

pub const TARGETS: [TargetSpec; 11] = [
    target!("phi1", TargetUnits::PerTrace),
    target!("phi2", TargetUnits::PerTrace),
    target!("phi3", TargetUnits::PerTrace),
    target!("phi123", TargetUnits::PerTrace),
    target!("phi4", TargetUnits::PerTrace),
    target!("phi5-a1", TargetUnits::PerTrace),
    target!("phi5-a2", TargetUnits::PerTrace),
    target!("phi5-a3", TargetUnits::PerTrace),
    target!("phi5", TargetUnits::PerTrace),
    target!("phi-total", TargetUnits::PerTrace),
    target!("boundary-theorem", TargetUnits::Total),
];

pub fn target_scope(id: &str) -> Result<Scope> {
    use CaseId::*;
    Ok(match id {
        "phi1" => Scope::Cases(vec![A1]),
        "phi2" => Scope::Cases(vec![A2]),
        "phi3" => Scope::Cases(vec![A3]),
        "phi123" => Scope::Cases(vec![A1, A2, A3]),
        "phi4" => Scope::Cases(vec![B]),
        "phi5" => Scope::Cases(vec![C]),
        "phi5-a1" => Scope::CPart(0),
        "phi5-a2" => Scope::CPart(1),
        "phi5-a3" => Scope::CPart(2),
        "phi-total" | "boundary-theorem" => Scope::Cases(CaseId::ALL.to_vec()),
        _ => return Err(Error::UnknownId(id.into())),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TargetLine {
    pub monomial: TensorMonomial,
    pub coeff: PiScalar,
    pub source: String,
    pub line: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Target {
    pub id: String,
    pub file: String,
    pub units: TargetUnits,
    pub lines: Vec<TargetLine>,
}

impl Target {
    pub fn parse(id: &str, units: TargetUnits, src: &str, file: &str) -> Result<Target> {
        let err = |line: usize, msg: String| Error::Fixture { file: file.into(), line, msg };
        let mut lines = Vec::new();
        for (i, raw) in src.lines().enumerate() {
            let text = raw.split('#').next().unwrap_or("").trim();
            if text.is_empty() {
                continue;
            }
            let parts: Vec<&str> = text.split('|').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(err(i + 1, format!("expected `monomial | coefficient | source`, got `{text}`")));
            }
            let monomial = TensorMonomial::parse(parts[0]).map_err(|e| err(i + 1, e.to_string()))?;
            let coeff: PiScalar = parts[1].parse().map_err(|e: Error| err(i + 1, e.to_string()))?;
            lines.push(TargetLine { monomial, coeff, source: parts[2].into(), line: i + 1 });
        }
        Ok(Target { id: id.into(), file: file.into(), units, lines })
    }

    pub fn builtin(id: &str) -> Result<Target> {
        let spec = TARGETS.iter().find(|t| t.id == id).ok_or_else(|| Error::UnknownId(id.into()))?;
        Target::parse(id, spec.units, spec.src, &format!("fixtures/targets/{id}.txt"))
    }

    /// Loads `<dir>/<id>.txt`, falling back to the shipped table.
    pub fn load(id: &str, dir: Option<&Path>) -> Result<Target> {
        let spec = TARGETS.iter().find(|t| t.id == id).ok_or_else(|| Error::UnknownId(id.into()))?;
        match dir.map(|d| d.join(format!("{id}.txt"))) {
            Some(p) if p.exists() => {
                let src = std::fs::read_to_string(&p)
                    .map_err(|e| Error::Fixture { file: p.display().to_string(), line: 0, msg: e.to_string() })?;
                Target::parse(id, spec.units, &src, &p.display().to_string())
            }
            _ => Target::builtin(id),
        }
    }

    pub fn poly(&self) -> Result<TensorPoly> {
        let mut p = TensorPoly::zero();
        for l in &self.lines {
            p.add_term(&l.monomial, &l.coeff)?;
        }
        Ok(p)
    }

    /// The published table as a true boundary density, reading every π¹
    /// coefficient as carrying the S⁴ area `omega`.
    pub fn exact_with(&self, omega: &PiScalar) -> Result<TensorPoly> {
        let mut p = TensorPoly::zero();
        for l in &self.lines {
            p.add_term(&l.monomial, &self.coeff_exact(&l.coeff, omega)?)?;
        }
        Ok(p)
    }

    fn coeff_exact(&self, c: &PiScalar, omega: &PiScalar) -> Result<PiScalar> {
        let mut out = PiScalar::zero();
        for (k, r) in c.terms() {
            let m = PiScalar::monomial(r.clone(), k)?;
            out = out.add(&if k == 1 { m.mul(omega)? } else { m });
        }
        Ok(match self.units {
            TargetUnits::PerTrace => out.scale(&Rational::from_int(TR_ID)),
            TargetUnits::Total => out,
        })
    }

    /// The literal reading with the S⁴ area multiplying every coefficient.
    pub fn literal_with(&self, omega: &PiScalar) -> Result<TensorPoly> {
        let p = self.poly()?.mul_scalar(omega)?;
        Ok(match self.units {
            TargetUnits::PerTrace => p.scale(&Rational::from_int(TR_ID)),
            TargetUnits::Total => p,
        })
    }
}

// ---------------------------------------------------------------------------
// comparison

#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum DiffClass {
    Match,
    Mismatch,
    EngineOnly,
    PaperOnly,
}

impl fmt::Display for DiffClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DiffClass::Match => "MATCH",
            DiffClass::Mismatch => "MISMATCH",
            DiffClass::EngineOnly => "ENGINE-ONLY",
            DiffClass::PaperOnly => "PAPER-ONLY",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DiffEntry {
    pub monomial: String,
    pub class: DiffClass,
    pub engine: PiScalar,
    pub paper: PiScalar,
    pub sources: Vec<String>,
}

#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Engine,
    Paper,
    Both,
    Neither,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeedEvidence {
    pub seed: u64,
    pub oracle: f64,
    pub engine: f64,
    pub paper: f64,
    pub engine_ok: bool,
    pub paper_ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Adjudication {
    pub tolerance: f64,
    pub verdict: Verdict,
    pub seeds: Vec<SeedEvidence>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Comparison {
    pub target: String,
    pub file: String,
    pub units: TargetUnits,
    pub entries: Vec<DiffEntry>,
    /// Published rows whose monomials reduce to zero under the J-relations.
    pub vanishing_rows: Vec<String>,
    pub adjudication: Option<Adjudication>,
}

impl Comparison {
    pub fn all_match(&self) -> bool {
        self.entries.iter().all(|e| e.class == DiffClass::Match)
    }

    pub fn count(&self, c: DiffClass) -> usize {
        self.entries.iter().filter(|e| e.class == c).count()
    }

    /// Mismatches are explained when the oracle sides with the engine alone.
    pub fn explained(&self) -> bool {
        self.all_match() || matches!(&self.adjudication, Some(a) if a.verdict == Verdict::Engine)
    }
}

pub fn engine_in_units(result: &PhiResult, units: TargetUnits) -> TensorPoly {
    match units {
        TargetUnits::PerTrace => result.per_trace(),
        TargetUnits::Total => result.bookkeeping(),
    }
}

/// Per-monomial comparison in the normal form of the J-relations.
pub fn compare_to_paper(result: &PhiResult, target: &Target) -> Result<Comparison> {
    let engine = apply_relations(&engine_in_units(result, target.units))?;
    let mut paper = TensorPoly::zero();
    let mut sources: BTreeMap<TensorMonomial, Vec<String>> = BTreeMap::new();
    let mut vanishing_rows = Vec::new();
    for l in &target.lines {
        let mut row = TensorPoly::zero();
        row.add_term(&l.monomial, &l.coeff)?;
        let row = apply_relations(&row)?;
        if row.is_zero() {
            vanishing_rows.push(format!("{} (line {})", l.source, l.line));
        }
        for (m, _) in row.terms() {
            let s = sources.entry(m.clone()).or_default();
            if !s.contains(&l.source) {
                s.push(l.source.clone());
            }
        }
        paper = paper.add(&row);
    }
    let mut keys: Vec<TensorMonomial> = engine.terms().map(|(m, _)| m.clone()).collect();
    keys.extend(paper.terms().map(|(m, _)| m.clone()).filter(|m| !engine.terms().any(|(e, _)| e == m)));
    keys.extend(sources.keys().filter(|m| !keys.contains(m)).cloned().collect::<Vec<_>>());
    keys.sort();
    keys.dedup();
    let mut entries = Vec::new();
    for m in keys {
        let e = engine.coeff(&m)?;
        let p = paper.coeff(&m)?;
        let class = match (e.is_zero(), p.is_zero()) {
            (true, true) => DiffClass::Match,
            _ if e == p => DiffClass::Match,
            (false, true) => DiffClass::EngineOnly,
            (true, false) => DiffClass::PaperOnly,
            _ => DiffClass::Mismatch,
        };
        entries.push(DiffEntry {
            monomial: m.text(),
            class,
            engine: e,
            paper: p,
            sources: sources.get(&m).cloned().unwrap_or_default(),
        });
    }
    Ok(Comparison {
        target: target.id.clone(),
        file: target.file.clone(),
        units: target.units,
        entries,
        vanishing_rows,
        adjudication: None,
    })
}

// ---------------------------------------------------------------------------
// oracle adjudication

/// Numeric end-to-end values, memoized per (scope, seed).
#[derive(Default)]
pub struct OracleCache {
    cases: HashMap<(CaseId, u64), f64>,
    parts: HashMap<(usize, u64), f64>,
    quad: QuadConfig,
}

impl OracleCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_quad(quad: QuadConfig) -> Self {
        OracleCache { quad, ..Self::default() }
    }

    pub fn case(&mut self, case: CaseId, inst: &JInstance<f64>) -> Result<f64> {
        if let Some(v) = self.cases.get(&(case, inst.seed)) {
            return Ok(*v);
        }
        let v = oracle::numeric_case_with(case, inst, &oracle::sphere_rule_s4(), &self.quad)?.value;
        self.cases.insert((case, inst.seed), v);
        Ok(v)
    }

    pub fn scope(&mut self, scope: &Scope, inst: &JInstance<f64>) -> Result<f64> {
        match scope {
            Scope::Cases(cs) => cs.iter().map(|c| self.case(*c, inst)).sum(),
            Scope::CPart(k) => {
                if let Some(v) = self.parts.get(&(*k, inst.seed)) {
                    return Ok(*v);
                }
                let v = oracle::numeric_c_part_with(*k, inst, &self.quad)?.value;
                self.parts.insert((*k, inst.seed), v);
                Ok(v)
            }
        }
    }

    /// Fills the case cache for several seeds in parallel.
    pub fn prefetch(&mut self, cases: &[CaseId], seeds: &[u64]) -> Result<()> {
        use rayon::prelude::*;
        let jobs: Vec<(CaseId, u64)> = cases
            .iter()
            .flat_map(|c| seeds.iter().map(move |s| (*c, *s)))
            .filter(|k| !self.cases.contains_key(k))
            .collect();
        let (rule, q) = (oracle::sphere_rule_s4(), self.quad);
        let done: Vec<Result<((CaseId, u64), f64)>> = jobs
            .par_iter()
            .map(|(c, s)| Ok(((*c, *s), oracle::numeric_case_with(*c, &oracle::random_j_instance(*s), &rule, &q)?.value)))
            .collect();
        for d in done {
            let (k, v) = d?;
            self.cases.insert(k, v);
        }
        Ok(())
    }
}

pub fn rel_close(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() / y.abs().max(1.0) < tol
}

/// Evaluates engine and published totals against the numeric pipeline on
/// `seeds` random instances.
pub fn adjudicate(
    result: &PhiResult,
    target: &Target,
    seeds: &[u64],
    tol: f64,
    cache: &mut OracleCache,
) -> Result<Adjudication> {
    let scope = target_scope(&target.id)?;
    let engine = result.exact()?;
    let paper = target.exact_with(&omega4())?;
    let mut ev = Vec::new();
    for &seed in seeds {
        let inst = oracle::random_j_instance(seed);
        let o = cache.scope(&scope, &inst)?;
        let e = engine.eval_f64(&inst)?;
        let p = paper.eval_f64(&inst)?;
        ev.push(SeedEvidence { seed, oracle: o, engine: e, paper: p, engine_ok: rel_close(o, e, tol), paper_ok: rel_close(o, p, tol) });
    }
    let e_ok = ev.iter().all(|s| s.engine_ok);
    let p_ok = ev.iter().all(|s| s.paper_ok);
    let verdict = match (e_ok, p_ok) {
        (true, false) => Verdict::Engine,
        (false, true) => Verdict::Paper,
        (true, true) => Verdict::Both,
        (false, false) => Verdict::Neither,
    };
    Ok(Adjudication { tolerance: tol, verdict, seeds: ev })
}

/// Which value of the S⁴ area makes a published table agree with the engine.
#[derive(Clone, Debug, Serialize)]
pub struct OmegaRow {
    pub convention: String,
    pub omega: PiScalar,
    pub matched: usize,
    pub total: usize,
}

pub fn omega_check(result: &PhiResult, target: &Target) -> Result<Vec<OmegaRow>> {
    let mut rows = Vec::new();
    let cands = [("S4 area 8π²/3", omega4()), ("2π²", PiScalar::frac_pi(2, 1, 2))];
    for (name, om) in &cands {
        let engine = apply_relations(&result.exact_with(om)?)?;
        for (reading, paper) in [("split", target.exact_with(om)?), ("literal", target.literal_with(om)?)] {
            let paper = apply_relations(&paper)?;
            let (matched, total) = count_agreement(&engine, &paper)?;
            rows.push(OmegaRow { convention: format!("{reading}, Ω = {name}"), omega: om.clone(), matched, total });
        }
    }
    Ok(rows)
}

pub(crate) fn count_agreement(a: &TensorPoly, b: &TensorPoly) -> Result<(usize, usize)> {
    let mut keys: Vec<&TensorMonomial> = a.terms().map(|(m, _)| m).collect();
    keys.extend(b.terms().map(|(m, _)| m));
    keys.sort();
    keys.dedup();
    let mut matched = 0;
    for m in &keys {
        if a.coeff(m)? == b.coeff(m)? {
            matched += 1;
        }
    }
    Ok((matched, keys.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fx() -> Fixture {
        Fixture::builtin()
    }

    #[test]
    fn case_indices_admissible() {
        for c in CaseId::ALL {
            assert!(c.indices().admissible(), "{c}");
            assert_eq!(c.to_string().parse::<CaseId>().unwrap(), c);
            assert_eq!(c.label().parse::<CaseId>().unwrap(), c);
        }
        assert!("d".parse::<CaseId>().is_err());
    }

    #[test]
    fn deltas_resolve() {
        let mut vars = BTreeMap::new();
        vars.insert(0, Range::Tangent);
        vars.insert(1, Range::Full);
        vars.insert(2, Range::Full);
        let f = vec![Factor::A(Idx::Var(0), Idx::Var(1)), Factor::Delta(Idx::Var(1), Idx::Var(2))];
        let (mult, m) = resolve_deltas(f, vars.clone()).unwrap();
        assert_eq!(mult, 1);
        assert_eq!(m.vars.len(), 2);
        // tangential index pinned to n vanishes
        let f = vec![Factor::A(Idx::Var(0), Idx::Var(1)), Factor::Delta(Idx::Var(0), Idx::NORMAL)];
        assert!(resolve_deltas(f, vars.clone()).is_none());
        // an index summed against nothing counts its range
        let f = vec![Factor::Delta(Idx::Var(0), Idx::Var(1))];
        let (mult, m) = resolve_deltas(f, vars).unwrap();
        assert_eq!(mult, 5 * 6);
        assert!(m.factors.is_empty());
    }

    #[test]
    fn targets_parse() {
        for t in &TARGETS {
            let tg = Target::builtin(t.id).unwrap();
            assert!(!tg.lines.is_empty());
            target_scope(t.id).unwrap();
        }
        assert!(Target::builtin("nope").is_err());
        let bad = Target::parse("x", TargetUnits::PerTrace, "a[1,2] | pi", "x.txt");
        assert!(matches!(bad, Err(Error::Fixture { line: 1, .. })));
    }

    #[test]
    fn empty_comparison_matches() {
        let t = Target { id: "phi1".into(), file: String::new(), units: TargetUnits::PerTrace, lines: vec![] };
        let c = compare_to_paper(&PhiResult::zero("z"), &t).unwrap();
        assert!(c.all_match() && c.entries.is_empty());
    }

    #[test]
    fn phi1_matches_published() {
        let r = compute_case(CaseId::A1, &fx(), &CaseOptions::default()).unwrap();
        let c = compare_to_paper(&r, &Target::builtin("phi1").unwrap()).unwrap();
        assert!(c.all_match(), "{:#?}", c.entries);
    }

    #[test]
    fn sum_of_zeros_is_zero() {
        let z = sum_phi(&[PhiResult::zero("a"), PhiResult::zero("b")], "s");
        assert!(z.bookkeeping().is_zero());
    }

    #[test]
    fn stray_imaginary_factor_is_caught() {
        let e = case_integrand(CaseId::C, &fx(), &CaseOptions::default()).unwrap();
        assert!(matches!(integrate_expr(&e, &CRat::one(), true), Err(Error::ImaginaryResidue(_))));
    }
}
