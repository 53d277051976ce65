//! Index monomials in the entries `a[p,h]` of J, their derivatives
//! `d[j]a[p,h]`, the components `nj[α,β,γ]` of ∇J, and `h'(0)`.
//!
//! Relations used by [`apply_relations`]:
//! * `a` is symmetric and `Σ_p a[l,p] a[p,j] = δ_lj`;
//! * each `d[j]a` is symmetric and `a·d[j]a = -d[j]a·a`;
//! * a tangential sum equals the full sum minus its normal addend.
//!
//! Viewing `a` and `d[j]a` as matrices, every monomial is a set of matrix
//! chains (or closed cycles) between terminal indices. In a chain all `a`s can
//! be moved to one end, where pairs cancel; the orientation ambiguity is
//! resolved by taking the minimal canonical form, and a monomial whose two
//! admissible rewrites coincide with opposite signs vanishes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::scalar::{PiScalar, Rational};

/// Manifold dimension.
pub const N: u8 = 6;

pub type VarId = u32;

#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize)]
pub enum Range {
    /// `1..n`
    Full,
    /// `1..n-1`
    Tangent,
}

impl Range {
    pub fn size(self) -> u8 {
        match self {
            Range::Full => N,
            Range::Tangent => N - 1,
        }
    }

    pub fn contains(self, k: u8) -> bool {
        match self {
            Range::Full => (1..=N).contains(&k),
            Range::Tangent => (1..N).contains(&k),
        }
    }

    pub fn meet(self, o: Range) -> Range {
        if self == Range::Tangent || o == Range::Tangent {
            Range::Tangent
        } else {
            Range::Full
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Idx {
    Var(VarId),
    Lit(u8),
}

impl Idx {
    pub const NORMAL: Idx = Idx::Lit(N);

    pub fn var(self) -> Option<VarId> {
        match self {
            Idx::Var(v) => Some(v),
            Idx::Lit(_) => None,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Factor {
    /// `a[p,h]`, symmetric
    A(Idx, Idx),
    /// `d[dir]a[p,h]`, symmetric in `(p,h)`
    DA(Idx, Idx, Idx),
    /// `g((∇_{e_α}J)e_β, e_γ)`, no symmetry assumed
    NJ(Idx, Idx, Idx),
    HPrime,
    Delta(Idx, Idx),
}

fn sorted(a: Idx, b: Idx) -> (Idx, Idx) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Factor {
    pub fn normalized(&self) -> Factor {
        match *self {
            Factor::A(u, v) => {
                let (u, v) = sorted(u, v);
                Factor::A(u, v)
            }
            Factor::DA(d, u, v) => {
                let (u, v) = sorted(u, v);
                Factor::DA(d, u, v)
            }
            Factor::Delta(u, v) => {
                let (u, v) = sorted(u, v);
                Factor::Delta(u, v)
            }
            ref f => f.clone(),
        }
    }

    pub fn slots(&self) -> Vec<Idx> {
        match *self {
            Factor::A(u, v) | Factor::Delta(u, v) => vec![u, v],
            Factor::DA(d, u, v) | Factor::NJ(d, u, v) => vec![d, u, v],
            Factor::HPrime => vec![],
        }
    }

    pub fn map_idx(&self, f: &impl Fn(Idx) -> Idx) -> Factor {
        match *self {
            Factor::A(u, v) => Factor::A(f(u), f(v)),
            Factor::DA(d, u, v) => Factor::DA(f(d), f(u), f(v)),
            Factor::NJ(a, b, c) => Factor::NJ(f(a), f(b), f(c)),
            Factor::HPrime => Factor::HPrime,
            Factor::Delta(u, v) => Factor::Delta(f(u), f(v)),
        }
    }

    fn is_matrix(&self) -> bool {
        matches!(self, Factor::A(..) | Factor::DA(..))
    }

    /// Slot positions of the two matrix indices.
    fn matrix_slots(&self) -> Option<(usize, usize)> {
        match self {
            Factor::A(..) => Some((0, 1)),
            Factor::DA(..) => Some((1, 2)),
            _ => None,
        }
    }
}

/// Numeric values of the tensor symbols at the boundary point (1-based indices).
pub trait TensorValues<F: Field> {
    fn a(&self, p: u8, h: u8) -> F;
    fn da(&self, dir: u8, p: u8, h: u8) -> F;
    fn nj(&self, alpha: u8, beta: u8, gamma: u8) -> F;
    fn hp(&self) -> F;
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct TensorMonomial {
    pub factors: Vec<Factor>,
    pub vars: BTreeMap<VarId, Range>,
}

impl TensorMonomial {
    pub fn new(factors: Vec<Factor>, vars: BTreeMap<VarId, Range>) -> Self {
        TensorMonomial { factors, vars }
    }

    pub fn one() -> Self {
        TensorMonomial::default()
    }

    fn occurrences(&self) -> BTreeMap<VarId, Vec<(usize, usize)>> {
        let mut occ: BTreeMap<VarId, Vec<(usize, usize)>> = BTreeMap::new();
        for (fi, f) in self.factors.iter().enumerate() {
            for (si, s) in f.slots().into_iter().enumerate() {
                if let Idx::Var(v) = s {
                    occ.entry(v).or_default().push((fi, si));
                }
            }
        }
        occ
    }

    pub fn check(&self) -> Result<()> {
        for (v, o) in self.occurrences() {
            if !self.vars.contains_key(&v) {
                return Err(Error::FreeIndex(format!("#{v}")));
            }
            if o.len() > 2 {
                return Err(Error::IndexMultiplicity(format!("#{v}"), o.len()));
            }
        }
        Ok(())
    }

    pub fn substitute(&self, v: VarId, by: Idx) -> TensorMonomial {
        let f = |i: Idx| if i == Idx::Var(v) { by } else { i };
        let mut vars = self.vars.clone();
        vars.remove(&v);
        TensorMonomial {
            factors: self.factors.iter().map(|x| x.map_idx(&f)).collect(),
            vars,
        }
    }

    pub fn hprime_power(&self) -> usize {
        self.factors.iter().filter(|f| matches!(f, Factor::HPrime)).count()
    }

    pub fn max_var(&self) -> VarId {
        let from_vars = self.vars.keys().next_back().copied().unwrap_or(0);
        let from_slots = self
            .factors
            .iter()
            .flat_map(|f| f.slots())
            .filter_map(Idx::var)
            .max()
            .unwrap_or(0);
        from_vars.max(from_slots)
    }

    /// Literal evaluation, summing every bound index over its range.
    pub fn eval<F: Field>(&self, vals: &impl TensorValues<F>) -> Result<F> {
        self.check()?;
        let vars: Vec<(VarId, Range)> = self.vars.iter().map(|(v, r)| (*v, *r)).collect();
        let mut assign: BTreeMap<VarId, u8> = BTreeMap::new();
        let mut total = F::zero();
        eval_rec(&self.factors, &vars, 0, &mut assign, vals, &mut total);
        Ok(total)
    }
}

fn eval_rec<F: Field>(
    factors: &[Factor],
    vars: &[(VarId, Range)],
    k: usize,
    assign: &mut BTreeMap<VarId, u8>,
    vals: &impl TensorValues<F>,
    total: &mut F,
) {
    if k == vars.len() {
        let lit = |i: Idx| match i {
            Idx::Lit(x) => x,
            Idx::Var(v) => assign[&v],
        };
        let mut prod = F::one();
        for f in factors {
            let x = match *f {
                Factor::A(u, v) => vals.a(lit(u), lit(v)),
                Factor::DA(d, u, v) => vals.da(lit(d), lit(u), lit(v)),
                Factor::NJ(a, b, c) => vals.nj(lit(a), lit(b), lit(c)),
                Factor::HPrime => vals.hp(),
                Factor::Delta(u, v) => {
                    if lit(u) == lit(v) {
                        F::one()
                    } else {
                        F::zero()
                    }
                }
            };
            if x.is_zero() {
                return;
            }
            prod = prod * x;
        }
        *total = total.clone() + prod;
        return;
    }
    let (v, r) = vars[k];
    for val in 1..=r.size() {
        assign.insert(v, val);
        eval_rec(factors, vars, k + 1, assign, vals, total);
    }
    assign.remove(&v);
}

const NAMES: [&str; 14] = ["h", "i", "j", "k", "l", "p", "q", "r", "s", "t", "u", "v", "w", "m"];

fn var_name(v: VarId) -> String {
    NAMES.get(v as usize).map(|s| s.to_string()).unwrap_or_else(|| format!("x{v}"))
}

fn idx_text(i: Idx, names: &BTreeMap<VarId, String>) -> String {
    match i {
        Idx::Lit(k) if k == N => "n".into(),
        Idx::Lit(k) => k.to_string(),
        Idx::Var(v) => names.get(&v).cloned().unwrap_or_else(|| format!("#{v}")),
    }
}

impl TensorMonomial {
    /// Text form such as `sum{h:1..n, i:1..n-1} a[h,i] d[i]a[h,n]`.
    pub fn text(&self) -> String {
        let names: BTreeMap<VarId, String> = self.vars.keys().map(|v| (*v, var_name(*v))).collect();
        let mut out = String::new();
        if !self.vars.is_empty() {
            let decl: Vec<String> = self
                .vars
                .iter()
                .map(|(v, r)| {
                    format!("{}:{}", names[v], if *r == Range::Full { "1..n" } else { "1..n-1" })
                })
                .collect();
            out.push_str(&format!("sum{{{}}} ", decl.join(", ")));
        }
        if self.factors.is_empty() {
            out.push('1');
        }
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|f| {
                let t = |i| idx_text(i, &names);
                match *f {
                    Factor::A(u, v) => format!("a[{},{}]", t(u), t(v)),
                    Factor::DA(d, u, v) => format!("d[{}]a[{},{}]", t(d), t(u), t(v)),
                    Factor::NJ(a, b, c) => format!("nj[{},{},{}]", t(a), t(b), t(c)),
                    Factor::HPrime => "hp".into(),
                    Factor::Delta(u, v) => format!("delta[{},{}]", t(u), t(v)),
                }
            })
            .collect();
        out.push_str(&parts.join(" "));
        out.trim_end().to_string()
    }

    pub fn parse(s: &str) -> Result<TensorMonomial> {
        parse_monomial(s)
    }
}

impl fmt::Display for TensorMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.text())
    }
}

impl fmt::Debug for TensorMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`", self.text())
    }
}

impl Serialize for TensorMonomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.text())
    }
}

fn parse_monomial(src: &str) -> Result<TensorMonomial> {
    let bad = |m: &str| Error::Parse(format!("{m} in monomial `{src}`"));
    let mut s = src.trim();
    let mut names: BTreeMap<String, VarId> = BTreeMap::new();
    let mut vars = BTreeMap::new();
    if let Some(rest) = s.strip_prefix("sum{") {
        let close = rest.find('}').ok_or_else(|| bad("unclosed sum"))?;
        for decl in rest[..close].split(',') {
            let (name, range) = decl.split_once(':').ok_or_else(|| bad("bad declaration"))?;
            let range = match range.trim() {
                "1..n" => Range::Full,
                "1..n-1" => Range::Tangent,
                r => return Err(bad(&format!("unknown range {r}"))),
            };
            let id = names.len() as VarId;
            if names.insert(name.trim().to_string(), id).is_some() {
                return Err(bad("duplicate index"));
            }
            vars.insert(id, range);
        }
        s = rest[close + 1..].trim();
    }
    let idx = |t: &str| -> Result<Idx> {
        let t = t.trim();
        if t == "n" {
            return Ok(Idx::NORMAL);
        }
        if let Ok(k) = t.parse::<u8>() {
            if (1..=N).contains(&k) {
                return Ok(Idx::Lit(k));
            }
            return Err(bad("literal out of range"));
        }
        names.get(t).map(|v| Idx::Var(*v)).ok_or_else(|| bad(&format!("undeclared index {t}")))
    };
    let args = |body: &str, k: usize| -> Result<Vec<Idx>> {
        let v: Vec<Idx> = body.split(',').map(idx).collect::<Result<_>>()?;
        if v.len() != k {
            return Err(bad("wrong arity"));
        }
        Ok(v)
    };
    let mut factors = Vec::new();
    for tok in s.split_whitespace() {
        if tok == "1" {
            continue;
        }
        let (tok, power) = match tok.rsplit_once('^') {
            Some((t, p)) => (t, p.parse::<usize>().map_err(|_| bad("bad power"))?),
            None => (tok, 1),
        };
        let inner = |pre: &str| -> Option<&str> { tok.strip_prefix(pre)?.strip_suffix(']') };
        let f = if tok == "hp" {
            Factor::HPrime
        } else if let Some(b) = inner("a[") {
            let v = args(b, 2)?;
            Factor::A(v[0], v[1])
        } else if let Some(b) = inner("nj[") {
            let v = args(b, 3)?;
            Factor::NJ(v[0], v[1], v[2])
        } else if let Some(b) = inner("delta[") {
            let v = args(b, 2)?;
            Factor::Delta(v[0], v[1])
        } else if let Some(rest) = tok.strip_prefix("d[") {
            let (d, rest) = rest.split_once(']').ok_or_else(|| bad("bad derivative"))?;
            let b = rest.strip_prefix("a[").and_then(|r| r.strip_suffix(']')).ok_or_else(|| bad("bad derivative"))?;
            let v = args(b, 2)?;
            Factor::DA(idx(d)?, v[0], v[1])
        } else {
            return Err(bad(&format!("unknown factor {tok}")));
        };
        for _ in 0..power {
            factors.push(f.clone());
        }
    }
    let m = TensorMonomial { factors, vars };
    m.check()?;
    Ok(m)
}

/// Unique representative under bound-index renaming, factor reordering and
/// the symmetries of `a`, `d[j]a`, `delta`.
pub fn canonicalize(m: &TensorMonomial) -> Result<TensorMonomial> {
    m.check()?;
    let mut used: Vec<VarId> = Vec::new();
    let mut seen = BTreeSet::new();
    let mut order: Vec<Factor> = m.factors.iter().map(Factor::normalized).collect();
    order.sort_by_key(shape_key);
    for f in &order {
        for s in f.slots() {
            if let Idx::Var(v) = s {
                if seen.insert(v) {
                    used.push(v);
                }
            }
        }
    }
    let unused: Vec<VarId> = m.vars.keys().filter(|v| !seen.contains(v)).copied().collect();
    let k = used.len();
    let build = |perm: &[usize]| -> TensorMonomial {
        let label: BTreeMap<VarId, VarId> =
            used.iter().enumerate().map(|(j, v)| (*v, perm[j] as VarId)).collect();
        let f = |i: Idx| match i {
            Idx::Var(v) => Idx::Var(label[&v]),
            l => l,
        };
        let mut factors: Vec<Factor> = m.factors.iter().map(|x| x.map_idx(&f).normalized()).collect();
        factors.sort();
        let mut vars: BTreeMap<VarId, Range> =
            used.iter().map(|v| (label[v], m.vars[v])).collect();
        let mut extra: Vec<Range> = unused.iter().map(|v| m.vars[v]).collect();
        extra.sort();
        for (j, r) in extra.into_iter().enumerate() {
            vars.insert((k + j) as VarId, r);
        }
        TensorMonomial { factors, vars }
    };
    if k > 8 {
        let ident: Vec<usize> = (0..k).collect();
        return Ok(build(&ident));
    }
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = build(&perm);
    // Heap's algorithm over all labelings
    let mut c = vec![0usize; k];
    let mut i = 0;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            let cand = build(&perm);
            if cand < best {
                best = cand;
            }
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(best)
}

fn shape_key(f: &Factor) -> (u8, Vec<Option<u8>>) {
    let rank = match f {
        Factor::HPrime => 0,
        Factor::Delta(..) => 1,
        Factor::A(..) => 2,
        Factor::DA(..) => 3,
        Factor::NJ(..) => 4,
    };
    let lits = f
        .slots()
        .into_iter()
        .map(|s| match s {
            Idx::Lit(k) => Some(k),
            Idx::Var(_) => None,
        })
        .collect();
    (rank, lits)
}

/// Linear combination of canonical monomials with π-polynomial coefficients.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct TensorPoly {
    terms: BTreeMap<TensorMonomial, PiScalar>,
}

impl TensorPoly {
    pub fn zero() -> Self {
        TensorPoly::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TensorMonomial, &PiScalar)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &TensorMonomial) -> Result<PiScalar> {
        let c = canonicalize(m)?;
        Ok(self.terms.get(&c).cloned().unwrap_or_default())
    }

    pub fn add_term(&mut self, m: &TensorMonomial, c: &PiScalar) -> Result<()> {
        if c.is_zero() {
            return Ok(());
        }
        let key = canonicalize(m)?;
        self.add_canonical(key, c);
        Ok(())
    }

    pub(crate) fn add_canonical(&mut self, key: TensorMonomial, c: &PiScalar) {
        let e = self.terms.entry(key.clone()).or_default();
        *e = e.add(c);
        if e.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, o: &TensorPoly) -> TensorPoly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_canonical(m.clone(), c);
        }
        out
    }

    pub fn neg(&self) -> TensorPoly {
        TensorPoly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect() }
    }

    pub fn sub(&self, o: &TensorPoly) -> TensorPoly {
        self.add(&o.neg())
    }

    pub fn scale(&self, r: &Rational) -> TensorPoly {
        let mut out = TensorPoly::zero();
        for (m, c) in &self.terms {
            out.add_canonical(m.clone(), &c.scale(r));
        }
        out
    }

    pub fn mul_scalar(&self, p: &PiScalar) -> Result<TensorPoly> {
        let mut out = TensorPoly::zero();
        for (m, c) in &self.terms {
            out.add_canonical(m.clone(), &c.mul(p)?);
        }
        Ok(out)
    }

    /// Evaluation with π taken as a float.
    pub fn eval_f64(&self, vals: &impl TensorValues<f64>) -> Result<f64> {
        let mut s = 0.0;
        for (m, c) in &self.terms {
            s += c.to_f64() * m.eval(vals)?;
        }
        Ok(s)
    }

    /// Evaluation of the coefficient of each power of π separately; used for
    /// exact identity testing, π being transcendental.
    pub fn eval_by_pi_degree<F: Field>(&self, vals: &impl TensorValues<F>) -> Result<BTreeMap<u8, F>> {
        let mut out: BTreeMap<u8, F> = BTreeMap::new();
        for (m, c) in &self.terms {
            let v = m.eval(vals)?;
            for (k, r) in c.terms() {
                let e = out.entry(k).or_insert_with(F::zero);
                *e = e.clone() + F::from_rational(r) * v.clone();
            }
        }
        Ok(out)
    }

    pub fn parse_line(mono: &str, coeff: &str) -> Result<TensorPoly> {
        let mut p = TensorPoly::zero();
        p.add_term(&TensorMonomial::parse(mono)?, &coeff.parse()?)?;
        Ok(p)
    }
}

impl fmt::Display for TensorPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (m, c) in &self.terms {
            writeln!(f, "{m} | {c}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for TensorPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Serialize)]
struct PolyEntry<'a> {
    monomial: String,
    coefficient: &'a PiScalar,
    float: f64,
}

impl Serialize for TensorPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<PolyEntry> = self
            .terms
            .iter()
            .map(|(m, c)| PolyEntry { monomial: m.text(), coefficient: c, float: c.to_f64() })
            .collect();
        v.serialize(s)
    }
}

/// Rewrites under the J-relations to the chain normal form. Semantics-preserving
/// on every instance with `a² = I`, `a = aᵀ`, `a·d[j]a = -d[j]a·a`.
pub fn apply_relations(p: &TensorPoly) -> Result<TensorPoly> {
    let mut cur = p.clone();
    for _ in 0..4 {
        let mut next = TensorPoly::zero();
        for (m, c) in &cur.terms {
            for (r, m2) in reduce_monomial(m)? {
                next.add_canonical(m2, &c.scale(&r));
            }
        }
        if next == cur {
            return Ok(next);
        }
        cur = next;
    }
    Ok(cur)
}

/// Reduces a single monomial to a combination of canonical normal forms.
pub fn reduce_monomial(m: &TensorMonomial) -> Result<Vec<(Rational, TensorMonomial)>> {
    m.check()?;
    let mut acc: BTreeMap<TensorMonomial, Rational> = BTreeMap::new();
    for (sign, full) in expand_tangent(m) {
        if let Some((r, nf)) = simplify_full(full)? {
            let e = acc.entry(nf).or_insert_with(Rational::zero);
            *e += &(&r * &Rational::from_int(sign));
        }
    }
    Ok(acc.into_iter().filter(|(_, r)| !r.is_zero()).map(|(m, r)| (r, m)).collect())
}

fn expand_tangent(m: &TensorMonomial) -> Vec<(i64, TensorMonomial)> {
    let mut out = vec![(1i64, m.clone())];
    let tangents: Vec<VarId> = m.vars.iter().filter(|(_, r)| **r == Range::Tangent).map(|(v, _)| *v).collect();
    for t in tangents {
        let mut next = Vec::with_capacity(out.len() * 2);
        for (s, mono) in out {
            let mut full = mono.clone();
            full.vars.insert(t, Range::Full);
            next.push((s, full));
            next.push((-s, mono.substitute(t, Idx::NORMAL)));
        }
        out = next;
    }
    out
}

#[derive(Clone, Copy, PartialEq, Debug)]
enum Elem {
    A,
    D(Idx),
}

struct Chain {
    /// (factor index, entered through its second matrix slot)
    items: Vec<(usize, bool)>,
    left: Idx,
    right: Idx,
    cyclic: bool,
}

fn port_idx(m: &TensorMonomial, f: usize, port: usize) -> Idx {
    let (s0, s1) = m.factors[f].matrix_slots().expect("matrix factor");
    m.factors[f].slots()[if port == 0 { s0 } else { s1 }]
}

fn find_chains(m: &TensorMonomial) -> Vec<Chain> {
    let occ = m.occurrences();
    // port -> linked port
    let link = |f: usize, port: usize| -> Option<(usize, usize)> {
        let Idx::Var(v) = port_idx(m, f, port) else { return None };
        let (s_self0, s_self1) = m.factors[f].matrix_slots().unwrap();
        let my_slot = if port == 0 { s_self0 } else { s_self1 };
        for &(g, s) in &occ[&v] {
            if (g, s) == (f, my_slot) {
                continue;
            }
            if let Some((t0, t1)) = m.factors[g].matrix_slots() {
                if s == t0 {
                    return Some((g, 0));
                }
                if s == t1 {
                    return Some((g, 1));
                }
            }
        }
        None
    };
    let mut visited = vec![false; m.factors.len()];
    let mut chains = Vec::new();
    for f0 in 0..m.factors.len() {
        if visited[f0] || !m.factors[f0].is_matrix() {
            continue;
        }
        // walk left from port 0
        let mut left_items: Vec<(usize, bool)> = Vec::new();
        let mut cyclic = false;
        let mut cur = (f0, 0usize);
        loop {
            match link(cur.0, cur.1) {
                None => break,
                Some((g, p)) => {
                    if g == f0 {
                        cyclic = true;
                        break;
                    }
                    // entered g through port p going left, so g's left port is 1-p
                    left_items.push((g, p == 0));
                    cur = (g, 1 - p);
                }
            }
        }
        let mut items: Vec<(usize, bool)> = left_items.into_iter().rev().collect();
        items.push((f0, false));
        if !cyclic {
            let mut cur = (f0, 1usize);
            while let Some((g, p)) = link(cur.0, cur.1) {
                items.push((g, p == 1));
                cur = (g, 1 - p);
            }
        }
        for &(f, _) in &items {
            visited[f] = true;
        }
        let (ff, fl) = items[0];
        let (lf, ll) = *items.last().unwrap();
        let left = port_idx(m, ff, if fl { 1 } else { 0 });
        let right = port_idx(m, lf, if ll { 0 } else { 1 });
        chains.push(Chain { items, left, right, cyclic });
    }
    chains
}

fn elem_of(f: &Factor) -> Elem {
    match *f {
        Factor::A(..) => Elem::A,
        Factor::DA(d, ..) => Elem::D(d),
        _ => unreachable!(),
    }
}

/// Moves every `A` to the right end: returns (sign, D sequence, leftover A).
fn push_right(seq: &[Elem]) -> (i32, Vec<Elem>, bool) {
    let mut sign = 1;
    let mut a_seen = 0usize;
    let mut ds = Vec::new();
    for e in seq {
        match e {
            Elem::A => a_seen += 1,
            Elem::D(_) => {
                if a_seen % 2 == 1 {
                    sign = -sign;
                }
                ds.push(*e);
            }
        }
    }
    (sign, ds, a_seen % 2 == 1)
}

fn rebuild(
    m: &TensorMonomial,
    remove: &BTreeSet<usize>,
    pieces: &[(Vec<Elem>, Idx, Idx, bool)],
) -> TensorMonomial {
    let mut next_var = m.max_var() + 1;
    let mut factors: Vec<Factor> =
        m.factors.iter().enumerate().filter(|(i, _)| !remove.contains(i)).map(|(_, f)| f.clone()).collect();
    let mut vars = m.vars.clone();
    for (seq, left, right, cyclic) in pieces {
        let k = seq.len();
        if k == 0 {
            continue;
        }
        let mut conn: Vec<Idx> = Vec::new();
        let links = if *cyclic { k } else { k - 1 };
        for _ in 0..links {
            conn.push(Idx::Var(next_var));
            vars.insert(next_var, Range::Full);
            next_var += 1;
        }
        for (j, e) in seq.iter().enumerate() {
            let l = if j == 0 {
                if *cyclic { conn[k - 1] } else { *left }
            } else {
                conn[j - 1]
            };
            let r = if j == k - 1 && !*cyclic { *right } else { conn[j] };
            factors.push(match e {
                Elem::A => Factor::A(l, r),
                Elem::D(d) => Factor::DA(*d, l, r),
            });
        }
    }
    // drop connectors: indices bound entirely inside the removed factors
    let used: BTreeSet<VarId> = factors.iter().flat_map(|f| f.slots()).filter_map(Idx::var).collect();
    let mut inside: BTreeMap<VarId, usize> = BTreeMap::new();
    for v in remove.iter().flat_map(|i| m.factors[*i].slots()).filter_map(Idx::var) {
        *inside.entry(v).or_default() += 1;
    }
    for (v, c) in inside {
        if c == 2 && !used.contains(&v) {
            vars.remove(&v);
        }
    }
    TensorMonomial { factors, vars }
}

/// Full-range monomial → (coefficient, canonical normal form), or `None` if it vanishes.
fn simplify_full(mut m: TensorMonomial) -> Result<Option<(Rational, TensorMonomial)>> {
    let mut coef = Rational::one();
    loop {
        // deltas
        let mut changed = false;
        if let Some(pos) = m.factors.iter().position(|f| matches!(f, Factor::Delta(..))) {
            let Factor::Delta(u, v) = m.factors[pos] else { unreachable!() };
            m.factors.remove(pos);
            match (u, v) {
                (Idx::Lit(x), Idx::Lit(y)) => {
                    if x != y {
                        return Ok(None);
                    }
                }
                (Idx::Var(x), Idx::Var(y)) if x == y => {}
                (Idx::Var(x), other) | (other, Idx::Var(x)) => {
                    m = m.substitute(x, other);
                }
            }
            continue;
        }
        // unused bound indices
        let used: BTreeSet<VarId> = m.factors.iter().flat_map(|f| f.slots()).filter_map(Idx::var).collect();
        let unused: Vec<VarId> = m.vars.keys().filter(|v| !used.contains(v)).copied().collect();
        for v in unused {
            coef = &coef * &Rational::from_int(m.vars[&v].size() as i64);
            m.vars.remove(&v);
        }
        // deterministic chain rewrites
        for ch in find_chains(&m) {
            let seq: Vec<Elem> = ch.items.iter().map(|(f, _)| elem_of(&m.factors[*f])).collect();
            let n_a = seq.iter().filter(|e| **e == Elem::A).count();
            let n_d = seq.len() - n_a;
            let remove: BTreeSet<usize> = ch.items.iter().map(|(f, _)| *f).collect();
            if ch.cyclic && n_d % 2 == 1 {
                return Ok(None);
            }
            if n_d > 0 {
                continue;
            }
            if ch.cyclic {
                if n_a % 2 == 0 {
                    coef = &coef * &Rational::from_int(N as i64);
                    m = rebuild(&m, &remove, &[]);
                    changed = true;
                } else if n_a > 1 {
                    m = rebuild(&m, &remove, &[(vec![Elem::A], ch.left, ch.right, true)]);
                    changed = true;
                }
            } else if n_a % 2 == 0 {
                m = rebuild(&m, &remove, &[]);
                match (ch.left, ch.right) {
                    (Idx::Lit(x), Idx::Lit(y)) => {
                        if x != y {
                            return Ok(None);
                        }
                    }
                    (Idx::Var(x), other) | (other, Idx::Var(x)) => {
                        if Idx::Var(x) != other {
                            m = m.substitute(x, other);
                        }
                    }
                }
                changed = true;
            } else if n_a > 1 {
                m = rebuild(&m, &remove, &[(vec![Elem::A], ch.left, ch.right, false)]);
                changed = true;
            }
            if changed {
                break;
            }
        }
        if !changed {
            break;
        }
    }
    // orientation candidates
    let chains = find_chains(&m);
    let mut options: Vec<Vec<(i32, Vec<Elem>, bool)>> = Vec::new();
    let mut remove = BTreeSet::new();
    let mut ends = Vec::new();
    for ch in &chains {
        let seq: Vec<Elem> = ch.items.iter().map(|(f, _)| elem_of(&m.factors[*f])).collect();
        for (f, _) in &ch.items {
            remove.insert(*f);
        }
        ends.push((ch.left, ch.right, ch.cyclic));
        let mut opts = Vec::new();
        if ch.cyclic {
            let k = seq.len();
            for dir in 0..2 {
                for r in 0..k {
                    let rot: Vec<Elem> = (0..k)
                        .map(|j| if dir == 0 { seq[(r + j) % k] } else { seq[(r + k - j) % k] })
                        .collect();
                    let (s, mut ds, a) = push_right(&rot);
                    if a {
                        ds.push(Elem::A);
                    }
                    opts.push((s, ds, false));
                }
            }
        } else {
            let (s, mut ds, a) = push_right(&seq);
            if a {
                ds.push(Elem::A);
            }
            opts.push((s, ds, false));
            let rev: Vec<Elem> = seq.iter().rev().copied().collect();
            let (s2, mut ds2, a2) = push_right(&rev);
            if a2 {
                ds2.push(Elem::A);
            }
            // built right-to-left: flag it so ends are swapped
            opts.push((s2, ds2, true));
        }
        options.push(opts);
    }
    let mut best: Option<(TensorMonomial, i32)> = None;
    let mut zero = false;
    let total: usize = options.iter().map(|o| o.len()).product();
    for mut code in 0..total.max(1) {
        let mut sign = 1;
        let mut pieces = Vec::new();
        for (ci, opts) in options.iter().enumerate() {
            let (s, seq, swapped) = &opts[code % opts.len()];
            code /= opts.len();
            sign *= s;
            let (l, r, cyc) = ends[ci];
            let (l, r) = if *swapped { (r, l) } else { (l, r) };
            pieces.push((seq.clone(), l, r, cyc));
        }
        let cand = canonicalize(&rebuild(&m, &remove, &pieces))?;
        match &best {
            None => best = Some((cand, sign)),
            Some((b, bs)) => {
                if cand == *b {
                    if sign != *bs {
                        zero = true;
                    }
                } else if cand < *b {
                    best = Some((cand, sign));
                }
            }
        }
    }
    if zero {
        return Ok(None);
    }
    let (nf, sign) = best.expect("at least one candidate");
    // a min-candidate might still coincide with an opposite-sign rewrite found later
    let coef = if sign > 0 { coef } else { -coef };
    Ok(Some((coef, nf)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mono(s: &str) -> TensorMonomial {
        TensorMonomial::parse(s).unwrap()
    }

    fn nf(s: &str) -> TensorPoly {
        let mut p = TensorPoly::zero();
        p.add_term(&mono(s), &PiScalar::one()).unwrap();
        apply_relations(&p).unwrap()
    }

    #[test]
    fn canonical_examples() {
        let x = canonicalize(&mono("sum{h:1..n} a[h,1] a[h,2]")).unwrap();
        let y = canonicalize(&mono("sum{k:1..n} a[2,k] a[k,1]")).unwrap();
        assert_eq!(x, y);
        let z = canonicalize(&mono("a[3,1]")).unwrap();
        assert_eq!(z.factors, vec![Factor::A(Idx::Lit(1), Idx::Lit(3))]);
        let u = canonicalize(&mono("sum{h:1..n, i:1..n-1} a[h,n] d[i]a[h,i]")).unwrap();
        let v = canonicalize(&mono("sum{k:1..n, i:1..n-1} d[i]a[i,k] a[n,k]")).unwrap();
        assert_eq!(u, v);
        assert_eq!(canonicalize(&u).unwrap(), u);
    }

    #[test]
    fn parse_roundtrip() {
        let m = mono("sum{h:1..n, i:1..n-1} a[h,i] d[i]a[h,n] hp nj[2,n,1]");
        let back = mono(&m.text());
        assert_eq!(canonicalize(&m).unwrap(), canonicalize(&back).unwrap());
        assert!(TensorMonomial::parse("sum{h:1..n} a[h,h] a[h,1]").is_err());
        assert!(TensorMonomial::parse("a[q,1]").is_err());
    }

    #[test]
    fn involution_contraction() {
        assert_eq!(nf("sum{p:1..n} a[1,p] a[p,2]"), TensorPoly::zero());
        assert_eq!(nf("sum{p:1..n} a[3,p] a[p,3]"), nf("1"));
        assert_eq!(nf("sum{l:1..n, p:1..n} a[l,p] a[p,l]"), nf("1").scale(&Rational::from_int(6)));
    }

    #[test]
    fn tangent_split_and_mirror() {
        // the i=n addend vanishes
        assert_eq!(
            nf("sum{h:1..n, i:1..n-1} a[h,i] d[i]a[h,n]"),
            nf("sum{h:1..n, i:1..n} a[h,i] d[i]a[h,n]")
        );
        assert_eq!(nf("sum{h:1..n} a[h,n] d[n]a[h,n]"), TensorPoly::zero());
        assert_eq!(
            nf("sum{h:1..n, i:1..n-1} a[h,i] d[i]a[h,n]"),
            nf("sum{h:1..n, i:1..n-1} a[h,n] d[i]a[h,i]").neg()
        );
    }

    #[test]
    fn odd_cycle_vanishes() {
        assert_eq!(nf("sum{p:1..n} d[1]a[p,p]"), TensorPoly::zero());
        assert_eq!(nf("sum{p:1..n, q:1..n} a[p,q] d[2]a[q,p]"), TensorPoly::zero());
    }
}
