//! Supercharges `Q_{p,q} = L_{p,q} e_{p,q}`, the block-diagonal operator
//! `S = i·diag{g^(0), …, g^(N)}`, and numerical checks of the nonlinear
//! algebra they generate.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::chain::{ChainSpec, NthOrderOp};
use crate::error::{Error, Result};
use crate::fields::{ClosedFormField, Combination, FieldRef, FreeParticleModel, PotentialRef, SymmetryOp};
use crate::jet::Jet;
use crate::numerics::{
    certified_from_samples, field_difference, field_differences, sample, schrodinger_residual, Comparison, Grid,
    QuadratureRule, ResidualReport,
};
use crate::ops::{AffineOp, Applied, OpRef};

/// An `(N+1)`-component state; `None` marks a zero component.
#[derive(Clone)]
pub struct SuperState {
    pub label: String,
    pub components: Vec<Option<FieldRef>>,
}

impl SuperState {
    pub fn zero(levels: usize) -> Self {
        Self { label: "0".into(), components: vec![None; levels] }
    }

    /// `f` placed at `level`, zero elsewhere.
    pub fn single(levels: usize, level: usize, f: FieldRef) -> Self {
        let mut components = vec![None; levels];
        let label = f.label();
        components[level] = Some(f);
        Self { label, components }
    }

    pub fn levels(&self) -> usize {
        self.components.len()
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Option::is_none)
    }

    /// Nonzero components with their levels.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, &FieldRef)> {
        self.components.iter().enumerate().filter_map(|(p, c)| c.as_ref().map(|f| (p, f)))
    }
}

impl fmt::Debug for SuperState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.components.iter().map(|c| c.as_ref().map_or("0".to_string(), |f| f.label())).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// `Q_{p,q}` (moves level `p` to `q`) or its adjoint (moves `q` to `p`).
#[derive(Clone)]
pub struct SuperCharge {
    pub p: usize,
    pub q: usize,
    pub adjoint: bool,
    op: OpRef,
}

impl SuperCharge {
    pub fn source(&self) -> usize {
        if self.adjoint {
            self.q
        } else {
            self.p
        }
    }

    pub fn target(&self) -> usize {
        if self.adjoint {
            self.p
        } else {
            self.q
        }
    }

    pub fn name(&self) -> String {
        format!("Q{}{}{}", if self.adjoint { "+" } else { "" }, self.p, self.q)
    }

    pub fn op(&self) -> &OpRef {
        &self.op
    }
}

/// All supercharges of a certified chain together with `S`.
pub struct SuperAlgebra {
    n: usize,
    alphas: Vec<f64>,
    charges: BTreeMap<(usize, usize, bool), SuperCharge>,
    symmetries: Vec<SymmetryOp>,
    potentials: Vec<PotentialRef>,
}

/// `Q_{p,q}` and `Q+_{p,q}` for `0 ≤ p < q ≤ N`. `L_{0,q}` with `q ≥ 2` uses the
/// determinant form, every other `L_{p,q}` composes step operators.
pub fn build_superalgebra(spec: &ChainSpec) -> Result<SuperAlgebra> {
    if !spec.is_certified() {
        return Err(Error::Uncertified("supercharges need the step operators".into()));
    }
    let n = spec.len();
    let mut charges = BTreeMap::new();
    for p in 0..n {
        for q in p + 1..=n {
            let l: NthOrderOp = if p == 0 && q >= 2 {
                let prefix = ChainSpec::new(spec.functions()[..q].to_vec(), spec.alphas()[..q].to_vec())?;
                let tf = if q == n {
                    spec.crum_time_factor()
                } else {
                    crate::darboux::TimeFactor::Product(
                        spec.steps()[..q].iter().map(|s| s.time_factor().clone()).collect(),
                    )
                };
                NthOrderOp::from_determinant(prefix.functions().to_vec(), tf, format!("L{p}{q}"))
            } else {
                spec.operator(p, q)?
            };
            let adj = l.adjoint();
            charges.insert((p, q, false), SuperCharge { p, q, adjoint: false, op: Arc::new(l) });
            charges.insert((p, q, true), SuperCharge { p, q, adjoint: true, op: Arc::new(adj) });
        }
    }
    let symmetries = (0..=n).map(|p| spec.symmetry(p)).collect::<Result<Vec<_>>>()?;
    let potentials = (0..=n).map(|p| spec.potential(p)).collect::<Result<Vec<_>>>()?;
    Ok(SuperAlgebra { n, alphas: spec.alphas().to_vec(), charges, symmetries, potentials })
}

impl SuperAlgebra {
    pub fn order(&self) -> usize {
        self.n
    }

    pub fn levels(&self) -> usize {
        self.n + 1
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn charges(&self) -> impl Iterator<Item = &SuperCharge> {
        self.charges.values()
    }

    pub fn charge(&self, p: usize, q: usize, adjoint: bool) -> Result<&SuperCharge> {
        self.charges.get(&(p, q, adjoint)).ok_or_else(|| Error::InvalidParameter(format!("no supercharge ({p}, {q})")))
    }

    pub fn symmetry(&self, level: usize) -> &SymmetryOp {
        &self.symmetries[level]
    }

    pub fn potential(&self, level: usize) -> &PotentialRef {
        &self.potentials[level]
    }

    /// `(S − c)` acting on a state.
    pub fn apply_s_minus(&self, c: f64, s: &SuperState) -> SuperState {
        let components = s
            .components
            .iter()
            .enumerate()
            .map(|(p, comp)| {
                comp.as_ref().map(|f| {
                    let op: OpRef = Arc::new(AffineOp {
                        op: Arc::new(self.symmetries[p].clone()),
                        scale: C64::i(),
                        shift: C64::new(-c, 0.0),
                    });
                    Applied::new(op, f.clone())
                })
            })
            .collect();
        SuperState { label: format!("(S-{c})[{}]", s.label), components }
    }

    pub fn apply_s(&self, s: &SuperState) -> SuperState {
        self.apply_s_minus(0.0, s)
    }

    fn apply_factor(&self, factor: &Factor, s: &SuperState) -> Result<SuperState> {
        match *factor {
            Factor::Q(p, q) => Ok(apply_supercharge(self.charge(p, q, false)?, s)),
            Factor::Qd(p, q) => Ok(apply_supercharge(self.charge(p, q, true)?, s)),
            Factor::SMinus(c) => Ok(self.apply_s_minus(c, s)),
            Factor::Proj(p) => {
                let mut out = SuperState::zero(s.levels());
                out.components[p] = s.components[p].clone();
                out.label = format!("P{p}[{}]", s.label);
                Ok(out)
            }
        }
    }

    /// `Σ_k c_k (factors_k) s`, rightmost factor first.
    pub fn evaluate(&self, terms: &[Term], s: &SuperState) -> Result<SuperState> {
        self.evaluate_cached(terms, s, &mut ApplyCache::default())
    }

    /// [`Self::evaluate`] reusing the fields of earlier applications, so
    /// words sharing a suffix share (memoized) field instances.
    fn evaluate_cached(&self, terms: &[Term], s: &SuperState, cache: &mut ApplyCache) -> Result<SuperState> {
        let mut acc: Vec<Vec<(C64, FieldRef)>> = vec![Vec::new(); s.levels()];
        for term in terms {
            let mut st = s.clone();
            for f in term.factors.iter().rev() {
                if st.is_zero() {
                    break;
                }
                let key = (format!("{f:?}"), state_key(&st));
                st = match cache.0.get(&key) {
                    Some(hit) => hit.clone(),
                    None => {
                        let out = self.apply_factor(f, &st)?;
                        cache.0.insert(key, out.clone());
                        out
                    }
                };
            }
            for (p, c) in st.nonzero() {
                acc[p].push((C64::new(term.coeff, 0.0), c.clone()));
            }
        }
        let components = acc
            .into_iter()
            .map(|terms| match terms.len() {
                0 => None,
                1 if terms[0].0 == C64::new(1.0, 0.0) => Some(terms[0].1.clone()),
                _ => Some(Arc::new(Combination::new("sum", terms)) as FieldRef),
            })
            .collect();
        Ok(SuperState { label: s.label.clone(), components })
    }
}

/// Results of `factor · state`, keyed by the factor and the identities of
/// the state's component fields. Cached outputs keep their inputs alive, so
/// the addresses stay unique.
#[derive(Default)]
struct ApplyCache(HashMap<(String, Vec<usize>), SuperState>);

fn state_key(s: &SuperState) -> Vec<usize> {
    s.components.iter().map(|c| c.as_ref().map_or(0, |f| Arc::as_ptr(f) as *const () as usize)).collect()
}

/// Component `q` of the result is `L_{p,q}` applied to component `p`
/// (reversed for the adjoint); all others vanish.
pub fn apply_supercharge(charge: &SuperCharge, s: &SuperState) -> SuperState {
    let mut out = SuperState::zero(s.levels());
    if let Some(f) = &s.components[charge.source()] {
        out.components[charge.target()] = Some(Applied::new(charge.op.clone(), f.clone()));
        out.label = format!("{}[{}]", charge.name(), s.label);
    }
    out
}

/// One factor of an operator word.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Factor {
    Q(usize, usize),
    Qd(usize, usize),
    /// `S − c`
    SMinus(f64),
    /// Projection onto one level.
    Proj(usize),
}

impl Factor {
    fn source_target(&self) -> Option<(usize, usize)> {
        match *self {
            Factor::Q(p, q) => Some((p, q)),
            Factor::Qd(p, q) => Some((q, p)),
            _ => None,
        }
    }
}

/// `coeff · factors[0] factors[1] ⋯`.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coeff: f64,
    pub factors: Vec<Factor>,
}

impl Term {
    fn word(factors: Vec<Factor>) -> Self {
        Self { coeff: 1.0, factors }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationKind {
    Composition,
    Cubic,
    Mixed,
    Factorization,
    Commutator,
    ZeroProduct,
}

/// `lhs = rhs` as operator words.
#[derive(Clone, Debug)]
pub struct Relation {
    pub name: String,
    pub kind: RelationKind,
    pub lhs: Vec<Term>,
    pub rhs: Vec<Term>,
}

fn q_name(f: &Factor) -> String {
    match f {
        Factor::Q(p, q) => format!("Q{p}{q}"),
        Factor::Qd(p, q) => format!("Q+{p}{q}"),
        Factor::SMinus(_) => "S".into(),
        Factor::Proj(p) => format!("P{p}"),
    }
}

/// `Π_{k ∈ ks} (S − α_k)` with 1-based `k`.
fn s_poly(alphas: &[f64], ks: impl Iterator<Item = usize>) -> (Vec<Factor>, String) {
    let mut f = Vec::new();
    let mut names = Vec::new();
    for k in ks {
        f.push(Factor::SMinus(alphas[k - 1]));
        names.push(format!("(S-a{k})"));
    }
    (f, names.join(""))
}

fn words(fs: &[Factor]) -> String {
    fs.iter().map(q_name).collect::<Vec<_>>().join(" ")
}

fn rel(kind: RelationKind, lhs: Vec<Factor>, rhs: Vec<Factor>, rhs_name: String) -> Relation {
    Relation {
        name: format!("{} = {}", words(&lhs), rhs_name),
        kind,
        lhs: vec![Term::word(lhs)],
        rhs: vec![Term::word(rhs)],
    }
}

/// Every relation of the algebra for an `N`-step chain with eigenvalues
/// `α_1 > … > α_N`, plus the commutators with `S` and all products of two
/// supercharges that vanish by block structure.
pub fn relations(alphas: &[f64]) -> Vec<Relation> {
    use Factor::{Proj, Qd, Q};
    use RelationKind::*;
    let n = alphas.len();
    let mut out = Vec::new();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|p| (p + 1..=n).map(move |q| (p, q))).collect();

    for s in 0..=n {
        for p in s + 1..=n {
            for q in p + 1..=n {
                out.push(rel(Composition, vec![Q(p, q), Q(s, p)], vec![Q(s, q)], format!("Q{s}{q}")));
                out.push(rel(Composition, vec![Qd(s, p), Qd(p, q)], vec![Qd(s, q)], format!("Q+{s}{q}")));
            }
        }
    }
    for &(p, q) in &pairs {
        let (poly, pn) = s_poly(alphas, p + 1..=q);
        let mut rhs = poly.clone();
        rhs.push(Q(p, q));
        out.push(rel(Cubic, vec![Q(p, q), Qd(p, q), Q(p, q)], rhs, format!("{pn} Q{p}{q}")));
        let mut rhs = vec![Qd(p, q)];
        rhs.extend(poly.iter().copied());
        out.push(rel(Cubic, vec![Qd(p, q), Q(p, q), Qd(p, q)], rhs, format!("Q+{p}{q} {pn}")));
        let mut rhs = poly.clone();
        rhs.push(Proj(p));
        out.push(rel(Factorization, vec![Qd(p, q), Q(p, q)], rhs, format!("{pn} P{p}")));
        let mut rhs = poly;
        rhs.push(Proj(q));
        out.push(rel(Factorization, vec![Q(p, q), Qd(p, q)], rhs, format!("{pn} P{q}")));
    }
    for p in 0..=n {
        for k in 1..=n {
            for mm in 1..=n {
                if p + k + mm <= n {
                    let (poly, pn) = s_poly(alphas, p + 1..=p + k);
                    let mut rhs = poly.clone();
                    rhs.push(Qd(p + k, p + k + mm));
                    out.push(rel(
                        Mixed,
                        vec![Q(p, p + k), Qd(p, p + k + mm)],
                        rhs,
                        format!("{pn} Q+{}{}", p + k, p + k + mm),
                    ));
                    let mut rhs = vec![Q(p + k, p + k + mm)];
                    rhs.extend(poly);
                    out.push(rel(
                        Mixed,
                        vec![Q(p, p + k + mm), Qd(p, p + k)],
                        rhs,
                        format!("Q{}{} {pn}", p + k, p + k + mm),
                    ));
                }
                if p >= k + mm {
                    let (poly, pn) = s_poly(alphas, p - k + 1..=p);
                    let mut rhs = poly.clone();
                    rhs.push(Qd(p - k - mm, p - k));
                    out.push(rel(
                        Mixed,
                        vec![Qd(p - k - mm, p), Q(p - k, p)],
                        rhs,
                        format!("{pn} Q+{}{}", p - k - mm, p - k),
                    ));
                    let mut rhs = vec![Q(p - k - mm, p - k)];
                    rhs.extend(poly);
                    out.push(rel(
                        Mixed,
                        vec![Qd(p - k, p), Q(p - k - mm, p)],
                        rhs,
                        format!("Q{}{} {pn}", p - k - mm, p - k),
                    ));
                }
            }
        }
    }
    let all: Vec<Factor> = pairs.iter().flat_map(|&(p, q)| [Q(p, q), Qd(p, q)]).collect();
    for c in &all {
        out.push(Relation {
            name: format!("[S, {}] = 0", q_name(c)),
            kind: Commutator,
            lhs: vec![Term::word(vec![Factor::SMinus(0.0), *c])],
            rhs: vec![Term::word(vec![*c, Factor::SMinus(0.0)])],
        });
    }
    for a in &all {
        for b in &all {
            let (_, tb) = b.source_target().expect("charge");
            let (sa, _) = a.source_target().expect("charge");
            if tb != sa {
                out.push(Relation {
                    name: format!("{} {} = 0", q_name(a), q_name(b)),
                    kind: ZeroProduct,
                    lhs: vec![Term::word(vec![*a, *b])],
                    rhs: Vec::new(),
                });
            }
        }
    }
    out
}

fn zero_field() -> FieldRef {
    ClosedFormField::new("0", |x, _| Jet::zero(x.tower())).into_ref()
}

/// Worst `|LHS − RHS|` of one relation over all probes and grid points,
/// normalized per time slice by `max(|RHS|, |probe|)`.
pub fn check_relation(
    alg: &SuperAlgebra,
    relation: &Relation,
    probes: &[SuperState],
    grid: &Grid,
    tol: f64,
) -> Result<ResidualReport> {
    Ok(check_relations(alg, std::slice::from_ref(relation), probes, grid, tol)?.remove(0))
}

/// One report per relation of [`relations`].
pub fn verify_algebra(alg: &SuperAlgebra, probes: &[SuperState], grid: &Grid, tol: f64) -> Result<Vec<ResidualReport>> {
    check_relations(alg, &relations(&alg.alphas), probes, grid, tol)
}

/// Worst component residual over all probes, per relation. Every relation
/// is swept in one pass so shared subexpressions are evaluated once.
pub fn check_relations(
    alg: &SuperAlgebra,
    rels: &[Relation],
    probes: &[SuperState],
    grid: &Grid,
    tol: f64,
) -> Result<Vec<ResidualReport>> {
    let zero = zero_field();
    let mut cache = ApplyCache::default();
    // (relation index, lhs, rhs, reference)
    let mut pending: Vec<(usize, FieldRef, Option<FieldRef>, FieldRef)> = Vec::new();
    for probe in probes {
        let reference = match probe.nonzero().next() {
            Some((_, f)) => f.clone(),
            None => continue,
        };
        for (k, rel) in rels.iter().enumerate() {
            let lhs = alg.evaluate_cached(&rel.lhs, probe, &mut cache)?;
            let rhs = alg.evaluate_cached(&rel.rhs, probe, &mut cache)?;
            for (a, b) in lhs.components.into_iter().zip(rhs.components) {
                if a.is_none() && b.is_none() {
                    continue;
                }
                pending.push((k, a.unwrap_or_else(|| zero.clone()), b, reference.clone()));
            }
        }
    }
    let cmps: Vec<Comparison<'_>> = pending
        .iter()
        .map(|(k, a, b, r)| Comparison {
            name: rels[*k].name.clone(),
            lhs: a.as_ref(),
            rhs: b.as_deref(),
            reference: r.as_ref(),
        })
        .collect();
    let reports = field_differences(&cmps, grid, tol)?;
    let mut worst: Vec<ResidualReport> =
        rels.iter().map(|r| ResidualReport::new(r.name.clone(), 0.0, 0.0, tol, (f64::NAN, f64::NAN))).collect();
    for ((k, ..), r) in pending.iter().zip(reports) {
        if r.max_norm > worst[*k].max_norm || r.max_norm.is_nan() {
            worst[*k] = r;
        }
    }
    for w in &mut worst {
        w.passed = w.max_norm <= tol;
    }
    Ok(worst)
}

/// Requires every component of `s` to solve its level equation to
/// `input_tol`, then reports the worst level residual of `Q s`.
pub fn conservation_check(
    alg: &SuperAlgebra,
    charge: &SuperCharge,
    s: &SuperState,
    grid: &Grid,
    input_tol: f64,
    tol: f64,
) -> Result<ResidualReport> {
    for (p, f) in s.nonzero() {
        let r = schrodinger_residual(f.label(), f.as_ref(), Some(alg.potential(p).as_ref()), grid, input_tol)?;
        if !r.passed {
            return Err(Error::NotASolution { label: f.label(), residual: r.max_norm });
        }
    }
    let out = apply_supercharge(charge, s);
    let name = format!("{} on {}", charge.name(), s.label);
    let mut worst = ResidualReport::new(name.clone(), 0.0, 0.0, tol, (f64::NAN, f64::NAN));
    for (p, f) in out.nonzero() {
        let r = schrodinger_residual(name.clone(), f.as_ref(), Some(alg.potential(p).as_ref()), grid, tol)?;
        if r.max_norm > worst.max_norm || r.max_norm.is_nan() {
            worst = r;
        }
    }
    worst.passed = worst.max_norm <= tol;
    Ok(worst)
}

/// `ψ_n`, `φ_n`, `χ_n` for `n < count`, each alone at its level.
pub fn model_probes(model: &FreeParticleModel, count: usize) -> Vec<SuperState> {
    let mut out = Vec::with_capacity(3 * count);
    for n in 0..count {
        out.push(SuperState::single(3, 0, model.psi(n)));
        out.push(SuperState::single(3, 1, model.phi(n)));
        out.push(SuperState::single(3, 2, model.chi(n)));
    }
    out
}

/// Rayleigh quotient and pointwise residual of one super-state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StateEigenvalue {
    pub label: String,
    #[serde(with = "crate::nonfinite")]
    pub rayleigh: f64,
    /// Spread of the quotient across the sampled times.
    #[serde(with = "crate::nonfinite")]
    pub t_spread: f64,
    /// `max|S s − λ s| / max|s|` with `λ` the Rayleigh quotient.
    #[serde(with = "crate::nonfinite")]
    pub pointwise_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SpectrumReport {
    #[serde(with = "crate::nonfinite")]
    pub eigenvalues: Vec<f64>,
    pub multiplicities: Vec<usize>,
    #[serde(with = "crate::nonfinite")]
    pub residuals: Vec<f64>,
    pub states: Vec<StateEigenvalue>,
}

/// Super-states of the free-particle model: the vacuum `(0,0,χ_0)`, the pair
/// `(0,0,χ_1)`, `(0,φ_0,0)`, and the triples `(ψ_n,0,0)`, `(0,φ_{n+1},0)`,
/// `(0,0,χ_{n+2})` for `n = 0..K−3`.
pub fn spectrum_states(model: &FreeParticleModel, k: usize) -> Result<Vec<SuperState>> {
    if k < 3 {
        return Err(Error::InvalidParameter(format!("K = {k} must be at least 3")));
    }
    let mut out = vec![
        SuperState::single(3, 2, model.chi(0)),
        SuperState::single(3, 2, model.chi(1)),
        SuperState::single(3, 1, model.phi(0)),
    ];
    for n in 0..k - 2 {
        out.push(SuperState::single(3, 0, model.psi(n)));
        out.push(SuperState::single(3, 1, model.phi(n + 1)));
        out.push(SuperState::single(3, 2, model.chi(n + 2)));
    }
    Ok(out)
}

/// Rayleigh quotients `⟨s, S s⟩/⟨s, s⟩`, grouped within `tol`.
pub fn spectrum_report(
    alg: &SuperAlgebra,
    states: &[SuperState],
    grid: &Grid,
    rule: &QuadratureRule,
    tol: f64,
) -> Result<SpectrumReport> {
    let mut eig = Vec::with_capacity(states.len());
    for s in states {
        let ss = alg.apply_s(s);
        // (t, per-component samples of f and S f)
        let mut slices = Vec::with_capacity(grid.t_samples().len());
        let mut per_t = Vec::with_capacity(grid.t_samples().len());
        for &t in grid.t_samples() {
            let (mut num, mut den) = (C64::new(0.0, 0.0), 0.0);
            let mut comps = Vec::new();
            for (p, f) in s.nonzero() {
                let sf = ss.components[p].as_ref().expect("S keeps levels");
                let fs = sample(f.as_ref(), grid, t)?;
                let sfs = sample(sf.as_ref(), grid, t)?;
                let a = certified_from_samples(&fs, &sfs, t, grid, rule)?;
                let b = certified_from_samples(&fs, &fs, t, grid, rule)?;
                for c in [&a, &b] {
                    if c.discrepancy() > tol * c.value.norm().max(1.0) {
                        return Err(Error::QuadratureNotConverged { t, discrepancy: c.discrepancy() });
                    }
                }
                num += a.value;
                den += b.value.re;
                comps.push((fs, sfs));
            }
            per_t.push((num / den).re);
            slices.push((t, comps));
        }
        let lambda = per_t.iter().sum::<f64>() / per_t.len() as f64;
        let spread = per_t.iter().fold(0.0f64, |acc, v| acc.max((v - lambda).abs()));
        // max|S f − λ f| normalized per slice by max(|λ f|, |f|)
        let mut residual = 0.0f64;
        for (_, comps) in &slices {
            for (fs, sfs) in comps {
                let scale = fs.iter().fold(f64::MIN_POSITIVE, |m, f| m.max(f.norm()).max((f * lambda).norm()));
                let worst = fs.iter().zip(sfs).fold(0.0f64, |m, (f, sf)| m.max((sf - f * lambda).norm()));
                let r = worst / scale;
                residual = residual.max(if r.is_nan() { f64::INFINITY } else { r });
            }
        }
        eig.push(StateEigenvalue {
            label: format!("{s:?}"),
            rayleigh: lambda,
            t_spread: spread,
            pointwise_residual: residual,
        });
    }
    eig.sort_by(|a, b| a.rayleigh.total_cmp(&b.rayleigh));
    let (mut eigenvalues, mut multiplicities, mut residuals) = (Vec::new(), Vec::new(), Vec::new());
    let mut i = 0;
    while i < eig.len() {
        let mut j = i + 1;
        while j < eig.len() && (eig[j].rayleigh - eig[i].rayleigh).abs() <= tol {
            j += 1;
        }
        let group = &eig[i..j];
        eigenvalues.push(group.iter().map(|e| e.rayleigh).sum::<f64>() / group.len() as f64);
        multiplicities.push(group.len());
        residuals.push(group.iter().map(|e| e.pointwise_residual.max(e.t_spread)).fold(0.0, f64::max));
        i = j;
    }
    Ok(SpectrumReport { eigenvalues, multiplicities, residuals, states: eig })
}

/// Every supercharge and adjoint applied to `s`, normalized by `max|s|`.
pub fn annihilation(alg: &SuperAlgebra, s: &SuperState, grid: &Grid, tol: f64) -> Result<Vec<ResidualReport>> {
    let reference =
        s.nonzero().next().map(|(_, f)| f.clone()).ok_or_else(|| Error::InvalidParameter("zero state".into()))?;
    let zero = zero_field();
    let mut out = Vec::new();
    for c in alg.charges() {
        let r = apply_supercharge(c, s);
        let name = format!("{} on {}", c.name(), s.label);
        let mut worst = ResidualReport::new(name.clone(), 0.0, 0.0, tol, (f64::NAN, f64::NAN));
        for (_, f) in r.nonzero() {
            let rep = field_difference(name.clone(), f.as_ref(), Some(zero.as_ref()), reference.as_ref(), grid, tol)?;
            if rep.max_norm > worst.max_norm {
                worst = rep;
            }
        }
        out.push(worst);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relation_list_for_two_steps() {
        let rels = relations(&[-0.5, -1.5]);
        let count = |k| rels.iter().filter(|r| r.kind == k).count();
        assert_eq!(count(RelationKind::Composition), 2);
        assert_eq!(count(RelationKind::Cubic), 6);
        assert_eq!(count(RelationKind::Factorization), 6);
        assert_eq!(count(RelationKind::Mixed), 4);
        assert_eq!(count(RelationKind::Commutator), 6);
        assert_eq!(count(RelationKind::ZeroProduct), 24);
        let names: Vec<&str> = rels.iter().map(|r| r.name.as_str()).collect();
        for want in [
            "Q12 Q01 = Q02",
            "Q01 Q+01 Q01 = (S-a1) Q01",
            "Q02 Q+02 Q02 = (S-a1)(S-a2) Q02",
            "Q01 Q+02 = (S-a1) Q+12",
            "Q+02 Q12 = (S-a2) Q+01",
            "Q02 Q+01 = Q12 (S-a1)",
            "Q01 Q02 = 0",
        ] {
            assert!(names.contains(&want), "missing {want}");
        }
    }

    #[test]
    fn one_step_relations_have_no_composition() {
        let rels = relations(&[-0.5]);
        assert!(rels.iter().all(|r| r.kind != RelationKind::Composition && r.kind != RelationKind::Mixed));
        // Q01 Q01 and Q+01 Q+01
        assert_eq!(rels.iter().filter(|r| r.kind == RelationKind::ZeroProduct).count(), 2);
    }

    #[test]
    fn matrix_unit_products_are_exact() {
        // e_{ab} e_{cd} = δ_{bc} e_{ad} on 3×3 matrices
        let unit = |a: usize, b: usize| {
            let mut m = [[0i32; 3]; 3];
            m[a][b] = 1;
            m
        };
        let mul = |x: [[i32; 3]; 3], y: [[i32; 3]; 3]| {
            let mut r = [[0i32; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        r[i][j] += x[i][k] * y[k][j];
                    }
                }
            }
            r
        };
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    for d in 0..3 {
                        let want = if b == c { unit(a, d) } else { [[0; 3]; 3] };
                        assert_eq!(mul(unit(a, b), unit(c, d)), want);
                    }
                }
            }
        }
    }
}
