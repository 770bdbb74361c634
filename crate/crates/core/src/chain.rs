//! N-step chains: Wronskians, the Crum operator, chained potentials and
//! symmetry operators, complete-reducibility certification and the
//! factorization identities.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::darboux::{check_reality, log_derivative, FirstOrderOp, PotentialDifference, RealityReport, TimeFactor};
use crate::error::{Error, Result};
use crate::fields::{
    Combination, Field, FieldRef, FreeParticleModel, PointMemo, Potential, PotentialRef, ShiftTerm, SumPotential,
    SymmetryOp,
};
use crate::jet::{Jet, Tower};
use crate::numerics::{
    field_difference, field_differences, nodelessness, Comparison, Grid, NodeReport, ResidualReport,
};
use crate::ops::{AffineOp, Applied, Composed, LinearOp, OpRef};

/// Default cap on the chain length.
pub const MAX_CHAIN: usize = 4;

/// Determinant of a square matrix of jets by cofactor expansion.
fn det(m: &[Vec<Jet>], tower: Tower) -> Jet {
    let n = m.len();
    match n {
        0 => Jet::constant(1.0, tower),
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        _ => {
            let mut acc = Jet::zero(tower);
            for col in 0..n {
                let minor: Vec<Vec<Jet>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|(c, _)| *c != col).map(|(_, v)| *v).collect())
                    .collect();
                let term = m[0][col] * det(&minor, tower);
                acc = if col % 2 == 0 { acc + term } else { acc - term };
            }
            acc
        }
    }
}

/// Rows `∂x^j f` for `j = 0..rows`, each truncated to `tower`.
fn derivative_rows(f: &dyn Field, x: f64, t: f64, tower: Tower, rows: usize) -> Result<Vec<Jet>> {
    let mut j = f.eval(x, t, tower.deeper(rows.saturating_sub(1)))?;
    let mut out = Vec::with_capacity(rows);
    for r in 0..rows {
        if r > 0 {
            j = j.dx();
        }
        out.push(j.truncate(tower));
    }
    Ok(out)
}

/// `W(f_1, …, f_p)`, the determinant of `∂x^j f_k`.
#[derive(Clone)]
pub struct WronskianField {
    pub fields: Vec<FieldRef>,
    memo: Arc<PointMemo>,
}

impl WronskianField {
    pub fn new(fields: Vec<FieldRef>) -> Self {
        Self { fields, memo: Arc::default() }
    }
}

impl Field for WronskianField {
    fn label(&self) -> String {
        let names: Vec<String> = self.fields.iter().map(|f| f.label()).collect();
        format!("W({})", names.join(","))
    }

    fn eval(&self, x: f64, t: f64, tower: Tower) -> Result<Jet> {
        self.memo.get_or(x, t, tower, |tower| {
            let p = self.fields.len();
            let cols: Vec<Vec<Jet>> =
                self.fields.iter().map(|f| derivative_rows(f.as_ref(), x, t, tower, p)).collect::<Result<_>>()?;
            let m: Vec<Vec<Jet>> = (0..p).map(|r| (0..p).map(|c| cols[c][r]).collect()).collect();
            Ok(det(&m, tower))
        })
    }
}

/// `W(f_1, …, f_p)(x, t)` for the first `p` fields.
pub fn wronskian(fields: &[FieldRef], x: f64, t: f64, p: usize) -> Result<C64> {
    if p > fields.len() {
        return Err(Error::InvalidParameter(format!("order {p} exceeds {} fields", fields.len())));
    }
    (&WronskianField::new(fields[..p].to_vec()) as &dyn Field).value(x, t)
}

/// `L(t)·W(u_1..u_p)/W(u_1..u_{p−1})`: the function transformed by the
/// first `p−1` steps, which drives step `p`.
#[derive(Clone)]
pub struct WronskianRatio {
    num: WronskianField,
    den: WronskianField,
    time_factor: TimeFactor,
    memo: Arc<PointMemo>,
}

impl Field for WronskianRatio {
    fn label(&self) -> String {
        format!("{}/{}", self.num.label(), self.den.label())
    }

    fn eval(&self, x: f64, t: f64, tower: Tower) -> Result<Jet> {
        self.memo.get_or(x, t, tower, |tower| {
            let n = self.num.eval(x, t, tower)?;
            if self.den.fields.is_empty() {
                return Ok(n);
            }
            let d = self.den.eval(x, t, tower)?;
            if !(d.value().norm() > 0.0) {
                return Err(Error::Node { label: self.den.label(), x, t, modulus: d.value().norm() });
            }
            Ok(n * d.recip() * self.time_factor.jet(t, tower)?)
        })
    }
}

/// `−∂x² log|W(u_1..u_p)|²`.
pub struct WronskianPotential {
    pub wronskian: WronskianField,
}

impl Potential for WronskianPotential {
    fn label(&self) -> String {
        format!("A[{}]", self.wronskian.label())
    }

    fn eval(&self, x: f64, t: f64, tower: Tower) -> Result<Jet> {
        let w = log_derivative(&self.wronskian, x, t, tower.deeper(1))?;
        Ok(w.dx().re() * -2.0)
    }
}

#[derive(Clone)]
enum Repr {
    /// `steps[0]` acts first.
    Steps(Vec<FirstOrderOp>),
    /// `coeffs` caches `a_0..a_N` at the last point.
    Determinant { functions: Vec<FieldRef>, time_factor: TimeFactor, coeffs: Arc<PointMemo<Vec<Jet>>> },
}

/// `N`-th order transformation operator `L_{p,q}` or its adjoint.
#[derive(Clone)]
pub struct NthOrderOp {
    repr: Repr,
    adjoint: bool,
    label: String,
}

impl NthOrderOp {
    pub fn from_steps(steps: Vec<FirstOrderOp>, label: impl Into<String>) -> Self {
        Self { repr: Repr::Steps(steps), adjoint: false, label: label.into() }
    }

    /// `L_N(t) W(u_1..u_N, f)/W(u_1..u_N)`.
    pub fn from_determinant(functions: Vec<FieldRef>, time_factor: TimeFactor, label: impl Into<String>) -> Self {
        Self {
            repr: Repr::Determinant { functions, time_factor, coeffs: Arc::default() },
            adjoint: false,
            label: label.into(),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self { adjoint: !self.adjoint, ..self.clone() }
    }

    pub fn is_adjoint(&self) -> bool {
        self.adjoint
    }

    pub fn is_determinant(&self) -> bool {
        matches!(self.repr, Repr::Determinant { .. })
    }

    /// Coefficients `a_0..a_N` of `Σ a_j ∂x^j` at `tower`.
    fn coefficients(functions: &[FieldRef], tf: &TimeFactor, x: f64, t: f64, tower: Tower) -> Result<Vec<Jet>> {
        let n = functions.len();
        let cols: Vec<Vec<Jet>> =
            functions.iter().map(|f| derivative_rows(f.as_ref(), x, t, tower, n + 1)).collect::<Result<_>>()?;
        let w = {
            let m: Vec<Vec<Jet>> = (0..n).map(|r| (0..n).map(|c| cols[c][r]).collect()).collect();
            det(&m, tower)
        };
        if !(w.value().norm() > 0.0) || !w.is_finite() {
            return Err(Error::Node { label: "W".into(), x, t, modulus: w.value().norm() });
        }
        let scale = tf.jet(t, tower)? * w.recip();
        (0..=n)
            .map(|j| {
                let m: Vec<Vec<Jet>> =
                    (0..=n).filter(|r| *r != j).map(|r| (0..n).map(|c| cols[c][r]).collect()).collect();
                let sign = if (j + n).is_multiple_of(2) { 1.0 } else { -1.0 };
                Ok(det(&m, tower) * scale * sign)
            })
            .collect()
    }
}

impl LinearOp for NthOrderOp {
    fn label(&self) -> String {
        if self.adjoint {
            format!("{}+", self.label)
        } else {
            self.label.clone()
        }
    }

    fn order(&self) -> usize {
        match &self.repr {
            Repr::Steps(s) => s.len(),
            Repr::Determinant { functions, .. } => functions.len(),
        }
    }

    fn apply_at(&self, f: &dyn Field, x: f64, t: f64, tower: Tower) -> Result<Jet> {
        match &self.repr {
            Repr::Steps(steps) => {
                // outermost first
                let ops: Vec<OpRef> = if self.adjoint {
                    steps.iter().map(|s| Arc::new(s.adjoint()) as OpRef).collect()
                } else {
                    steps.iter().rev().map(|s| Arc::new(s.clone()) as OpRef).collect()
                };
                Composed { ops }.apply_at(f, x, t, tower)
            }
            Repr::Determinant { functions, time_factor, coeffs } => {
                let n = functions.len();
                let coefficients =
                    |tw: Tower| coeffs.get_or(x, t, tw, |tw| Self::coefficients(functions, time_factor, x, t, tw));
                if !self.adjoint {
                    let a = coefficients(tower)?;
                    let fr = derivative_rows(f, x, t, tower, n + 1)?;
                    let mut acc = Jet::zero(tower);
                    for (aj, fj) in a.iter().zip(&fr) {
                        acc += *aj * *fj;
                    }
                    Ok(acc)
                } else {
                    // L+ g = Σ (−1)^j ∂^j (conj(a_j) g)
                    let deep = tower.deeper(n);
                    let a = coefficients(deep)?;
                    let g = f.eval(x, t, deep)?;
                    let mut acc = Jet::zero(tower);
                    for (j, aj) in a.iter().enumerate() {
                        let mut term = aj.conj() * g;
                        for _ in 0..j {
                            term = term.dx();
                        }
                        let term = term.truncate(tower);
                        acc = if j % 2 == 0 { acc + term } else { acc - term };
                    }
                    Ok(acc)
                }
            }
        }
    }
}

/// Outcome of one prefix in the reducibility certification.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PrefixReport {
    pub p: usize,
    pub nodes: NodeReport,
    pub reality: RealityReport,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReducibilityReport {
    pub certified: bool,
    pub ordering_ok: bool,
    pub eigen_residuals: Vec<ResidualReport>,
    pub prefixes: Vec<PrefixReport>,
    pub reason: Option<String>,
}

/// An ordered chain of transformation functions `u_k` with `ig^(0)u_k = α_k u_k`.
#[derive(Clone)]
pub struct ChainSpec {
    functions: Vec<FieldRef>,
    alphas: Vec<f64>,
    step_time_factors: Option<Vec<TimeFactor>>,
    crum_time_factor: Option<TimeFactor>,
    perturbation: f64,
    eigen_tol: f64,
    steps: Vec<FirstOrderOp>,
    certified: bool,
}

impl ChainSpec {
    pub fn new(functions: Vec<FieldRef>, alphas: Vec<f64>) -> Result<Self> {
        if functions.is_empty() || functions.len() != alphas.len() {
            return Err(Error::InvalidParameter(format!(
                "{} functions with {} eigenvalues",
                functions.len(),
                alphas.len()
            )));
        }
        if functions.len() > MAX_CHAIN {
            return Err(Error::InvalidParameter(format!("chain length {} exceeds {MAX_CHAIN}", functions.len())));
        }
        Ok(Self {
            functions,
            alphas,
            step_time_factors: None,
            crum_time_factor: None,
            perturbation: 0.0,
            eigen_tol: 1e-8,
            steps: Vec::new(),
            certified: false,
        })
    }

    /// Closed forms for the per-step time factors and for `L_N(t)`.
    pub fn with_time_factors(mut self, steps: Vec<TimeFactor>, crum: TimeFactor) -> Self {
        self.step_time_factors = Some(steps);
        self.crum_time_factor = Some(crum);
        self
    }

    /// Adds `ε` to the first step's potential difference (every level above
    /// 0 shifts by `ε`). A negative control: the algebra must then fail.
    pub fn with_perturbation(mut self, eps: f64) -> Self {
        self.perturbation = eps;
        self
    }

    pub fn with_eigen_tolerance(mut self, tol: f64) -> Self {
        self.eigen_tol = tol;
        self
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn functions(&self) -> &[FieldRef] {
        &self.functions
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn perturbation(&self) -> f64 {
        self.perturbation
    }

    pub fn is_certified(&self) -> bool {
        self.certified
    }

    pub fn steps(&self) -> &[FirstOrderOp] {
        &self.steps
    }

    pub fn wronskian_field(&self, p: usize) -> WronskianField {
        WronskianField::new(self.functions[..p].to_vec())
    }

    /// `L_N(t)`: the closed form if supplied, otherwise integrated from the
    /// phase curvature of `W(u_1..u_N)` at `x = 0`.
    pub fn crum_time_factor(&self) -> TimeFactor {
        self.crum_time_factor
            .clone()
            .unwrap_or_else(|| TimeFactor::integrated(Arc::new(self.wronskian_field(self.len())), 0.0))
    }

    /// Crum operator `L_{0,N}` in determinant form, after screening the
    /// final Wronskian for nodes and the reality condition.
    pub fn crum_operator(&self, grid: &Grid) -> Result<NthOrderOp> {
        let w = self.wronskian_field(self.len());
        let nodes = nodelessness(&w, grid)?;
        if !nodes.passed {
            let (x, t) = nodes.worst_point;
            return Err(Error::Node { label: w.label(), x, t, modulus: nodes.min_ratio });
        }
        let r = check_reality(&w, grid, crate::darboux::REALITY_TOL)?;
        if !r.passed {
            return Err(Error::RealityViolated { label: w.label(), spread: r.max_spread, tolerance: r.tolerance });
        }
        Ok(self.crum_operator_unchecked())
    }

    pub fn crum_operator_unchecked(&self) -> NthOrderOp {
        NthOrderOp::from_determinant(self.functions.clone(), self.crum_time_factor(), format!("L0{}", self.len()))
    }

    /// `ig^(0) f − α f`, normalized by `max|f|` per time slice.
    fn eigen_residual(&self, k: usize, grid: &Grid) -> Result<ResidualReport> {
        let u = self.functions[k].clone();
        let ig: OpRef = Arc::new(AffineOp {
            op: Arc::new(SymmetryOp::free_particle()),
            scale: C64::i(),
            shift: C64::new(-self.alphas[k], 0.0),
        });
        let lhs = Applied::new(ig, u.clone());
        field_difference(
            format!("ig0 {} = alpha {}", u.label(), u.label()),
            lhs.as_ref(),
            None,
            u.as_ref(),
            grid,
            self.eigen_tol,
        )
    }

    /// Checks strict ordering of the `α_k`, the eigen-equations, and every
    /// prefix Wronskian for nodes and the reality condition; on success builds
    /// the step operators.
    pub fn certify_complete_reducibility(&mut self, grid: &Grid) -> Result<ReducibilityReport> {
        self.certified = false;
        self.steps.clear();
        let ordering_ok = self.alphas.windows(2).all(|w| w[0] > w[1]);
        let eigen_residuals: Vec<ResidualReport> =
            (0..self.len()).map(|k| self.eigen_residual(k, grid)).collect::<Result<_>>()?;
        let mut prefixes = Vec::with_capacity(self.len());
        let mut reason = None;
        if !ordering_ok {
            reason = Some(format!("eigenvalues {:?} are not strictly decreasing", self.alphas));
        } else if let Some(r) = eigen_residuals.iter().find(|r| !r.passed) {
            reason = Some(format!("{} fails with residual {:e}", r.name, r.max_norm));
        }
        if reason.is_none() {
            for p in 1..=self.len() {
                let w = self.wronskian_field(p);
                let nodes = nodelessness(&w, grid)?;
                // the phase curvature is undefined at a node
                let reality = if nodes.passed {
                    check_reality(&w, grid, crate::darboux::REALITY_TOL)?
                } else {
                    RealityReport {
                        label: w.label(),
                        max_spread: f64::INFINITY,
                        passed: false,
                        tolerance: crate::darboux::REALITY_TOL,
                        per_t: Vec::new(),
                    }
                };
                let ok = nodes.passed && reality.passed;
                if !ok && reason.is_none() {
                    reason = Some(format!(
                        "prefix {p}: nodeless {} (min ratio {:e}), reality {} (spread {:e})",
                        nodes.passed, nodes.min_ratio, reality.passed, reality.max_spread
                    ));
                }
                prefixes.push(PrefixReport { p, nodes, reality });
                if !ok {
                    break;
                }
            }
        }
        let certified = reason.is_none();
        if certified {
            self.build_steps();
            self.certified = true;
        }
        Ok(ReducibilityReport { certified, ordering_ok, eigen_residuals, prefixes, reason })
    }

    fn build_steps(&mut self) {
        let mut steps: Vec<FirstOrderOp> = Vec::with_capacity(self.len());
        for p in 1..=self.len() {
            let prefix_tf = product_time_factor(steps.iter().map(|s| s.time_factor().clone()).collect());
            let source: FieldRef = Arc::new(WronskianRatio {
                num: self.wronskian_field(p),
                den: self.wronskian_field(p - 1),
                time_factor: prefix_tf,
                memo: Arc::default(),
            });
            let tf = match &self.step_time_factors {
                Some(v) => v[p - 1].clone(),
                None => TimeFactor::integrated(source.clone(), 0.0),
            };
            steps.push(FirstOrderOp::from_parts(source, tf));
        }
        self.steps = steps;
    }

    fn require_certified(&self) -> Result<()> {
        if !self.certified {
            return Err(Error::Uncertified("call certify_complete_reducibility first".into()));
        }
        Ok(())
    }

    /// `L_{p,q}` as a composition of the certified step operators.
    pub fn operator(&self, p: usize, q: usize) -> Result<NthOrderOp> {
        self.require_certified()?;
        if !(p < q && q <= self.len()) {
            return Err(Error::InvalidParameter(format!("operator indices ({p}, {q}) out of range")));
        }
        Ok(NthOrderOp::from_steps(self.steps[p..q].to_vec(), format!("L{p}{q}")))
    }

    /// `A_{p−1,p}`: step `p`'s potential difference (with the perturbation on step 1).
    pub fn step_potential(&self, p: usize) -> Result<PotentialRef> {
        self.require_certified()?;
        let a: PotentialRef = Arc::new(PotentialDifference::new(self.steps[p - 1].source().clone()));
        Ok(if p == 1 { crate::fields::shifted(a, self.perturbation) } else { a })
    }

    /// `V_p = Σ_{k ≤ p} A_{k−1,k}` (`V_0 = 0`).
    pub fn potential(&self, level: usize) -> Result<PotentialRef> {
        let parts = (1..=level).map(|k| self.step_potential(k)).collect::<Result<Vec<_>>>()?;
        Ok(Arc::new(SumPotential { parts, constant: 0.0 }))
    }

    /// `g^(p) = g^(0) − i Σ_{k ≤ p} L_k(t)² A_{k−1,k}`.
    pub fn symmetry(&self, level: usize) -> Result<SymmetryOp> {
        let shifts = (1..=level)
            .map(|k| {
                Ok(ShiftTerm {
                    time_factor: self.steps[k - 1].time_factor().clone(),
                    potential: self.step_potential(k)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SymmetryOp::with_shifts(level, shifts))
    }
}

fn product_time_factor(factors: Vec<TimeFactor>) -> TimeFactor {
    match factors.len() {
        0 => TimeFactor::unit(),
        1 => factors.into_iter().next().expect("one"),
        _ => TimeFactor::Product(factors),
    }
}

/// `A_{0,p} = −∂x² log|W(u_1..u_p)|²` at a point.
pub fn potential_difference_n(spec: &ChainSpec, p: usize, x: f64, t: f64) -> Result<f64> {
    let w = WronskianPotential { wronskian: spec.wronskian_field(p) };
    (&w as &dyn Potential).value(x, t)
}

/// Reality test of the full Wronskian: `(log(W/W*))_xxx = 0`.
pub fn check_reality_n(spec: &ChainSpec, grid: &Grid, tol: f64) -> Result<RealityReport> {
    check_reality(&spec.wronskian_field(spec.len()), grid, tol)
}

/// `L_N(t)` for the chain.
pub fn time_factor_n(spec: &ChainSpec, t: f64) -> Result<f64> {
    spec.crum_time_factor().value(t)
}

/// A probe for [`verify_factorization`]: a field on level `p` or `p+n`.
#[derive(Clone)]
pub struct LevelProbe {
    pub level: usize,
    pub field: FieldRef,
}

/// `Π (ig − α_k)` over the given `α`s.
fn shifted_product(g: SymmetryOp, alphas: &[f64]) -> Vec<OpRef> {
    let g: OpRef = Arc::new(g);
    alphas
        .iter()
        .map(|a| Arc::new(AffineOp { op: g.clone(), scale: C64::i(), shift: C64::new(-a, 0.0) }) as OpRef)
        .collect()
}

/// Residual of `L+_{p,p+n}L_{p,p+n} = Π_{k=1..n}(ig^(p) − α_{p+k})` on
/// level-`p` probes and of `L L+ = Π(ig^(p+n) − α_{p+k})` on level-`p+n` probes.
pub fn verify_factorization(
    spec: &ChainSpec,
    p: usize,
    n: usize,
    probes: &[LevelProbe],
    grid: &Grid,
    tol: f64,
) -> Result<ResidualReport> {
    if n == 0 || p + n > spec.len() {
        return Err(Error::InvalidParameter(format!("factorization ({p}, {n}) out of range")));
    }
    let l: OpRef = Arc::new(spec.operator(p, p + n)?);
    let ld: OpRef = Arc::new(spec.operator(p, p + n)?.adjoint());
    let alphas = &spec.alphas()[p..p + n];
    let name = format!("factorization L{p}{}", p + n);
    let mut fields = Vec::with_capacity(probes.len());
    for probe in probes {
        let (first, second, level) = if probe.level == p {
            (&l, &ld, p)
        } else if probe.level == p + n {
            (&ld, &l, p + n)
        } else {
            return Err(Error::InvalidParameter(format!("probe level {} not in {{{p}, {}}}", probe.level, p + n)));
        };
        let lhs = Applied::new(second.clone(), Applied::new(first.clone(), probe.field.clone()));
        let rhs = shifted_product(spec.symmetry(level)?, alphas)
            .into_iter()
            .fold(probe.field.clone(), |acc, op| Applied::new(op, acc));
        fields.push((lhs, rhs, probe.field.clone()));
    }
    let cmps: Vec<Comparison<'_>> = fields
        .iter()
        .map(|(a, b, r)| Comparison {
            name: name.clone(),
            lhs: a.as_ref(),
            rhs: Some(b.as_ref()),
            reference: r.as_ref(),
        })
        .collect();
    let mut worst = ResidualReport::new(name.clone(), 0.0, 0.0, tol, (f64::NAN, f64::NAN));
    for r in field_differences(&cmps, grid, tol)? {
        if r.max_norm > worst.max_norm || r.max_norm.is_nan() {
            worst = r;
        }
    }
    worst.passed = worst.max_norm <= tol;
    Ok(worst)
}

/// The free-particle chain `(u_m, u_l)` with closed-form time factors
/// `√(1+t²)` per step and `1+t²` overall.
pub fn free_particle_chain(m: usize, l: usize) -> Result<ChainSpec> {
    let model = FreeParticleModel::new(m, l)?;
    let [a1, a2] = model.alphas();
    Ok(ChainSpec::new(vec![model.u_m(), model.u_l()], vec![a1, a2])?.with_time_factors(
        vec![model.time_factor(), model.time_factor()],
        TimeFactor::closed("1+t^2", |t| *t * *t + 1.0),
    ))
}

/// `Σ c_k f_k` helper for callers assembling probes.
pub fn combine(label: &str, terms: Vec<(C64, FieldRef)>) -> FieldRef {
    Arc::new(Combination::new(label, terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{psi_basis, u_transform, wronskian_um_ul, ClosedFormField};

    #[test]
    fn determinant_expansion() {
        let tw = Tower::VALUE;
        let c = |v: f64| Jet::constant(v, tw);
        let m = vec![vec![c(2.0), c(0.0), c(1.0)], vec![c(1.0), c(3.0), c(2.0)], vec![c(1.0), c(1.0), c(1.0)]];
        assert!((det(&m, tw).value() - C64::new(0.0, 0.0)).norm() < 1e-14);
        let m = vec![vec![c(2.0), c(0.0), c(1.0)], vec![c(1.0), c(3.0), c(2.0)], vec![c(1.0), c(1.0), c(4.0)]];
        assert!((det(&m, tw).value() - C64::new(18.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn wronskian_basics() {
        let u = u_transform(2).unwrap();
        let p = psi_basis(3).unwrap();
        let (x, t) = (0.4, 0.5);
        assert_eq!(wronskian(std::slice::from_ref(&u), x, t, 1).unwrap(), u.value(x, t).unwrap());
        assert!(wronskian(&[p.clone(), p.clone()], x, t, 2).unwrap().norm() < 1e-14);
        let a = wronskian(&[u.clone(), p.clone()], x, t, 2).unwrap();
        let b = wronskian(&[p.clone(), u.clone()], x, t, 2).unwrap();
        assert!((a + b).norm() < 1e-14);
    }

    #[test]
    fn closed_form_wronskian() {
        let spec = free_particle_chain(0, 3).unwrap();
        let w = wronskian_um_ul(0, 3).unwrap();
        for (x, t) in [(0.0, 0.0), (1.1, 0.5), (-2.4, -2.0)] {
            let a = wronskian(spec.functions(), x, t, 2).unwrap();
            let b = w.value(x, t).unwrap();
            assert!((a - b).norm() <= 1e-10 * b.norm(), "{a} vs {b}");
        }
    }

    #[test]
    fn ordering_rejected() {
        let g = Grid::new(8.0, 257, vec![0.0, 1.0]).unwrap();
        let model = FreeParticleModel::new(0, 1).unwrap();
        let [a1, a2] = model.alphas();
        let mut spec = ChainSpec::new(vec![model.u_l(), model.u_m()], vec![a2, a1]).unwrap();
        let r = spec.certify_complete_reducibility(&g).unwrap();
        assert!(!r.certified && !r.ordering_ok);
        assert!(spec.operator(0, 1).is_err());
    }

    #[test]
    fn single_function_chain() {
        let g = Grid::new(8.0, 257, vec![0.0, 1.0]).unwrap();
        let mut spec = ChainSpec::new(vec![u_transform(0).unwrap()], vec![-0.5]).unwrap();
        assert!(spec.certify_complete_reducibility(&g).unwrap().certified);
        for t in [0.0, 1.0, -0.5] {
            let a = potential_difference_n(&spec, 1, 0.7, t).unwrap();
            assert!((a + 1.0 / (1.0 + t * t)).abs() < 1e-12);
            assert!((time_factor_n(&spec, t).unwrap() - (1.0 + t * t).sqrt()).abs() < 1e-9);
        }
    }

    #[test]
    fn cubic_phase_chain_fails_reality() {
        let g = Grid::new(8.0, 257, vec![0.0, 1.0]).unwrap();
        // exp(ix³)·u_0 with u_0 written out
        let bad = ClosedFormField::new("exp(ix^3) u_0", |x, t| {
            let s = *t * *t + 1.0;
            let phase = (*x * *x * *x + *x * *x * *t * s.recip() * 0.25 + t.atan() * 0.5).scale(C64::i());
            s.powf(-0.25) * (phase + *x * *x * s.recip() * 0.25).exp()
        })
        .into_ref();
        let spec = ChainSpec::new(vec![bad, crate::fields::growing_solution(1).unwrap()], vec![-0.5, -1.5]).unwrap();
        assert!(!check_reality_n(&spec, &g, 1e-10).unwrap().passed);
    }
}
