//! Single-step time-dependent Darboux transformation
//! `L = L1(t)(∂x − u_x/u)` and its companions.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{Field, FieldRef, PointMemo, Potential};
use crate::jet::{Jet, Tower};
use crate::numerics::{nodelessness, Grid};
use crate::ops::{Applied, LinearOp};

/// Ratio in the node guard `|u| > NODE_GUARD·(|u| + |u_x|)`.
pub const NODE_GUARD: f64 = 1e-12;
/// Default tolerance on the spread of `∂x² arg u`.
pub const REALITY_TOL: f64 = 1e-10;

type TimeFn = dyn Fn(&Jet) -> Jet + Send + Sync;

/// Real time factor `L(t)` of a transformation operator.
#[derive(Clone)]
pub enum TimeFactor {
    /// Analytic expression in a `t`-jet.
    Closed { label: String, f: Arc<TimeFn> },
    /// `exp(2∫₀ᵗ Im ∂x² log u(x_ref, s) ds)`, so `L(0) = 1`.
    Integrated(Arc<IntegratedTimeFactor>),
    /// Product of factors, e.g. `L_{0,p} = L_1⋯L_p`.
    Product(Vec<TimeFactor>),
}

impl TimeFactor {
    pub fn closed(label: impl Into<String>, f: impl Fn(&Jet) -> Jet + Send + Sync + 'static) -> Self {
        Self::Closed { label: label.into(), f: Arc::new(f) }
    }

    pub fn integrated(source: FieldRef, x_ref: f64) -> Self {
        Self::Integrated(Arc::new(IntegratedTimeFactor::new(source, x_ref)))
    }

    /// `L1 ≡ 1`.
    pub fn unit() -> Self {
        Self::closed("1", |t| Jet::constant(1.0, t.tower()))
    }

    pub fn label(&self) -> String {
        match self {
            Self::Closed { label, .. } => label.clone(),
            Self::Integrated(i) => format!("exp(2∫Im(log {})_xx dt)", i.source.label()),
            Self::Product(v) => v.iter().map(|f| f.label()).collect::<Vec<_>>().join("·"),
        }
    }

    /// `L(t)` as a jet constant in `x`.
    pub fn jet(&self, t: f64, tower: Tower) -> Result<Jet> {
        match self {
            Self::Closed { f, .. } => Ok(f(&Jet::var_t(t, tower))),
            Self::Integrated(i) => {
                let (l, rate) = i.value_and_rate(t)?;
                let dt = Jet::var_t(t, tower) - t;
                Ok(Jet::constant(l, tower) + dt * (2.0 * rate * l))
            }
            Self::Product(v) => {
                let mut acc = Jet::constant(1.0, tower);
                for f in v {
                    acc = acc * f.jet(t, tower)?;
                }
                Ok(acc)
            }
        }
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        Ok(self.jet(t, Tower::VALUE)?.value().re)
    }
}

impl std::fmt::Debug for TimeFactor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "TimeFactor({})", self.label())
    }
}

/// Numerically integrated time factor with a per-`t` cache.
pub struct IntegratedTimeFactor {
    pub source: FieldRef,
    pub x_ref: f64,
    tolerance: f64,
    cache: Mutex<HashMap<u64, f64>>,
}

impl IntegratedTimeFactor {
    pub fn new(source: FieldRef, x_ref: f64) -> Self {
        Self { source, x_ref, tolerance: 1e-12, cache: Mutex::new(HashMap::new()) }
    }

    /// `c(t) = Im ∂x² log u` at the reference point.
    pub fn rate(&self, t: f64) -> Result<f64> {
        phase_curvature(self.source.as_ref(), self.x_ref, t)
    }

    fn value_and_rate(&self, t: f64) -> Result<(f64, f64)> {
        let rate = self.rate(t)?;
        if let Some(v) = self.cache.lock().expect("cache poisoned").get(&t.to_bits()) {
            return Ok((*v, rate));
        }
        let integral = self.integrate(0.0, t)?;
        let v = (2.0 * integral).exp();
        self.cache.lock().expect("cache poisoned").insert(t.to_bits(), v);
        Ok((v, rate))
    }

    fn integrate(&self, a: f64, b: f64) -> Result<f64> {
        if a == b {
            return Ok(0.0);
        }
        let (fa, fm, fb) = (self.rate(a)?, self.rate(0.5 * (a + b))?, self.rate(b)?);
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        self.adaptive(a, b, [fa, fm, fb], whole, self.tolerance, 0)
    }

    /// Simpson bisection with a Richardson-corrected estimate.
    fn adaptive(&self, a: f64, b: f64, f: [f64; 3], whole: f64, tol: f64, depth: usize) -> Result<f64> {
        let c = 0.5 * (a + b);
        let (fl, fr) = (self.rate(0.5 * (a + c))?, self.rate(0.5 * (c + b))?);
        let left = (c - a) / 6.0 * (f[0] + 4.0 * fl + f[1]);
        let right = (b - c) / 6.0 * (f[1] + 4.0 * fr + f[2]);
        let err = (left + right - whole) / 15.0;
        // a few forced levels keep inflection points from faking convergence
        if (depth >= 3 && err.abs() <= tol) || depth >= 40 {
            return Ok(left + right + err);
        }
        Ok(self.adaptive(a, c, [f[0], fl, f[1]], left, 0.5 * tol, depth + 1)?
            + self.adaptive(c, b, [f[1], fr, f[2]], right, 0.5 * tol, depth + 1)?)
    }
}

/// Value, `u_x/u` and its derivatives at `tower`, guarded against nodes.
pub(crate) fn log_derivative(u: &dyn Field, x: f64, t: f64, tower: Tower) -> Result<Jet> {
    let uj = u.eval(x, t, tower.deeper(1))?;
    let (v, d) = (uj.value(), uj.dx_n(1).expect("order 1"));
    if !(v.norm() > NODE_GUARD * (v.norm() + d.norm())) {
        return Err(Error::Node { label: u.label(), x, t, modulus: v.norm() });
    }
    Ok(uj.dx() * uj.truncate(tower).recip())
}

/// `Im ∂x² log u` at `(x, t)`.
pub fn phase_curvature(u: &dyn Field, x: f64, t: f64) -> Result<f64> {
    Ok(log_derivative(u, x, t, Tower::new(1, false))?.dx_n(1).expect("order 1").im)
}

/// First-order Darboux operator built from a transformation function.
#[derive(Clone)]
pub struct FirstOrderOp {
    source: FieldRef,
    time_factor: TimeFactor,
    adjoint: bool,
    /// `u_x/u`, shared with clones and the adjoint.
    log_memo: Arc<PointMemo>,
}

impl FirstOrderOp {
    /// Operator from `u` and `L1` without the nodelessness/reality screening
    /// of [`build_operator`].
    pub fn from_parts(source: FieldRef, time_factor: TimeFactor) -> Self {
        Self { source, time_factor, adjoint: false, log_memo: Arc::default() }
    }

    pub fn source(&self) -> &FieldRef {
        &self.source
    }

    pub fn time_factor(&self) -> &TimeFactor {
        &self.time_factor
    }

    pub fn is_adjoint(&self) -> bool {
        self.adjoint
    }

    pub fn adjoint(&self) -> Self {
        Self { adjoint: !self.adjoint, ..self.clone() }
    }

    /// `u_x/u` at a point.
    pub fn log_derivative(&self, x: f64, t: f64) -> Result<num_complex::Complex64> {
        Ok(log_derivative(self.source.as_ref(), x, t, Tower::VALUE)?.value())
    }
}

impl LinearOp for FirstOrderOp {
    fn label(&self) -> String {
        let base = format!("L[{}]", self.source.label());
        if self.adjoint {
            format!("{base}+")
        } else {
            base
        }
    }

    fn order(&self) -> usize {
        1
    }

    fn apply_at(&self, f: &dyn Field, x: f64, t: f64, tower: Tower) -> Result<Jet> {
        let w = self.log_memo.get_or(x, t, tower, |tw| log_derivative(self.source.as_ref(), x, t, tw))?;
        let fj = f.eval(x, t, tower.deeper(1))?;
        let (fx, f0) = (fj.dx(), fj.truncate(tower));
        let l1 = self.time_factor.jet(t, tower)?;
        Ok(if self.adjoint { -(l1 * (w.conj() * f0 + fx)) } else { l1 * (fx - w * f0) })
    }
}

/// Outcome of the phase-curvature reality test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RealityReport {
    pub label: String,
    #[serde(with = "crate::nonfinite")]
    pub max_spread: f64,
    pub passed: bool,
    #[serde(with = "crate::nonfinite")]
    pub tolerance: f64,
    /// `(t, spread)` per time slice.
    #[serde(with = "crate::nonfinite")]
    pub per_t: Vec<(f64, f64)>,
}

/// Spread over `x` of `∂x² arg u = Im ∂x² log u`, per grid time.
pub fn check_reality(u: &dyn Field, grid: &Grid, tol: f64) -> Result<RealityReport> {
    let mut per_t = Vec::with_capacity(grid.t_samples().len());
    for &t in grid.t_samples() {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for x in grid.x_nodes(t) {
            let c = phase_curvature(u, x, t)?;
            lo = lo.min(c);
            hi = hi.max(c);
        }
        per_t.push((t, if lo.is_finite() && hi.is_finite() { hi - lo } else { f64::INFINITY }));
    }
    let max_spread = per_t.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(RealityReport { label: u.label(), max_spread, passed: max_spread <= tol, tolerance: tol, per_t })
}

/// Screens `u` (nodeless, reality condition) and builds `L`. Without a
/// closed-form time factor, `L1` is integrated from the phase curvature.
pub fn build_operator(u: FieldRef, time_factor: Option<TimeFactor>, grid: &Grid) -> Result<FirstOrderOp> {
    let nodes = nodelessness(u.as_ref(), grid)?;
    if !nodes.passed {
        let (x, t) = nodes.worst_point;
        return Err(Error::Node { label: u.label(), x, t, modulus: nodes.min_ratio });
    }
    let reality = check_reality(u.as_ref(), grid, REALITY_TOL)?;
    if !reality.passed {
        return Err(Error::RealityViolated { label: u.label(), spread: reality.max_spread, tolerance: REALITY_TOL });
    }
    let tf = time_factor.unwrap_or_else(|| TimeFactor::integrated(u.clone(), 0.0));
    Ok(FirstOrderOp::from_parts(u, tf))
}

/// The field `op f`.
pub fn apply(op: &FirstOrderOp, f: FieldRef) -> FieldRef {
    Applied::new(Arc::new(op.clone()), f)
}

/// `A = −∂x² log|u|²` as a potential.
pub struct PotentialDifference {
    pub source: FieldRef,
    memo: PointMemo,
}

impl PotentialDifference {
    pub fn new(source: FieldRef) -> Self {
        Self { source, memo: PointMemo::default() }
    }
}

impl Potential for PotentialDifference {
    fn label(&self) -> String {
        format!("A[{}]", self.source.label())
    }

    fn eval(&self, x: f64, t: f64, tower: Tower) -> Result<Jet> {
        self.memo.get_or(x, t, tower, |tw| {
            let w = log_derivative(self.source.as_ref(), x, t, tw.deeper(1))?;
            Ok(w.dx().re() * -2.0)
        })
    }
}

/// `−∂x² log|u|² = −2 Re(u_xx/u − (u_x/u)²)` at a point.
pub fn potential_difference(u: &dyn Field, x: f64, t: f64) -> Result<f64> {
    let w = log_derivative(u, x, t, Tower::new(1, false))?;
    Ok(-2.0 * w.dx_n(1).expect("order 1").re)
}

/// `v = 1/(L1 u*)`, annihilated by `L+`.
pub struct KernelPartner {
    source: FieldRef,
    time_factor: TimeFactor,
}

impl Field for KernelPartner {
    fn label(&self) -> String {
        format!("1/(L1 {}*)", self.source.label())
    }

    fn eval(&self, x: f64, t: f64, tower: Tower) -> Result<Jet> {
        let uj = self.source.eval(x, t, tower)?;
        if !(uj.value().norm() > 0.0) || !uj.is_finite() {
            return Err(Error::Node { label: self.source.label(), x, t, modulus: uj.value().norm() });
        }
        Ok((uj.conj() * self.time_factor.jet(t, tower)?).recip())
    }
}

pub fn kernel_partner(op: &FirstOrderOp) -> FieldRef {
    Arc::new(KernelPartner { source: op.source.clone(), time_factor: op.time_factor.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{u_transform, ClosedFormField, FreeParticleModel};
    use num_complex::Complex64 as C64;

    fn small_grid() -> Grid {
        Grid::new(8.0, 257, vec![0.0, 0.5, -2.0]).unwrap()
    }

    #[test]
    fn u0_operator_at_t0() {
        let op = FirstOrderOp::from_parts(u_transform(0).unwrap(), TimeFactor::unit());
        for x in [-1.3, 0.0, 0.7, 2.2] {
            let w = op.log_derivative(x, 0.0).unwrap();
            assert!((w - C64::new(x / 2.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn integrated_time_factor_matches_closed_form() {
        let tf = TimeFactor::integrated(u_transform(2).unwrap(), 0.0);
        for t in [0.0f64, 0.5, -0.5, 1.0, 2.0, -2.0] {
            let want = (1.0 + t * t).sqrt();
            assert!((tf.value(t).unwrap() - want).abs() < 1e-9, "t = {t}: {} vs {want}", tf.value(t).unwrap());
            let j = tf.jet(t, Tower::new(0, true)).unwrap();
            let d = j.dt().unwrap().re;
            assert!((d - t / want).abs() < 1e-8);
        }
    }

    #[test]
    fn potential_difference_of_u0_and_u2() {
        let u0 = u_transform(0).unwrap();
        for (x, t) in [(0.0, 0.0), (1.5, 0.5), (-3.0, 2.0)] {
            let a = potential_difference(u0.as_ref(), x, t).unwrap();
            assert!((a + 1.0 / (1.0 + t * t)).abs() < 1e-12);
        }
        let u2 = u_transform(2).unwrap();
        assert!((potential_difference(u2.as_ref(), 0.0, 0.0).unwrap() + 5.0).abs() < 1e-12);
    }

    #[test]
    fn reality_of_u_m_and_cubic_phase() {
        let g = small_grid();
        for m in [0, 2, 4] {
            let r = check_reality(u_transform(m).unwrap().as_ref(), &g, REALITY_TOL).unwrap();
            assert!(r.passed, "m = {m}: {r:?}");
        }
        let cubic = ClosedFormField::new("exp(ix^3)", |x, _| (*x * *x * *x).scale(C64::i()).exp());
        let r = check_reality(&cubic, &g, REALITY_TOL).unwrap();
        assert!(!r.passed);
    }

    #[test]
    fn build_rejects_nodes_and_cubic_phase() {
        let g = small_grid();
        let odd = crate::fields::growing_solution(1).unwrap();
        assert!(matches!(build_operator(odd, None, &g), Err(Error::Node { .. })));
        let cubic = ClosedFormField::new("exp(ix^3)", |x, _| (*x * *x * *x).scale(C64::i()).exp()).into_ref();
        assert!(matches!(build_operator(cubic, None, &g), Err(Error::RealityViolated { .. })));
    }

    #[test]
    fn kernels() {
        let model = FreeParticleModel::new(2, 3).unwrap();
        let op = FirstOrderOp::from_parts(model.u_m(), model.time_factor());
        let v = kernel_partner(&op);
        let adj = op.adjoint();
        for (x, t) in [(0.3, 0.0), (-2.0, 0.5), (4.0, -2.0)] {
            let lu = op.apply_at(model.u_m().as_ref(), x, t, Tower::VALUE).unwrap().value();
            let u = model.u_m().value(x, t).unwrap();
            assert!(lu.norm() <= 1e-12 * u.norm().max(1.0));
            let lv = adj.apply_at(v.as_ref(), x, t, Tower::VALUE).unwrap().value();
            assert!(lv.norm() <= 1e-12);
        }
    }
}
