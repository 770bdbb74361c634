//! Differentiable complex fields `f(x, t)` and real potentials `V(x, t)`.
//!
//! A field answers one question: its derivative tower at a point. Closed
//! forms build the tower by jet arithmetic; operator applications build it
//! from the towers of their inputs.

mod free_particle;
mod symmetry;

use std::fmt;
use std::sync::{Arc, Mutex};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::jet::{Jet, Tower, MAX_X_ORDER};

pub use free_particle::{
    chi_state, growing_solution, phi_state, potential_v1, potential_v2, psi_basis, u_transform, v_partner,
    wronskian_psi_ul, wronskian_um_ul, FreeParticleModel,
};
pub use symmetry::{apply_symmetry, ShiftTerm, SymmetryOp};

pub trait Field: Send + Sync {
    fn label(&self) -> String;

    /// Derivative tower of the field at `(x, t)`.
    fn eval(&self, x: f64, t: f64, tower: Tower) -> Result<Jet>;
}

pub type FieldRef = Arc<dyn Field>;

impl fmt::Debug for dyn Field + '_ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Field({})", self.label())
    }
}

/// Point values of a field and its low derivatives.
#[derive(Clone, Copy, Debug)]
pub struct Derivs {
    pub value: C64,
    pub dx: C64,
    pub dxx: C64,
    pub dt: C64,
}

impl dyn Field + '_ {
    pub fn value(&self, x: f64, t: f64) -> Result<C64> {
        Ok(self.eval(x, t, Tower::VALUE)?.value())
    }

    pub fn dx(&self, x: f64, t: f64) -> Result<C64> {
        Ok(self.eval(x, t, Tower::new(1, false))?.dx_n(1).expect("order 1"))
    }

    pub fn dxx(&self, x: f64, t: f64) -> Result<C64> {
        Ok(self.eval(x, t, Tower::new(2, false))?.dx_n(2).expect("order 2"))
    }

    pub fn dt(&self, x: f64, t: f64) -> Result<C64> {
        Ok(self.eval(x, t, Tower::new(0, true))?.dt().expect("t order"))
    }

    pub fn derivs(&self, x: f64, t: f64) -> Result<Derivs> {
        let j = self.eval(x, t, Tower::schrodinger())?;
        Ok(Derivs {
            value: j.value(),
            dx: j.dx_n(1).expect("order 1"),
            dxx: j.dx_n(2).expect("order 2"),
            dt: j.dt().expect("t order"),
        })
    }
}

pub(crate) fn check_tower(tower: Tower) -> Result<()> {
    if tower.x > MAX_X_ORDER {
        return Err(Error::TowerTooShallow { requested: tower.x, available: MAX_X_ORDER });
    }
    Ok(())
}

type JetFn = dyn Fn(&Jet, &Jet) -> Jet + Send + Sync;

/// Values that can be cut back to a shallower tower.
pub(crate) trait Truncate: Clone {
    fn tower(&self) -> Tower;
    fn truncate(&self, tower: Tower) -> Self;
}

impl Truncate for Jet {
    fn tower(&self) -> Tower {
        Jet::tower(self)
    }

    fn truncate(&self, tower: Tower) -> Self {
        Jet::truncate(self, tower)
    }
}

impl Truncate for Vec<Jet> {
    fn tower(&self) -> Tower {
        self.first().map_or(Tower::VALUE, |j| j.tower())
    }

    fn truncate(&self, tower: Tower) -> Self {
        self.iter().map(|j| j.truncate(tower)).collect()
    }
}

/// Remembers the deepest tower computed at the most recent point. Nested
/// operators query the same field at one point with varying depth.
pub(crate) struct PointMemo<T = Jet> {
    last: Mutex<Option<(u64, u64, T)>>,
}

impl<T> Default for PointMemo<T> {
    fn default() -> Self {
        Self { last: Mutex::new(None) }
    }
}

impl<T: Truncate> PointMemo<T> {
    pub fn get_or(&self, x: f64, t: f64, tower: Tower, compute: impl FnOnce(Tower) -> Result<T>) -> Result<T> {
        let key = (x.to_bits(), t.to_bits());
        let mut want = tower;
        if let Some((kx, kt, j)) = self.last.lock().expect("memo poisoned").as_ref() {
            if (*kx, *kt) == key {
                let have = j.tower();
                if have.x >= tower.x && (have.t || !tower.t) {
                    return Ok(j.truncate(tower));
                }
                want = Tower::new(have.x.max(tower.x), have.t || tower.t);
            }
        }
        let j = compute(want)?;
        let out = j.truncate(tower);
        *self.last.lock().expect("memo poisoned") = Some((key.0, key.1, j));
        Ok(out)
    }
}

/// A field given by an analytic expression in the coordinate jets `(x, t)`.
#[derive(Clone)]
pub struct ClosedFormField {
    label: String,
    expr: Arc<JetFn>,
    memo: Arc<PointMemo>,
}

impl ClosedFormField {
    pub fn new(label: impl Into<String>, expr: impl Fn(&Jet, &Jet) -> Jet + Send + Sync + 'static) -> Self {
        Self { label: label.into(), expr: Arc::new(expr), memo: Arc::default() }
    }

    pub fn into_ref(self) -> FieldRef {
        Arc::new(self)
    }
}

impl Field for ClosedFormField {
    fn label(&self) -> String {
        self.label.clone()
    }

    fn eval(&self, x: f64, t: f64, tower: Tower) -> Result<Jet> {
        check_tower(tower)?;
        self.memo.get_or(x, t, tower, |tower| {
            let j = (self.expr)(&Jet::var_x(x, tower), &Jet::var_t(t, tower));
            if !j.is_finite() {
                return Err(Error::Node { label: self.label.clone(), x, t, modulus: f64::NAN });
            }
            Ok(j)
        })
    }
}

/// `Σ c_k f_k`.
pub struct Combination {
    label: String,
    terms: Vec<(C64, FieldRef)>,
}

impl Combination {
    pub fn new(label: impl Into<String>, terms: Vec<(C64, FieldRef)>) -> Self {
        Self { label: label.into(), terms }
    }

    pub fn scaled(c: C64, f: FieldRef) -> FieldRef {
        let label = format!("({c})·{}", f.label());
        Arc::new(Self::new(label, vec![(c, f)]))
    }
}

impl Field for Combination {
    fn label(&self) -> String {
        self.label.clone()
    }

    fn eval(&self, x: f64, t: f64, tower: Tower) -> Result<Jet> {
        let mut acc = Jet::zero(tower);
        for (c, f) in &self.terms {
            acc += f.eval(x, t, tower)?.scale(*c);
        }
        Ok(acc)
    }
}

/// `z = x/√(1+t²)` with its Jacobian `∂z/∂x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledCoordinate {
    pub z: f64,
    pub jacobian: f64,
}

impl ScaledCoordinate {
    pub fn from_x(x: f64, t: f64) -> Self {
        let jacobian = 1.0 / (1.0 + t * t).sqrt();
        Self { z: x * jacobian, jacobian }
    }

    pub fn to_x(z: f64, t: f64) -> f64 {
        z * (1.0 + t * t).sqrt()
    }
}

/// A real potential `V(x, t)`, evaluated as a real-valued jet.
pub trait Potential: Send + Sync {
    fn label(&self) -> String;
    fn eval(&self, x: f64, t: f64, tower: Tower) -> Result<Jet>;
}

pub type PotentialRef = Arc<dyn Potential>;

impl dyn Potential + '_ {
    pub fn value(&self, x: f64, t: f64) -> Result<f64> {
        Ok(self.eval(x, t, Tower::VALUE)?.value().re)
    }

    /// Imaginary part of the defining complex expression before projection.
    pub fn imaginary_part(&self, x: f64, t: f64) -> Result<f64> {
        Ok(self.eval(x, t, Tower::VALUE)?.value().im)
    }
}

/// Potential defined by a closed-form complex expression.
///
/// `eval` keeps the raw expression so its reality can be audited; `value`
/// projects onto the real axis.
pub struct PotentialField {
    label: String,
    /// Transformation depth: 1 for `V1`, 2 for `V2`.
    pub order: usize,
    pub params: (usize, Option<usize>),
    expr: Arc<JetFn>,
}

impl PotentialField {
    pub fn new(
        label: impl Into<String>,
        order: usize,
        params: (usize, Option<usize>),
        expr: impl Fn(&Jet, &Jet) -> Jet + Send + Sync + 'static,
    ) -> Self {
        Self { label: label.into(), order, params, expr: Arc::new(expr) }
    }
}

impl Potential for PotentialField {
    fn label(&self) -> String {
        self.label.clone()
    }

    fn eval(&self, x: f64, t: f64, tower: Tower) -> Result<Jet> {
        check_tower(tower)?;
        let j = (self.expr)(&Jet::var_x(x, tower), &Jet::var_t(t, tower));
        if !j.is_finite() {
            return Err(Error::Node { label: self.label.clone(), x, t, modulus: f64::NAN });
        }
        Ok(j)
    }
}

pub struct ZeroPotential;

impl Potential for ZeroPotential {
    fn label(&self) -> String {
        "0".into()
    }
    fn eval(&self, _x: f64, _t: f64, tower: Tower) -> Result<Jet> {
        Ok(Jet::zero(tower))
    }
}

/// `Σ V_k + c`.
pub struct SumPotential {
    pub parts: Vec<PotentialRef>,
    pub constant: f64,
}

impl Potential for SumPotential {
    fn label(&self) -> String {
        let mut s: Vec<String> = self.parts.iter().map(|p| p.label()).collect();
        if self.constant != 0.0 {
            s.push(format!("{}", self.constant));
        }
        s.join(" + ")
    }

    fn eval(&self, x: f64, t: f64, tower: Tower) -> Result<Jet> {
        let mut acc = Jet::constant(self.constant, tower);
        for p in &self.parts {
            acc += p.eval(x, t, tower)?;
        }
        Ok(acc)
    }
}

/// `V + c`; used for negative controls.
pub fn shifted(v: PotentialRef, c: f64) -> PotentialRef {
    if c == 0.0 {
        return v;
    }
    Arc::new(SumPotential { parts: vec![v], constant: c })
}
