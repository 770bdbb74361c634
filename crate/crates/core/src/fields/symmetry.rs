use num_complex::Complex64 as C64;

use crate::darboux::TimeFactor;
use crate::error::Result;
use crate::fields::{Field, PotentialRef};
use crate::jet::{Jet, Tower};
use crate::ops::LinearOp;

/// One step's contribution `L_k(t)² A_k(x, t)` to a level's symmetry shift.
#[derive(Clone)]
pub struct ShiftTerm {
    pub time_factor: TimeFactor,
    pub potential: PotentialRef,
}

/// Symmetry operator `g^(p)` of the level-`p` Schrödinger equation:
///
/// `g^(p) = i(1+t²)∂x² + tx∂x + t/2 − ix²/4 − i Σ_k L_k(t)² A_k(x,t)`.
///
/// Level 0 (no shift terms) is the free-particle operator `K₋₂ − K₂`.
#[derive(Clone)]
pub struct SymmetryOp {
    pub level: usize,
    pub shifts: Vec<ShiftTerm>,
}

impl SymmetryOp {
    pub fn free_particle() -> Self {
        Self { level: 0, shifts: Vec::new() }
    }

    pub fn with_shifts(level: usize, shifts: Vec<ShiftTerm>) -> Self {
        Self { level, shifts }
    }

    /// `Σ L_k(t)² A_k(x, t)` as a real jet.
    pub fn potential_shift(&self, x: f64, t: f64, tower: Tower) -> Result<Jet> {
        let mut acc = Jet::zero(tower);
        for s in &self.shifts {
            let l = s.time_factor.jet(t, tower)?;
            acc += l * l * s.potential.eval(x, t, tower)?.re();
        }
        Ok(acc)
    }
}

impl LinearOp for SymmetryOp {
    fn label(&self) -> String {
        format!("g{}", self.level)
    }

    fn order(&self) -> usize {
        2
    }

    fn apply_at(&self, f: &dyn Field, x: f64, t: f64, tower: Tower) -> Result<Jet> {
        let i = C64::i();
        let fj = f.eval(x, t, tower.deeper(2))?;
        let f1 = fj.dx();
        let f2 = f1.dx();
        let xj = Jet::var_x(x, tower);
        let tj = Jet::var_t(t, tower);
        let mut g = f2 * (tj * tj + 1.0).scale(i) + f1 * tj * xj + fj * tj.scale(0.5) - fj * (xj * xj).scale(i * 0.25);
        if !self.shifts.is_empty() {
            g = g - fj * self.potential_shift(x, t, tower)?.scale(i);
        }
        Ok(g)
    }
}

/// `(g^(p) f)(x, t)`.
pub fn apply_symmetry(op: &SymmetryOp, f: &dyn Field, x: f64, t: f64) -> Result<C64> {
    Ok(op.apply_at(f, x, t, Tower::VALUE)?.value())
}
