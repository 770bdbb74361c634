//! Linear differential operators acting on fields.

use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::Result;
use crate::fields::{Field, FieldRef, PointMemo};
use crate::jet::{Jet, Tower};

pub trait LinearOp: Send + Sync {
    fn label(&self) -> String;

    /// Differential order in `x`; the input tower must be this much deeper.
    fn order(&self) -> usize;

    /// Tower of `(op f)` at `(x, t)`.
    fn apply_at(&self, f: &dyn Field, x: f64, t: f64, tower: Tower) -> Result<Jet>;
}

pub type OpRef = Arc<dyn LinearOp>;

/// The field `op f`.
pub struct Applied {
    pub op: OpRef,
    pub f: FieldRef,
    memo: PointMemo,
}

impl Applied {
    #[allow(clippy::new_ret_no_self)]
    pub fn new(op: OpRef, f: FieldRef) -> FieldRef {
        Arc::new(Self { op, f, memo: PointMemo::default() })
    }
}

impl Field for Applied {
    fn label(&self) -> String {
        format!("{}[{}]", self.op.label(), self.f.label())
    }

    fn eval(&self, x: f64, t: f64, tower: Tower) -> Result<Jet> {
        self.memo.get_or(x, t, tower, |tw| self.op.apply_at(self.f.as_ref(), x, t, tw))
    }
}

/// `scale·op + shift·I`.
pub struct AffineOp {
    pub op: OpRef,
    pub scale: C64,
    pub shift: C64,
}

impl LinearOp for AffineOp {
    fn label(&self) -> String {
        format!("({}·{} + {})", self.scale, self.op.label(), self.shift)
    }

    fn order(&self) -> usize {
        self.op.order()
    }

    fn apply_at(&self, f: &dyn Field, x: f64, t: f64, tower: Tower) -> Result<Jet> {
        let a = self.op.apply_at(f, x, t, tower)?;
        let b = f.eval(x, t, tower)?;
        Ok(a.scale(self.scale) + b.scale(self.shift))
    }
}

/// `ops[0] ∘ ops[1] ∘ … ∘ ops[n−1]`; the last one acts first.
pub struct Composed {
    pub ops: Vec<OpRef>,
}

impl LinearOp for Composed {
    fn label(&self) -> String {
        self.ops.iter().map(|o| o.label()).collect::<Vec<_>>().join("∘")
    }

    fn order(&self) -> usize {
        self.ops.iter().map(|o| o.order()).sum()
    }

    fn apply_at(&self, f: &dyn Field, x: f64, t: f64, tower: Tower) -> Result<Jet> {
        apply_chain(&self.ops, f, x, t, tower)
    }
}

fn apply_chain(ops: &[OpRef], f: &dyn Field, x: f64, t: f64, tower: Tower) -> Result<Jet> {
    match ops.split_first() {
        None => f.eval(x, t, tower),
        Some((outer, rest)) => {
            let inner = ChainTail { ops: rest, f };
            outer.apply_at(&inner, x, t, tower)
        }
    }
}

struct ChainTail<'a> {
    ops: &'a [OpRef],
    f: &'a dyn Field,
}

impl Field for ChainTail<'_> {
    fn label(&self) -> String {
        self.f.label()
    }

    fn eval(&self, x: f64, t: f64, tower: Tower) -> Result<Jet> {
        apply_chain(self.ops, self.f, x, t, tower)
    }
}
