#![allow(dead_code)]

use tdsusy::fields::Field;
use tdsusy::numerics::Grid;
use tdsusy::{Result, C64};

/// A 257-node grid over the default times; identities hold on any grid.
pub fn small_grid() -> Grid {
    Grid::default().with_nodes(257)
}

/// `max |a − b| / max |b|` over the grid, per time slice.
pub fn max_rel_diff(grid: &Grid, a: impl Fn(f64, f64) -> Result<C64>, b: impl Fn(f64, f64) -> Result<C64>) -> f64 {
    let mut worst = 0.0f64;
    for &t in grid.t_samples() {
        let (mut diff, mut scale) = (0.0f64, 0.0f64);
        for x in grid.x_nodes(t) {
            let (va, vb) = (a(x, t).unwrap(), b(x, t).unwrap());
            diff = diff.max((va - vb).norm());
            scale = scale.max(vb.norm());
        }
        worst = worst.max(diff / scale);
    }
    worst
}

/// The ratio `a/b` and its largest relative deviation over the grid, taken
/// where `|b|` is at least `1e−3` of its slice peak (the tails carry only
/// rounding).
pub fn ratio_spread(grid: &Grid, a: &dyn Field, b: &dyn Field) -> (C64, f64) {
    let mut c: Option<C64> = None;
    let mut spread = 0.0f64;
    for &t in grid.t_samples() {
        // only where b is well above rounding, i.e. the bulk of the slice
        let peak = grid.x_nodes(t).map(|x| b.value(x, t).unwrap().norm()).fold(0.0, f64::max);
        for x in grid.x_nodes(t) {
            let vb = b.value(x, t).unwrap();
            if vb.norm() < 1e-3 * peak {
                continue;
            }
            let r = a.value(x, t).unwrap() / vb;
            let c0 = *c.get_or_insert(r);
            spread = spread.max((r - c0).norm() / c0.norm());
        }
    }
    (c.unwrap(), spread)
}

pub fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * b.norm().max(1.0)
}
