//! Plain-Rust computations behind the browser exports.

use tdsusy::fields::{FieldRef, FreeParticleModel};
use tdsusy::numerics::Grid;
use tdsusy::suite::{run_spectrum, SuiteConfig};
use tdsusy::Result;

/// Sample count of the demo curves.
pub const SAMPLES: usize = 401;
/// Half-width of the plotted window in the scaled coordinate `z`.
pub const Z_WINDOW: f64 = 6.0;

/// `x` positions covering `|z| ≤ Z_WINDOW` at time `t`.
pub fn x_axis(t: f64) -> Vec<f64> {
    let half = Z_WINDOW * (1.0 + t * t).sqrt();
    let step = 2.0 * half / (SAMPLES - 1) as f64;
    (0..SAMPLES).map(|i| -half + step * i as f64).collect()
}

/// `V1` and `V2` on [`x_axis`], concatenated.
pub fn potentials(m: usize, l: usize, t: f64) -> Result<Vec<f64>> {
    let model = FreeParticleModel::new(m, l)?;
    let (v1, v2) = (model.v1(), model.v2());
    let xs = x_axis(t);
    let mut out = Vec::with_capacity(2 * xs.len());
    for v in [&v1, &v2] {
        for &x in &xs {
            out.push(v.value(x, t)?);
        }
    }
    Ok(out)
}

/// State `n` of level `p`: `ψ_n`, `φ_n` or `χ_n`.
pub fn state(model: &FreeParticleModel, level: usize, n: usize) -> FieldRef {
    match level {
        0 => model.psi(n),
        1 => model.phi(n),
        _ => model.chi(n),
    }
}

/// `|f|²` of a level state on [`x_axis`].
pub fn density(m: usize, l: usize, level: usize, n: usize, t: f64) -> Result<Vec<f64>> {
    let model = FreeParticleModel::new(m, l)?;
    let f = state(&model, level, n);
    x_axis(t).into_iter().map(|x| Ok(f.value(x, t)?.norm_sqr())).collect()
}

/// Spectrum of `S` on `K` states per level as JSON, on a coarse grid so the
/// browser stays responsive.
pub fn spectrum_json(m: usize, l: usize, states: usize) -> Result<String> {
    let mut cfg = SuiteConfig::new(m, l, states)?;
    cfg.grid = Grid::new(12.0, 385, vec![0.0, 1.0])?;
    let run = run_spectrum(&cfg)?;
    Ok(serde_json::to_string(&run).expect("report serializes"))
}
