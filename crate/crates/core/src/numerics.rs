//! Grids, trapezoid quadrature, residual norms and finite-difference oracles.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{Field, Potential};
use crate::jet::Tower;

/// Sample grid, uniform in the scaled coordinate `z = x/√(1+t²)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", try_from = "RawGrid")]
pub struct Grid {
    z_max: f64,
    n_x: usize,
    t_samples: Vec<f64>,
}

impl Grid {
    pub const DEFAULT_Z_MAX: f64 = 10.0;
    pub const DEFAULT_N_X: usize = 1025;
    pub const DEFAULT_T: [f64; 5] = [0.0, 0.5, -0.5, 2.0, -2.0];

    pub fn new(z_max: f64, n_x: usize, t_samples: Vec<f64>) -> Result<Self> {
        if !(z_max >= 8.0) || !z_max.is_finite() {
            return Err(Error::InvalidGrid(format!("zmax = {z_max} must be finite and >= 8")));
        }
        if n_x < 257 || n_x.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("nx = {n_x} must be odd and >= 257")));
        }
        if t_samples.is_empty() || t_samples.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidGrid("t samples must be finite and non-empty".into()));
        }
        Ok(Self { z_max, n_x, t_samples })
    }

    /// Same domain with `n_x` nodes (odd, at least 3); for expensive sweeps.
    pub fn with_nodes(&self, n_x: usize) -> Self {
        let n_x = (n_x.max(3)) | 1;
        Self { z_max: self.z_max, n_x, t_samples: self.t_samples.clone() }
    }

    pub fn with_times(&self, t_samples: Vec<f64>) -> Self {
        Self { z_max: self.z_max, n_x: self.n_x, t_samples }
    }

    pub fn z_max(&self) -> f64 {
        self.z_max
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn t_samples(&self) -> &[f64] {
        &self.t_samples
    }

    pub fn h_z(&self) -> f64 {
        2.0 * self.z_max / (self.n_x - 1) as f64
    }

    pub fn h_x(&self, t: f64) -> f64 {
        self.h_z() * (1.0 + t * t).sqrt()
    }

    pub fn z_nodes(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.h_z();
        let half = (self.n_x / 2) as isize;
        (-half..=half).map(move |k| k as f64 * h)
    }

    pub fn x_nodes(&self, t: f64) -> impl Iterator<Item = f64> + '_ {
        let s = (1.0 + t * t).sqrt();
        self.z_nodes().map(move |z| z * s)
    }

    /// All `(x, t)` nodes, `t`-major.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.t_samples.iter().flat_map(move |&t| self.x_nodes(t).map(move |x| (x, t)))
    }
}

/// Unvalidated mirror of [`Grid`] for deserialization.
#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct RawGrid {
    z_max: f64,
    n_x: usize,
    t_samples: Vec<f64>,
}

impl TryFrom<RawGrid> for Grid {
    type Error = Error;

    fn try_from(r: RawGrid) -> Result<Self> {
        Grid::new(r.z_max, r.n_x, r.t_samples)
    }
}

impl Default for Grid {
    fn default() -> Self {
        Self::new(Self::DEFAULT_Z_MAX, Self::DEFAULT_N_X, Self::DEFAULT_T.to_vec()).expect("valid defaults")
    }
}

/// Trapezoid rule on the truncated scaled domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QuadratureRule {
    /// Largest admissible `|integrand|` at the domain edge relative to its peak.
    pub decay_threshold: f64,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self { decay_threshold: 1e-10 }
    }
}

/// Named residual with its pass/fail verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ResidualReport {
    pub name: String,
    #[serde(with = "crate::nonfinite")]
    pub max_norm: f64,
    #[serde(with = "crate::nonfinite")]
    pub l2_norm: f64,
    #[serde(with = "crate::nonfinite")]
    pub tolerance: f64,
    pub passed: bool,
    #[serde(with = "crate::nonfinite")]
    pub worst_point: (f64, f64),
    #[serde(default, skip_serializing_if = "Option::is_none", with = "crate::nonfinite")]
    pub observed_order: Option<f64>,
    /// Diagnostic for a check that could not be evaluated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ResidualReport {
    pub fn new(name: impl Into<String>, max_norm: f64, l2_norm: f64, tolerance: f64, worst_point: (f64, f64)) -> Self {
        Self {
            name: name.into(),
            max_norm,
            l2_norm,
            tolerance,
            passed: max_norm <= tolerance,
            worst_point,
            observed_order: None,
            note: None,
        }
    }

    /// A check whose evaluation itself failed; never passes.
    pub fn errored(name: impl Into<String>, tolerance: f64, err: &Error) -> Self {
        let mut r = Self::new(name, f64::INFINITY, f64::INFINITY, tolerance, (f64::NAN, f64::NAN));
        r.passed = false;
        r.note = Some(err.to_string());
        r
    }

    /// A check without a spatial residual (counts, orderings, exact identities).
    pub fn verdict(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self::new(name, value, value, tolerance, (f64::NAN, f64::NAN))
    }
}

/// Running max/L2 accumulator over grid points.
#[derive(Default)]
pub(crate) struct Accum {
    max: f64,
    sum_sq: f64,
    count: usize,
    worst: (f64, f64),
}

impl Accum {
    pub fn push(&mut self, r: f64, at: (f64, f64)) {
        let r = if r.is_nan() { f64::INFINITY } else { r };
        if r > self.max || self.count == 0 {
            self.max = self.max.max(r);
            self.worst = at;
        }
        self.sum_sq += r * r;
        self.count += 1;
    }

    pub fn report(&self, name: impl Into<String>, tol: f64) -> ResidualReport {
        let l2 = if self.count == 0 { 0.0 } else { (self.sum_sq / self.count as f64).sqrt() };
        ResidualReport::new(name, self.max, l2, tol, self.worst)
    }
}

/// Values of `f` on the `x` nodes of time slice `t`.
pub fn sample(f: &dyn Field, grid: &Grid, t: f64) -> Result<Vec<C64>> {
    grid.x_nodes(t).map(|x| f.value(x, t)).collect()
}

fn trapezoid(values: &[C64], h: f64) -> C64 {
    let n = values.len();
    let inner: C64 = values[1..n - 1].iter().sum();
    (inner + (values[0] + values[n - 1]) * 0.5) * h
}

/// Integral of sampled `f* g` with edge-decay check; returns full- and
/// half-resolution values.
fn integrate_products(fs: &[C64], gs: &[C64], h: f64, t: f64, rule: &QuadratureRule) -> Result<(C64, C64)> {
    let prod: Vec<C64> = fs.iter().zip(gs).map(|(a, b)| a.conj() * b).collect();
    let peak = prod.iter().map(|p| p.norm()).fold(0.0, f64::max);
    let edge = prod[0].norm().max(prod[prod.len() - 1].norm());
    if !peak.is_finite() || (peak > 0.0 && edge > rule.decay_threshold * peak) {
        return Err(Error::NonDecaying { t, ratio: if peak > 0.0 { edge / peak } else { f64::INFINITY } });
    }
    let full = trapezoid(&prod, h);
    let half: Vec<C64> = prod.iter().step_by(2).copied().collect();
    Ok((full, trapezoid(&half, 2.0 * h)))
}

/// [`inner_product_certified`] from values already sampled on slice `t`.
pub(crate) fn certified_from_samples(
    fs: &[C64],
    gs: &[C64],
    t: f64,
    grid: &Grid,
    rule: &QuadratureRule,
) -> Result<CertifiedIntegral> {
    let (value, half_resolution) = integrate_products(fs, gs, grid.h_x(t), t, rule)?;
    Ok(CertifiedIntegral { value, half_resolution })
}

/// `⟨f, g⟩ = ∫ f*(x,t) g(x,t) dx` with its half-resolution re-evaluation.
#[derive(Clone, Copy, Debug)]
pub struct CertifiedIntegral {
    pub value: C64,
    pub half_resolution: C64,
}

impl CertifiedIntegral {
    pub fn discrepancy(&self) -> f64 {
        (self.value - self.half_resolution).norm()
    }
}

pub fn inner_product_certified(
    f: &dyn Field,
    g: &dyn Field,
    t: f64,
    grid: &Grid,
    rule: &QuadratureRule,
) -> Result<CertifiedIntegral> {
    let fs = sample(f, grid, t)?;
    let gs = sample(g, grid, t)?;
    let (value, half_resolution) = integrate_products(&fs, &gs, grid.h_x(t), t, rule)?;
    Ok(CertifiedIntegral { value, half_resolution })
}

pub fn inner_product(f: &dyn Field, g: &dyn Field, t: f64, grid: &Grid, rule: &QuadratureRule) -> Result<C64> {
    Ok(inner_product_certified(f, g, t, grid, rule)?.value)
}

/// `G_jk = ⟨f_j, f_k⟩`.
pub fn gram_matrix(basis: &[&dyn Field], t: f64, grid: &Grid, rule: &QuadratureRule) -> Result<Vec<Vec<C64>>> {
    let samples: Vec<Vec<C64>> = basis.iter().map(|f| sample(*f, grid, t)).collect::<Result<_>>()?;
    let h = grid.h_x(t);
    let n = basis.len();
    let mut g = vec![vec![C64::new(0.0, 0.0); n]; n];
    for j in 0..n {
        for k in j..n {
            let (v, _) = integrate_products(&samples[j], &samples[k], h, t, rule)?;
            g[j][k] = v;
            g[k][j] = v.conj();
        }
    }
    Ok(g)
}

/// Largest entrywise deviation of `g` from the identity.
pub fn identity_deviation(g: &[Vec<C64>]) -> f64 {
    let mut worst = 0.0f64;
    for (j, row) in g.iter().enumerate() {
        for (k, v) in row.iter().enumerate() {
            let want = if j == k { 1.0 } else { 0.0 };
            worst = worst.max((v - want).norm());
        }
    }
    worst
}

/// `(i∂t + ∂x² − V) f` over the grid, relative to `max|f|` per time slice.
/// The L2 entry is the relative L2 norm `‖r‖/‖f‖`.
pub fn schrodinger_residual(
    name: impl Into<String>,
    f: &dyn Field,
    v: Option<&dyn Potential>,
    grid: &Grid,
    tol: f64,
) -> Result<ResidualReport> {
    let mut acc = Accum::default();
    let mut l2_worst = 0.0f64;
    let i = C64::i();
    for &t in grid.t_samples() {
        let mut rows = Vec::with_capacity(grid.n_x());
        for x in grid.x_nodes(t) {
            let d = f.derivs(x, t)?;
            let pot = match v {
                Some(v) => v.value(x, t)?,
                None => 0.0,
            };
            rows.push((x, d.value, i * d.dt + d.dxx - d.value * pot));
        }
        let scale = rows.iter().map(|r| r.1.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let (mut rr, mut ff) = (0.0, 0.0);
        for (x, fv, r) in &rows {
            acc.push(r.norm() / scale, (*x, t));
            rr += r.norm_sqr();
            ff += fv.norm_sqr();
        }
        l2_worst = l2_worst.max((rr / ff.max(f64::MIN_POSITIVE)).sqrt());
    }
    let mut rep = acc.report(name, tol);
    rep.l2_norm = l2_worst;
    Ok(rep)
}

/// Pointwise `|lhs − rhs|` normalized per time slice by the larger of
/// `max|rhs|` and `max|reference|`.
pub fn field_difference(
    name: impl Into<String>,
    lhs: &dyn Field,
    rhs: Option<&dyn Field>,
    reference: &dyn Field,
    grid: &Grid,
    tol: f64,
) -> Result<ResidualReport> {
    let cmp = Comparison { name: name.into(), lhs, rhs, reference };
    Ok(field_differences(&[cmp], grid, tol)?.remove(0))
}

/// One `lhs = rhs` check for [`field_differences`].
pub struct Comparison<'a> {
    pub name: String,
    pub lhs: &'a dyn Field,
    /// `None` stands for zero.
    pub rhs: Option<&'a dyn Field>,
    pub reference: &'a dyn Field,
}

/// [`field_difference`] for many comparisons in one sweep. All fields are
/// evaluated at a point before moving on, so fields sharing memoized
/// subexpressions reuse them.
pub fn field_differences(cmps: &[Comparison<'_>], grid: &Grid, tol: f64) -> Result<Vec<ResidualReport>> {
    let mut acc: Vec<Accum> = cmps.iter().map(|_| Accum::default()).collect();
    for &t in grid.t_samples() {
        let xs: Vec<f64> = grid.x_nodes(t).collect();
        let mut diffs = vec![Vec::with_capacity(xs.len()); cmps.len()];
        let mut scale = vec![f64::MIN_POSITIVE; cmps.len()];
        for &x in &xs {
            for (k, c) in cmps.iter().enumerate() {
                let a = c.lhs.value(x, t)?;
                let b = match c.rhs {
                    Some(r) => r.value(x, t)?,
                    None => C64::new(0.0, 0.0),
                };
                let r = c.reference.value(x, t)?;
                scale[k] = scale[k].max(b.norm()).max(r.norm());
                diffs[k].push((a - b).norm());
            }
        }
        for (k, ds) in diffs.into_iter().enumerate() {
            for (&x, d) in xs.iter().zip(ds) {
                acc[k].push(d / scale[k], (x, t));
            }
        }
    }
    Ok(cmps.iter().zip(acc).map(|(c, a)| a.report(c.name.clone(), tol)).collect())
}

/// Which analytic derivatives [`fd_check`] compares.
#[derive(Clone, Copy, Debug)]
pub struct FdOrders {
    pub x1: bool,
    pub x2: bool,
    pub t1: bool,
}

impl FdOrders {
    pub const ALL: FdOrders = FdOrders { x1: true, x2: true, t1: true };
}

/// Base step of the finite-difference oracle (halved once).
pub const FD_STEP: f64 = 2e-2;
/// Errors below this are rounding-level; no order is demanded of them.
pub const FD_FLOOR: f64 = 1e-10;
/// Smallest accepted convergence order of the central differences.
pub const FD_MIN_ORDER: f64 = 1.9;

/// Compares analytic derivatives against central differences at probe
/// points `z ∈ {−2.5, −0.9, 0.35, 1.7}` on every grid time, with step
/// halving. Passes when the observed convergence order is at least
/// [`FD_MIN_ORDER`]: the tolerance is the error the half step must beat.
pub fn fd_check(name: impl Into<String>, f: &dyn Field, grid: &Grid, orders: FdOrders) -> Result<ResidualReport> {
    const PROBE_Z: [f64; 4] = [-2.5, -0.9, 0.35, 1.7];
    let mut err = [[0.0f64; 3]; 2];
    let mut worst = (f64::NAN, f64::NAN);
    for &t in grid.t_samples() {
        for z in PROBE_Z {
            let x = z * (1.0 + t * t).sqrt();
            let exact = f.derivs(x, t)?;
            let val = |x: f64, t: f64| f.value(x, t);
            let scale = exact.value.norm() + exact.dx.norm() + exact.dxx.norm() + exact.dt.norm();
            for (k, h) in [FD_STEP, FD_STEP / 2.0].into_iter().enumerate() {
                let (fp, fm, f0) = (val(x + h, t)?, val(x - h, t)?, exact.value);
                let mut e = [0.0; 3];
                if orders.x1 {
                    e[0] = ((fp - fm) / (2.0 * h) - exact.dx).norm() / scale;
                }
                if orders.x2 {
                    e[1] = ((fp - f0 * 2.0 + fm) / (h * h) - exact.dxx).norm() / scale;
                }
                if orders.t1 {
                    e[2] = ((val(x, t + h)? - val(x, t - h)?) / (2.0 * h) - exact.dt).norm() / scale;
                }
                for j in 0..3 {
                    if e[j] > err[k][j] {
                        err[k][j] = e[j];
                        if k == 1 {
                            worst = (x, t);
                        }
                    }
                }
            }
        }
    }
    // order ≥ MIN_ORDER ⇔ err(h/2) ≤ err(h)·2^−MIN_ORDER; rounding-level errors pass
    let mut order = f64::INFINITY;
    let (mut max_norm, mut tolerance, mut ratio) = (0.0, FD_FLOOR, 0.0);
    for (&coarse, &fine) in err[0].iter().zip(&err[1]) {
        if fine > FD_FLOOR {
            order = order.min((coarse / fine).log2());
        }
        let bound = (coarse * (-FD_MIN_ORDER).exp2()).max(FD_FLOOR);
        if fine / bound > ratio {
            (max_norm, tolerance, ratio) = (fine, bound, fine / bound);
        }
    }
    let mut rep = ResidualReport::new(name, max_norm, max_norm, tolerance, worst);
    rep.observed_order = order.is_finite().then_some(order);
    Ok(rep)
}

/// Evidence for the absence of zeros of `f` on the grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NodeReport {
    pub label: String,
    /// Smallest `|f|` found on the grid lines relative to the local scale
    /// `|f| + h|f'| + h²|f''|`.
    #[serde(with = "crate::nonfinite")]
    pub min_ratio: f64,
    /// `min|f| / max|f|` over the nodes of the worst time slice.
    #[serde(with = "crate::nonfinite")]
    pub global_ratio: f64,
    #[serde(with = "crate::nonfinite")]
    pub worst_point: (f64, f64),
    #[serde(with = "crate::nonfinite")]
    pub threshold: f64,
    pub passed: bool,
}

pub const NODE_THRESHOLD: f64 = 1e-10;

/// Searches every grid interval for a zero of `f`.
///
/// Each interval is screened with the local quadratic Taylor model; where the
/// model's closest approach to the origin falls inside the interval and is
/// small, it is refined by Newton steps on the field itself.
pub fn nodelessness(f: &dyn Field, grid: &Grid) -> Result<NodeReport> {
    let tower = Tower::new(2, false);
    let mut min_ratio = f64::INFINITY;
    let mut global_ratio = f64::INFINITY;
    let mut worst = (f64::NAN, f64::NAN);
    for &t in grid.t_samples() {
        let h = grid.h_x(t);
        let xs: Vec<f64> = grid.x_nodes(t).collect();
        let jets: Vec<_> = xs.iter().map(|&x| f.eval(x, t, tower)).collect::<Result<_>>()?;
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for (k, j) in jets.iter().enumerate() {
            let (f0, f1, f2) = (j.value(), j.dx_n(1).unwrap(), j.dx_n(2).unwrap());
            lo = lo.min(f0.norm());
            hi = hi.max(f0.norm());
            let scale = f0.norm() + h * f1.norm() + h * h * f2.norm();
            let mut ratio = if scale > 0.0 { f0.norm() / scale } else { 0.0 };
            if k + 1 < jets.len() && f1.norm() > 0.0 {
                let foot = -(f1.conj() * f0).re / f1.norm_sqr();
                if foot > 0.0 && foot < h {
                    let model = f0 + f1 * foot + f2 * (0.5 * foot * foot);
                    if model.norm() < 0.1 * scale {
                        ratio = ratio.min(refine_zero(f, xs[k], t, foot, h)? / scale);
                    }
                }
            }
            if ratio < min_ratio {
                min_ratio = ratio;
                worst = (xs[k], t);
            }
        }
        global_ratio = global_ratio.min(if hi > 0.0 { lo / hi } else { 0.0 });
    }
    Ok(NodeReport {
        label: f.label(),
        min_ratio,
        global_ratio,
        worst_point: worst,
        threshold: NODE_THRESHOLD,
        passed: min_ratio > NODE_THRESHOLD,
    })
}

fn refine_zero(f: &dyn Field, x0: f64, t: f64, mut s: f64, h: f64) -> Result<f64> {
    let mut best = f64::INFINITY;
    for _ in 0..8 {
        let j = f.eval(x0 + s, t, Tower::new(1, false))?;
        let (v, d) = (j.value(), j.dx_n(1).unwrap());
        best = best.min(v.norm());
        if d.norm() == 0.0 || v.norm() == 0.0 {
            break;
        }
        s = (s - (d.conj() * v).re / d.norm_sqr()).clamp(0.0, h);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{psi_basis, ClosedFormField};

    #[test]
    fn grid_invariants() {
        let g = Grid::default();
        let zs: Vec<f64> = g.z_nodes().collect();
        assert_eq!(zs.len(), 1025);
        assert_eq!(zs[512], 0.0);
        assert!((zs[0] + zs[1024]).abs() < 1e-12);
        assert!((zs[1024] - 10.0).abs() < 1e-12);
        assert!(Grid::new(7.0, 1025, vec![0.0]).is_err());
        assert!(Grid::new(10.0, 1024, vec![0.0]).is_err());
        assert!(Grid::new(10.0, 255, vec![0.0]).is_err());
        assert!(Grid::new(10.0, 257, vec![]).is_err());
        let t = 2.0;
        for (x, z) in g.x_nodes(t).zip(g.z_nodes()) {
            assert!((x / (1.0 + t * t).sqrt() - z).abs() < 1e-13);
        }
    }

    #[test]
    fn gaussian_inner_products() {
        let g = Grid::default();
        let rule = QuadratureRule::default();
        let p0 = psi_basis(0).unwrap();
        let p1 = psi_basis(1).unwrap();
        let n = inner_product_certified(p0.as_ref(), p0.as_ref(), 0.0, &g, &rule).unwrap();
        assert!((n.value - 1.0).norm() < 1e-8);
        assert!(n.discrepancy() < 1e-8);
        let o = inner_product(p0.as_ref(), p1.as_ref(), 0.0, &g, &rule).unwrap();
        assert!(o.norm() < 1e-9);
    }

    #[test]
    fn growing_integrand_is_refused() {
        let g = Grid::default();
        let f = ClosedFormField::new("exp(x^2/8)", |x, _| (*x * *x * 0.125).exp()).into_ref();
        let err = inner_product(f.as_ref(), f.as_ref(), 0.0, &g, &QuadratureRule::default()).unwrap_err();
        assert!(matches!(err, Error::NonDecaying { .. }));
    }

    #[test]
    fn single_function_gram_is_its_norm() {
        let g = Grid::default();
        let f = ClosedFormField::new("2 psi_0", |x, t| {
            let p = psi_basis(0).unwrap();
            let _ = (x, t);
            Jet::constant(0.0, x.tower()) + p.eval(x.value().re, t.value().re, x.tower()).unwrap() * 2.0
        });
        let m = gram_matrix(&[&f], 0.0, &g, &QuadratureRule::default()).unwrap();
        assert_eq!(m.len(), 1);
        assert!((m[0][0] - 4.0).norm() < 1e-8);
    }

    use crate::jet::Jet;

    #[test]
    fn fd_check_on_constant_and_hermite_fields() {
        let g = Grid::default();
        let c = ClosedFormField::new("const", |x, _| Jet::constant(C64::new(1.5, -0.5), x.tower()));
        let r = fd_check("const", &c, &g, FdOrders::ALL).unwrap();
        assert!(r.passed);
        assert!(r.max_norm <= FD_FLOOR);
        let p3 = psi_basis(3).unwrap();
        let r = fd_check("psi_3", p3.as_ref(), &g, FdOrders { x1: true, x2: true, t1: false }).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.observed_order.unwrap() >= 1.9);
    }

    #[test]
    fn nodelessness_flags_nodes() {
        let g = Grid::default();
        let p1 = psi_basis(1).unwrap();
        assert!(!nodelessness(p1.as_ref(), &g).unwrap().passed);
        let p0 = psi_basis(0).unwrap();
        assert!(nodelessness(p0.as_ref(), &g).unwrap().passed);
        // zero between grid nodes
        let off = ClosedFormField::new("x - 0.0123", |x, _| *x - 0.0123);
        assert!(!nodelessness(&off, &g).unwrap().passed);
        // complex, nodeless
        let c = ClosedFormField::new("x + i", |x, _| *x + C64::i());
        assert!(nodelessness(&c, &g).unwrap().passed);
    }
}
