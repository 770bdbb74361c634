//! The full verification suite for one free-particle chain `(m, l)`.
//!
//! Every check yields a [`ResidualReport`]; checks are grouped by the
//! property they certify. A check whose evaluation errors is reported as a
//! failure carrying the diagnostic, so one broken stage never hides others.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::chain::{free_particle_chain, ChainSpec, LevelProbe, WronskianField, WronskianPotential};
use crate::darboux::{check_reality, RealityReport};
use crate::error::{Error, Result};
use crate::fields::{wronskian_psi_ul, wronskian_um_ul, Combination, Field, FieldRef, FreeParticleModel, PotentialRef};
use crate::jet::{Jet, Tower};
use crate::numerics::{
    fd_check, field_difference, gram_matrix, identity_deviation, inner_product_certified, schrodinger_residual,
    FdOrders, Grid, QuadratureRule, ResidualReport,
};
use crate::ops::{Applied, OpRef};
use crate::superalgebra::{
    annihilation, build_superalgebra, conservation_check, model_probes, spectrum_report, spectrum_states,
    verify_algebra, SpectrumReport, SuperAlgebra, SuperState,
};

/// Number of probe indices per level in the algebra checks.
pub const ALGEBRA_PROBES: usize = 5;
/// Highest `n` in the norm identity.
pub const NORM_MAX_N: usize = 5;
/// Times at which Gram matrices are formed.
pub const GRAM_TIMES: [f64; 2] = [0.0, 2.0];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct Tolerances {
    /// Pointwise identities between analytic expressions.
    pub analytic: f64,
    /// Quadrature-based quantities (norms, Gram matrices, Rayleigh quotients).
    pub quadrature: f64,
    /// Operator identities involving products of supercharges.
    pub algebra: f64,
    /// Spread of `∂x² arg u`.
    pub reality: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { analytic: 1e-8, quadrature: 1e-6, algebra: 1e-7, reality: 1e-10 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    pub m: usize,
    pub l: usize,
    /// Number of basis states `K` per level.
    pub states: usize,
    pub grid: Grid,
    pub tolerances: Tolerances,
    /// Constant added to the first step's potential difference (negative control).
    pub perturbation: f64,
}

impl SuiteConfig {
    pub fn new(m: usize, l: usize, states: usize) -> Result<Self> {
        FreeParticleModel::new(m, l)?;
        if states < 3 {
            return Err(Error::InvalidParameter(format!("K = {states} must be at least 3")));
        }
        Ok(Self { m, l, states, grid: Grid::default(), tolerances: Tolerances::default(), perturbation: 0.0 })
    }
}

/// Checks certifying one property.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CheckGroup {
    pub criterion: u8,
    pub name: String,
    pub passed: bool,
    pub checks: Vec<ResidualReport>,
}

impl CheckGroup {
    fn new(criterion: u8, name: &str, checks: Vec<ResidualReport>) -> Self {
        let passed = !checks.is_empty() && checks.iter().all(|c| c.passed);
        Self { criterion, name: name.into(), passed, checks }
    }

    pub fn worst(&self) -> Option<&ResidualReport> {
        self.checks.iter().max_by(|a, b| ratio(a).total_cmp(&ratio(b)))
    }
}

fn ratio(r: &ResidualReport) -> f64 {
    if r.passed {
        r.max_norm / r.tolerance
    } else {
        f64::INFINITY
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SuiteReport {
    pub m: usize,
    pub l: usize,
    pub states: usize,
    pub perturbation: f64,
    pub passed: bool,
    pub groups: Vec<CheckGroup>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumReport>,
}

impl SuiteReport {
    pub fn group(&self, criterion: u8) -> Option<&CheckGroup> {
        self.groups.iter().find(|g| g.criterion == criterion)
    }
}

/// Runs `f`, turning an evaluation error into a failed report.
fn guard(name: &str, tol: f64, f: impl FnOnce() -> Result<ResidualReport>) -> ResidualReport {
    f().unwrap_or_else(|e| ResidualReport::errored(name, tol, &e))
}

fn named(mut r: ResidualReport, name: impl Into<String>) -> ResidualReport {
    r.name = name.into();
    r
}

fn reality_check(r: RealityReport) -> ResidualReport {
    named(ResidualReport::verdict("", r.max_spread, r.tolerance), format!("reality {}", r.label))
}

/// A potential viewed as a (real-valued) field so it can be compared pointwise.
struct PotentialAsField(PotentialRef);

impl Field for PotentialAsField {
    fn label(&self) -> String {
        self.0.label()
    }

    fn eval(&self, x: f64, t: f64, tower: Tower) -> Result<Jet> {
        Ok(self.0.eval(x, t, tower)?.re())
    }
}

/// Everything the checks share: the model, the certified chain, the algebra.
struct Context {
    cfg: SuiteConfig,
    model: FreeParticleModel,
    chain: ChainSpec,
    certification: ResidualReport,
    algebra: Result<SuperAlgebra>,
}

impl Context {
    fn new(cfg: &SuiteConfig) -> Result<Self> {
        let model = FreeParticleModel::new(cfg.m, cfg.l)?;
        let mut chain = free_particle_chain(cfg.m, cfg.l)?.with_perturbation(cfg.perturbation);
        let certification = match chain.certify_complete_reducibility(&cfg.grid) {
            Ok(r) => {
                let mut rep =
                    ResidualReport::verdict("complete reducibility", if r.certified { 0.0 } else { 1.0 }, 0.0);
                rep.note = r.reason;
                rep
            }
            Err(e) => ResidualReport::errored("complete reducibility", 0.0, &e),
        };
        let algebra = build_superalgebra(&chain);
        Ok(Self { cfg: cfg.clone(), model, chain, certification, algebra })
    }

    fn tol(&self) -> &Tolerances {
        &self.cfg.tolerances
    }

    fn grid(&self) -> &Grid {
        &self.cfg.grid
    }

    fn k(&self) -> usize {
        self.cfg.states
    }

    fn algebra(&self) -> Result<&SuperAlgebra> {
        self.algebra.as_ref().map_err(|e| Error::Uncertified(e.to_string()))
    }

    fn operator(&self, p: usize, q: usize) -> Result<OpRef> {
        Ok(Arc::new(self.chain.operator(p, q)?))
    }
}

/// Criterion 1: closed-form states solve their level equation.
fn residuals(c: &Context) -> Vec<ResidualReport> {
    let tol = c.tol().analytic;
    let mut fields: Vec<(FieldRef, usize)> = vec![(c.model.u_m(), 0), (c.model.u_l(), 0), (c.model.v_l(), 1)];
    for n in 0..c.k() {
        fields.push((c.model.psi(n), 0));
        fields.push((c.model.phi(n), 1));
        fields.push((c.model.chi(n), 2));
    }
    fields
        .into_iter()
        .map(|(f, level)| {
            let name = format!("{} at level {level}", f.label());
            guard(&name, tol, || {
                let v = c.model.potential(level);
                Ok(named(schrodinger_residual("", f.as_ref(), Some(v.as_ref()), c.grid(), tol)?, &name))
            })
        })
        .collect()
}

/// Criterion 2: transformed solutions solve the target equation.
fn intertwining(c: &Context) -> Vec<ResidualReport> {
    let tol = c.tol().analytic;
    let mut out = Vec::new();
    for (p, q, name) in [(0, 1, "L01"), (1, 2, "L12"), (0, 2, "L02")] {
        for n in 0..c.k() {
            let src = if p == 0 { c.model.psi(n) } else { c.model.phi(n) };
            let label = format!("{name} {} at level {q}", src.label());
            out.push(guard(&label, tol, || {
                let f = Applied::new(c.operator(p, q)?, src.clone());
                let v = c.model.potential(q);
                Ok(named(schrodinger_residual("", f.as_ref(), Some(v.as_ref()), c.grid(), tol)?, &label))
            }));
        }
    }
    // Supercharges map solutions of the matrix equation to solutions.
    for (q, n) in [(1, 2), (2, 0)] {
        let label = format!("conservation Q0{q} on psi_{n}");
        out.push(guard(&label, tol, || {
            let alg = c.algebra()?;
            let s = SuperState::single(3, 0, c.model.psi(n));
            let r = conservation_check(alg, alg.charge(0, q, false)?, &s, c.grid(), tol, tol)?;
            Ok(named(r, &label))
        }));
    }
    out
}

/// Criterion 3: reality of the transformation functions and the Wronskian.
fn reality(c: &Context) -> Vec<ResidualReport> {
    let tol = c.tol().reality;
    let mut out = vec![c.certification.clone()];
    let w: FieldRef = Arc::new(WronskianField::new(vec![c.model.u_m(), c.model.u_l()]));
    for f in [c.model.u_m(), c.model.v_l(), w] {
        let name = format!("reality {}", f.label());
        out.push(guard(&name, tol, || Ok(reality_check(check_reality(f.as_ref(), c.grid(), tol)?))));
    }
    out
}

/// `⟨f, f⟩` at `t` with its quadrature certificate enforced.
fn certified_norm(f: &dyn Field, t: f64, c: &Context) -> Result<f64> {
    let ip = inner_product_certified(f, f, t, c.grid(), &QuadratureRule::default())?;
    if ip.discrepancy() > c.tol().quadrature * ip.value.norm().max(1.0) {
        return Err(Error::QuadratureNotConverged { t, discrepancy: ip.discrepancy() });
    }
    Ok(ip.value.re)
}

/// Criterion 4: `‖L01 ψ_n‖² = (n+m+1)‖ψ_n‖²`.
fn norm_identity(c: &Context) -> Vec<ResidualReport> {
    let tol = c.tol().quadrature;
    (0..=NORM_MAX_N)
        .map(|n| {
            let name = format!("norm L01 psi_{n} = {}", n + c.model.m + 1);
            guard(&name, tol, || {
                let psi = c.model.psi(n);
                let lpsi = Applied::new(c.operator(0, 1)?, psi.clone());
                let want = (n + c.model.m + 1) as f64;
                let mut worst = (0.0f64, f64::NAN);
                for &t in c.grid().t_samples() {
                    let r = certified_norm(lpsi.as_ref(), t, c)? / certified_norm(psi.as_ref(), t, c)?;
                    let d = (r - want).abs();
                    if d > worst.0 || d.is_nan() {
                        worst = (d, t);
                    }
                }
                Ok(ResidualReport::new(name.clone(), worst.0, worst.0, tol, (f64::NAN, worst.1)))
            })
        })
        .collect()
}

/// Criterion 5: `L+L` and `LL+` as polynomials in the symmetry operators,
/// and the resulting eigenvalues on `ψ_n`.
fn factorization(c: &Context) -> Vec<ResidualReport> {
    let tol = c.tol().algebra;
    let k = c.k();
    let level_fields = |level: usize| -> Vec<LevelProbe> {
        (0..k)
            .map(|n| LevelProbe {
                level,
                field: match level {
                    0 => c.model.psi(n),
                    1 => c.model.phi(n),
                    _ => c.model.chi(n),
                },
            })
            .collect()
    };
    let mut out = Vec::new();
    for (p, n) in [(0, 1), (1, 1), (0, 2)] {
        let name = format!("L+L and LL+ for L{p}{}", p + n);
        out.push(guard(&name, tol, || {
            let mut probes = level_fields(p);
            probes.extend(level_fields(p + n));
            Ok(named(crate::chain::verify_factorization(&c.chain, p, n, &probes, c.grid(), tol)?, &name))
        }));
    }
    let (m, l) = (c.model.m as f64, c.model.l as f64);
    for n in 0..k {
        let nf = n as f64;
        for (q, want) in [(1, nf + m + 1.0), (2, (nf + m + 1.0) * (nf + l + 1.0))] {
            let name = format!("L0{q}+ L0{q} psi_{n} = {want} psi_{n}");
            out.push(guard(&name, tol, || {
                let psi = c.model.psi(n);
                let op = c.operator(0, q)?;
                let ld: OpRef = Arc::new(c.chain.operator(0, q)?.adjoint());
                let lhs = Applied::new(ld, Applied::new(op, psi.clone()));
                let rhs = Combination::scaled(C64::new(want, 0.0), psi.clone());
                Ok(named(field_difference("", lhs.as_ref(), Some(rhs.as_ref()), psi.as_ref(), c.grid(), tol)?, &name))
            }));
        }
    }
    out
}

/// Criterion 6: every relation of the nonlinear algebra, `[S, Q]` included.
fn algebra(c: &Context) -> Vec<ResidualReport> {
    let tol = c.tol().algebra;
    match c.algebra() {
        Ok(alg) => {
            let probes = model_probes(&c.model, ALGEBRA_PROBES);
            verify_algebra(alg, &probes, c.grid(), tol)
                .unwrap_or_else(|e| vec![ResidualReport::errored("algebra", tol, &e)])
        }
        Err(e) => vec![ResidualReport::errored("algebra", tol, &e)],
    }
}

/// Criterion 7: Gram matrices of each level's basis.
fn orthonormality(c: &Context) -> Vec<ResidualReport> {
    let tol = c.tol().quadrature;
    let rule = QuadratureRule::default();
    let grid = c.grid().with_times(GRAM_TIMES.to_vec());
    let k = c.k();
    let bases: [(&str, Vec<FieldRef>); 3] = [
        ("psi", (0..k).map(|n| c.model.psi(n)).collect()),
        ("phi", (0..k).map(|n| c.model.phi(n)).collect()),
        ("chi", (0..k).map(|n| c.model.chi(n)).collect()),
    ];
    let mut out = Vec::new();
    for (label, basis) in &bases {
        let refs: Vec<&dyn Field> = basis.iter().map(|f| f.as_ref()).collect();
        for &t in &GRAM_TIMES {
            let name = format!("gram {label}_0..{} at t={t}", k - 1);
            out.push(guard(&name, tol, || {
                let g = gram_matrix(&refs, t, &grid, &rule)?;
                let d = identity_deviation(&g);
                Ok(ResidualReport::new(name.clone(), d, d, tol, (f64::NAN, t)))
            }));
        }
    }
    out
}

/// Expected spectrum: `−l−1/2` once, `−m−1/2` twice, `n+1/2` three times.
pub fn expected_spectrum(m: usize, l: usize, states: usize) -> (Vec<f64>, Vec<usize>) {
    let mut eigenvalues = vec![-(l as f64) - 0.5, -(m as f64) - 0.5];
    let mut multiplicities = vec![1, 2];
    for n in 0..states - 2 {
        eigenvalues.push(n as f64 + 0.5);
        multiplicities.push(3);
    }
    (eigenvalues, multiplicities)
}

/// Criterion 8: degeneracy pattern of `S` and the vacuum.
fn spectrum(c: &Context) -> (Vec<ResidualReport>, Option<SpectrumReport>) {
    let tol = c.tol().quadrature;
    let alg = match c.algebra() {
        Ok(a) => a,
        Err(e) => return (vec![ResidualReport::errored("spectrum", tol, &e)], None),
    };
    let report = spectrum_states(&c.model, c.k())
        .and_then(|states| spectrum_report(alg, &states, c.grid(), &QuadratureRule::default(), tol));
    let mut out = Vec::new();
    let rep = match report {
        Ok(r) => r,
        Err(e) => return (vec![ResidualReport::errored("spectrum", tol, &e)], None),
    };
    let (want_e, want_m) = expected_spectrum(c.model.m, c.model.l, c.k());
    let pattern = if rep.multiplicities == want_m { 0.0 } else { 1.0 };
    let mut p = ResidualReport::verdict(format!("multiplicities {:?}", want_m), pattern, 0.0);
    if pattern != 0.0 {
        p.note = Some(format!("observed {:?}", rep.multiplicities));
    }
    out.push(p);
    let dev = if rep.eigenvalues.len() == want_e.len() {
        rep.eigenvalues.iter().zip(&want_e).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    out.push(ResidualReport::verdict("eigenvalues -l-1/2, -m-1/2, n+1/2", dev, tol));
    let res = rep.residuals.iter().copied().fold(0.0, f64::max);
    out.push(ResidualReport::verdict("Rayleigh quotient vs pointwise eigen-residual", res, tol));
    let vacuum = SuperState::single(3, 2, c.model.chi(0));
    let vtol = c.tol().analytic;
    match annihilation(alg, &vacuum, c.grid(), vtol) {
        Ok(rs) => out.extend(rs.into_iter().map(|r| {
            let n = format!("vacuum {}", r.name);
            named(r, n)
        })),
        Err(e) => out.push(ResidualReport::errored("vacuum annihilation", vtol, &e)),
    }
    (out, Some(rep))
}

/// Criterion 9: independent computations of the same objects agree.
fn oracles(c: &Context) -> Vec<ResidualReport> {
    let tol = c.tol().analytic;
    let grid = c.grid();
    let mut out = Vec::new();
    for level in [1, 2] {
        let name = format!("V{level} closed form vs -dxx log|u|^2 chain");
        out.push(guard(&name, tol, || {
            let closed = PotentialAsField(c.model.potential(level));
            let chain = PotentialAsField(c.chain.potential(level)?);
            Ok(named(field_difference("", &closed, Some(&chain), &closed, grid, tol)?, &name))
        }));
    }
    let name = "V2 closed form vs -dxx log|W(u_m,u_l)|^2";
    out.push(guard(name, tol, || {
        let closed = PotentialAsField(c.model.v2());
        let direct = PotentialAsField(Arc::new(WronskianPotential { wronskian: c.chain.wronskian_field(2) }));
        Ok(named(field_difference("", &closed, Some(&direct), &closed, grid, tol)?, name))
    }));
    for n in 0..c.k() {
        for adjoint in [false, true] {
            let src = if adjoint { c.model.chi(n) } else { c.model.psi(n) };
            let name = format!("Crum{} vs steps on {}", if adjoint { "+" } else { "" }, src.label());
            out.push(guard(&name, tol, || {
                let crum = c.chain.crum_operator(grid)?;
                let steps = c.chain.operator(0, 2)?;
                let (a, b): (OpRef, OpRef) = if adjoint {
                    (Arc::new(crum.adjoint()), Arc::new(steps.adjoint()))
                } else {
                    (Arc::new(crum), Arc::new(steps))
                };
                let fa = Applied::new(a, src.clone());
                let fb = Applied::new(b, src.clone());
                Ok(named(field_difference("", fa.as_ref(), Some(fb.as_ref()), src.as_ref(), grid, tol)?, &name))
            }));
        }
    }
    let name = "W(u_m,u_l) closed form vs determinant";
    out.push(guard(name, tol, || {
        let closed = wronskian_um_ul(c.model.m, c.model.l)?;
        let direct = WronskianField::new(vec![c.model.u_m(), c.model.u_l()]);
        Ok(named(field_difference("", closed.as_ref(), Some(&direct), closed.as_ref(), grid, tol)?, name))
    }));
    for n in 0..c.k() {
        let name = format!("W(psi_{n},u_l) closed form vs determinant");
        out.push(guard(&name, tol, || {
            let closed = wronskian_psi_ul(n, c.model.l)?;
            let direct = WronskianField::new(vec![c.model.psi(n), c.model.u_l()]);
            Ok(named(field_difference("", closed.as_ref(), Some(&direct), closed.as_ref(), grid, tol)?, &name))
        }));
    }
    for f in [c.model.psi(3), c.model.u_m(), c.model.phi(1), c.model.chi(2)] {
        let name = format!("finite differences {}", f.label());
        out.push(guard(&name, tol, || Ok(named(fd_check("", f.as_ref(), grid, FdOrders::ALL)?, &name))));
    }
    out
}

/// Runs criteria 1 to 9 for one configuration.
pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let c = Context::new(cfg)?;
    let (spec_checks, spec) = spectrum(&c);
    let groups = vec![
        CheckGroup::new(1, "exact-solution residuals", residuals(&c)),
        CheckGroup::new(2, "intertwining", intertwining(&c)),
        CheckGroup::new(3, "reality", reality(&c)),
        CheckGroup::new(4, "norm identity", norm_identity(&c)),
        CheckGroup::new(5, "factorization", factorization(&c)),
        CheckGroup::new(6, "parasuperalgebra", algebra(&c)),
        CheckGroup::new(7, "orthonormality", orthonormality(&c)),
        CheckGroup::new(8, "spectrum", spec_checks),
        CheckGroup::new(9, "oracle equivalences", oracles(&c)),
    ];
    let passed = groups.iter().all(|g| g.passed);
    Ok(SuiteReport {
        m: cfg.m,
        l: cfg.l,
        states: cfg.states,
        perturbation: cfg.perturbation,
        passed,
        groups,
        spectrum: spec,
    })
}

/// The spectrum of `S` with its criterion-8 checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SpectrumRun {
    pub m: usize,
    pub l: usize,
    pub states: usize,
    pub perturbation: f64,
    pub passed: bool,
    pub checks: Vec<ResidualReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<SpectrumReport>,
}

/// Criterion 8 alone.
pub fn run_spectrum(cfg: &SuiteConfig) -> Result<SpectrumRun> {
    let c = Context::new(cfg)?;
    let (checks, report) = spectrum(&c);
    let passed = checks.iter().all(|r| r.passed);
    Ok(SpectrumRun { m: cfg.m, l: cfg.l, states: cfg.states, perturbation: cfg.perturbation, passed, checks, report })
}

/// Criterion 10: injected defects must be detected. Each report passes
/// when its defect was caught.
pub fn negative_controls(cfg: &SuiteConfig, eps: f64) -> Vec<ResidualReport> {
    let caught = |name: &str, detected: bool, note: String| {
        let mut r = ResidualReport::verdict(name, if detected { 0.0 } else { 1.0 }, 0.0);
        r.note = Some(note);
        r
    };
    let mut out = Vec::new();

    let perturbed = SuiteConfig { perturbation: eps, ..cfg.clone() };
    let name = format!("potential perturbed by {eps} fails the algebra");
    out.push(match Context::new(&perturbed) {
        Ok(c) => {
            let reps = algebra(&c);
            let failing = reps.iter().filter(|r| !r.passed).count();
            caught(&name, failing > 0, format!("{failing} of {} relations fail", reps.len()))
        }
        Err(e) => caught(&name, false, e.to_string()),
    });

    let odd = cfg.m + 1;
    let name = format!("odd m = {odd} rejected");
    out.push(match FreeParticleModel::new(odd, odd + 1) {
        Err(e @ Error::InvalidParameter(_)) => caught(&name, true, e.to_string()),
        Err(e) => caught(&name, false, format!("unexpected error {e}")),
        Ok(_) => caught(&name, false, "accepted".into()),
    });

    let name = "swapped transformation order rejected";
    out.push(match swapped_chain(cfg.m, cfg.l) {
        Ok(mut spec) => match spec.certify_complete_reducibility(&cfg.grid) {
            Ok(r) => caught(name, !r.certified && !r.ordering_ok, r.reason.unwrap_or_else(|| "certified".into())),
            Err(e) => caught(name, true, e.to_string()),
        },
        Err(e) => caught(name, false, e.to_string()),
    });
    out
}

fn swapped_chain(m: usize, l: usize) -> Result<ChainSpec> {
    let model = FreeParticleModel::new(m, l)?;
    let [a1, a2] = model.alphas();
    ChainSpec::new(vec![model.u_l(), model.u_m()], vec![a2, a1])
}
