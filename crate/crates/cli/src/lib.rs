//! Command-line front-end: `build` exports fields as CSV with a checksummed
//! manifest, `verify` runs the full suite, `spectrum` reports the spectrum of `S`.

pub mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tdsusy::fields::{FieldRef, FreeParticleModel, PotentialRef};
use tdsusy::numerics::{sample, Grid, ResidualReport};
use tdsusy::suite::{run_spectrum, run_suite, SpectrumRun, SuiteReport};

pub use config::{ReportFormat, RunConfig};

/// Process exit codes.
pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Numerics(#[from] tdsusy::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => EXIT_CONFIG,
            CliError::Numerics(_) => EXIT_FAIL,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "tdsusy", version, about = "Time-dependent Darboux chains of the free particle")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write CSV tables of potentials and states plus a JSON manifest.
    Build(Overrides),
    /// Run every check; exit 0 iff all pass.
    Verify(Overrides),
    /// Report the spectrum of the super-operator S.
    Spectrum(Overrides),
}

/// Flags override the config file, which overrides the defaults.
#[derive(Args, Debug, Default, Clone)]
pub struct Overrides {
    /// JSON config file (a build manifest also works)
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Degree of the first transformation function (even)
    #[arg(long)]
    pub m: Option<usize>,
    /// Degree of the second transformation function (odd, > m)
    #[arg(long)]
    pub l: Option<usize>,
    /// Basis states K per level
    #[arg(long)]
    pub states: Option<usize>,
    /// Half-width of the grid in z = x/sqrt(1+t^2)
    #[arg(long)]
    pub zmax: Option<f64>,
    /// Grid nodes per time slice (odd, at least 257)
    #[arg(long)]
    pub nx: Option<usize>,
    /// Comma-separated sample times
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub t_samples: Option<Vec<f64>>,
    /// Tolerance of pointwise analytic identities
    #[arg(long)]
    pub tol_analytic: Option<f64>,
    /// Tolerance of quadrature-based checks
    #[arg(long)]
    pub tol_quadrature: Option<f64>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Negative control: shift the first step's potential by this constant
    #[arg(long, allow_hyphen_values = true)]
    pub perturb_potential: Option<f64>,
}

impl Overrides {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($flag:ident => $($field:ident).+),* $(,)?) => {
                $(if let Some(v) = &self.$flag { c.$($field).+ = v.clone(); })*
            };
        }
        set!(m => m, l => l, states => n_states, zmax => z_max, nx => n_x, t_samples => t_samples,
             tol_analytic => tolerances.analytic, tol_quadrature => tolerances.quadrature,
             out => out, perturb_potential => perturb_potential);
        Ok(c)
    }
}

/// One exported table in the manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ManifestEntry {
    pub quantity: String,
    pub file: String,
    pub rows: usize,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    pub columns: Vec<String>,
    pub files: Vec<ManifestEntry>,
}

pub const MANIFEST: &str = "manifest.json";
pub const VERIFY_REPORT: &str = "verify.json";
pub const SPECTRUM_REPORT: &str = "spectrum.json";

enum Quantity {
    Field(FieldRef),
    Potential(PotentialRef),
}

fn csv_table(q: &Quantity, grid: &Grid) -> Result<(String, usize), CliError> {
    let mut s = String::from("x,t,value_re,value_im\n");
    let mut rows = 0;
    for &t in grid.t_samples() {
        let values: Vec<(f64, f64)> = match q {
            Quantity::Field(f) => sample(f.as_ref(), grid, t)?.into_iter().map(|v| (v.re, v.im)).collect(),
            Quantity::Potential(v) => grid
                .x_nodes(t)
                .map(|x| Ok((v.value(x, t)?, v.imaginary_part(x, t)?)))
                .collect::<Result<_, tdsusy::Error>>()?,
        };
        for (x, (re, im)) in grid.x_nodes(t).zip(values) {
            writeln!(s, "{x:e},{t:e},{re:e},{im:e}").expect("write to string");
            rows += 1;
        }
    }
    Ok((s, rows))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_owned(), source })
}

/// Stable-order, pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `V1`, `V2`, `ψ_n`, `φ_n`, `χ_n` for `n < K`, `u_m` and `v_l`.
pub fn cmd_build(cfg: &RunConfig) -> Result<Manifest, CliError> {
    let suite = cfg.suite_config()?;
    let model = FreeParticleModel::new(cfg.m, cfg.l)?;
    let mut items: Vec<(String, Quantity)> =
        vec![("V1".into(), Quantity::Potential(model.v1())), ("V2".into(), Quantity::Potential(model.v2()))];
    for (name, get) in [
        ("psi", FreeParticleModel::psi as fn(&_, usize) -> FieldRef),
        ("phi", FreeParticleModel::phi),
        ("chi", FreeParticleModel::chi),
    ] {
        for n in 0..cfg.n_states {
            items.push((format!("{name}_{n}"), Quantity::Field(get(&model, n))));
        }
    }
    items.push((format!("u_{}", cfg.m), Quantity::Field(model.u_m())));
    items.push((format!("v_{}", cfg.l), Quantity::Field(model.v_l())));

    create_dir(&cfg.out)?;
    let mut files = Vec::with_capacity(items.len());
    for (name, q) in &items {
        let (csv, rows) = csv_table(q, &suite.grid)?;
        let file = format!("{name}.csv");
        write(&cfg.out.join(&file), csv.as_bytes())?;
        files.push(ManifestEntry { quantity: name.clone(), file, rows, sha256: sha256_hex(csv.as_bytes()) });
    }
    let manifest = Manifest {
        tool: "tdsusy".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: cfg.clone(),
        columns: ["x", "t", "value_re", "value_im"].map(String::from).to_vec(),
        files,
    };
    write(&cfg.out.join(MANIFEST), to_json(&manifest).as_bytes())?;
    Ok(manifest)
}

/// Runs the full suite and writes `verify.json`.
pub fn cmd_verify(cfg: &RunConfig) -> Result<SuiteReport, CliError> {
    let report = run_suite(&cfg.suite_config()?)?;
    create_dir(&cfg.out)?;
    write(&cfg.out.join(VERIFY_REPORT), to_json(&report).as_bytes())?;
    Ok(report)
}

/// Computes the spectrum of `S` and writes `spectrum.json`.
pub fn cmd_spectrum(cfg: &RunConfig) -> Result<SpectrumRun, CliError> {
    let run = run_spectrum(&cfg.suite_config()?)?;
    create_dir(&cfg.out)?;
    write(&cfg.out.join(SPECTRUM_REPORT), to_json(&run).as_bytes())?;
    Ok(run)
}

/// Worst check of a group for the stderr summary.
fn summary(r: &ResidualReport) -> String {
    match r.observed_order {
        Some(order) => format!("{} = {:.3e}, order {order:.2}", r.name, r.max_norm),
        None => format!("{} = {:.3e} (tol {:.0e})", r.name, r.max_norm, r.tolerance),
    }
}

/// Dispatches one invocation; returns the exit code. JSON goes to stdout,
/// diagnostics to stderr.
pub fn run(cli: Cli) -> u8 {
    let result = match &cli.command {
        Command::Build(o) => o.resolve().and_then(|c| cmd_build(&c)).map(|m| {
            eprintln!("wrote {} tables and {MANIFEST}", m.files.len());
            print!("{}", to_json(&m));
            true
        }),
        Command::Verify(o) => o.resolve().and_then(|c| cmd_verify(&c)).map(|r| {
            for g in &r.groups {
                let worst = g.worst().map(summary).unwrap_or_default();
                eprintln!("[{}] {} {}: {worst}", if g.passed { "PASS" } else { "FAIL" }, g.criterion, g.name);
            }
            print!("{}", to_json(&r));
            r.passed
        }),
        Command::Spectrum(o) => o.resolve().and_then(|c| cmd_spectrum(&c)).map(|r| {
            if let Some(s) = &r.report {
                eprintln!("eigenvalues {:?}, multiplicities {:?}", s.eigenvalues, s.multiplicities);
            }
            print!("{}", to_json(&r));
            r.passed
        }),
    };
    match result {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
