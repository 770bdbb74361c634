//! Run configuration: a JSON file with documented defaults, overridden by flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tdsusy::numerics::Grid;
use tdsusy::suite::{SuiteConfig, Tolerances};

use crate::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Json,
}

/// Everything a subcommand needs. Field names match `config/schema.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct RunConfig {
    /// Even index of the first transformation function `u_m`.
    pub m: usize,
    /// Index of the second transformation function, `l > m`, `l − m` odd.
    pub l: usize,
    /// Basis states `K` per level, at least 3.
    pub n_states: usize,
    /// Half-width of the scaled domain `z = x/√(1+t²)`.
    pub z_max: f64,
    /// Odd node count per time slice.
    pub n_x: usize,
    pub t_samples: Vec<f64>,
    pub tolerances: Tolerances,
    pub out: PathBuf,
    pub format: ReportFormat,
    /// Negative control: constant added to the first step's potential.
    pub perturb_potential: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            m: 0,
            l: 1,
            n_states: 6,
            z_max: Grid::DEFAULT_Z_MAX,
            n_x: Grid::DEFAULT_N_X,
            t_samples: Grid::DEFAULT_T.to_vec(),
            tolerances: Tolerances::default(),
            out: PathBuf::from("tdsusy-out"),
            format: ReportFormat::Json,
            perturb_potential: 0.0,
        }
    }
}

impl RunConfig {
    /// Reads a config file. A build manifest is accepted too: its `config`
    /// entry is used.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut value: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if let Some(inner) = value.as_object_mut().filter(|o| o.contains_key("files")).and_then(|o| o.remove("config"))
        {
            value = inner;
        }
        serde_json::from_value(value).map_err(|e| e.to_string())
    }

    /// The validated suite configuration; parity and range errors surface here.
    pub fn suite_config(&self) -> Result<SuiteConfig, CliError> {
        let mut cfg = SuiteConfig::new(self.m, self.l, self.n_states).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.grid =
            Grid::new(self.z_max, self.n_x, self.t_samples.clone()).map_err(|e| CliError::Config(e.to_string()))?;
        let t = &self.tolerances;
        for (name, v) in
            [("analytic", t.analytic), ("quadrature", t.quadrature), ("algebra", t.algebra), ("reality", t.reality)]
        {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!("tolerance {name} = {v} must be positive and finite")));
            }
        }
        if !self.perturb_potential.is_finite() {
            return Err(CliError::Config("perturbPotential must be finite".into()));
        }
        cfg.tolerances = *t;
        cfg.perturbation = self.perturb_potential;
        Ok(cfg)
    }
}
