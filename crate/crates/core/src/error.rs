use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("node of `{label}` at x = {x}, t = {t} (|f| = {modulus:e})")]
    Node { label: String, x: f64, t: f64, modulus: f64 },

    #[error("derivative tower too shallow: order {requested} requested, at most {available} available")]
    TowerTooShallow { requested: usize, available: usize },

    #[error("integrand does not decay at the domain edge (t = {t}, edge/peak = {ratio:e})")]
    NonDecaying { t: f64, ratio: f64 },

    #[error("reality condition violated by `{label}`: spread of the phase curvature {spread:e} exceeds {tolerance:e}")]
    RealityViolated { label: String, spread: f64, tolerance: f64 },

    #[error("quadrature did not converge at t = {t}: half-resolution discrepancy {discrepancy:e}")]
    QuadratureNotConverged { t: f64, discrepancy: f64 },

    #[error("chain is not certified completely reducible: {0}")]
    Uncertified(String),

    #[error("`{label}` is not a solution of its level equation (residual {residual:e})")]
    NotASolution { label: String, residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
