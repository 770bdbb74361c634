//! Chains of time-dependent Darboux transformations of the free-particle
//! Schrödinger equation `i f_t + f_xx − V f = 0`, the exactly solvable
//! potentials they generate, and numerical certification of the operator
//! identities relating them.

// `!(a > b)` is used on purpose so NaN fails the test.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod darboux;
pub mod error;
pub mod fields;
pub mod jet;
pub mod nonfinite;
pub mod numerics;
pub mod ops;
pub mod specfun;
pub mod suite;
pub mod superalgebra;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
