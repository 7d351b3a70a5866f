//! Probabilities for non-intersecting Brownian motions with several starting
//! and ending points, and numerical checks of the integrable structure of the
//! associated tau function.

// Index loops mirror the matrix formulas; negated comparisons reject NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod appendix;
pub mod counting;
pub mod dd;
pub mod diffops;
pub mod domain;
pub mod error;
pub mod identities;
pub mod linalg;
pub mod moments;
pub mod montecarlo;
pub mod suite;
pub mod tau;

pub use dd::Dd;
pub use domain::{normalize, validate, Deformation, EnsembleSpec, IntervalUnion, NormalizedProblem, ValidatedSpec};
pub use error::{Error, Result};
pub use linalg::{log_det, Matrix, SignedLogDet};
pub use tau::{probability, tau_e, tau_shifted, BlockSpec, Precision, TauPoint};
