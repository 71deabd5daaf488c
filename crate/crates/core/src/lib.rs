//! Asymptotic Bayes risk of two-class Gaussian-mixture classification when
//! part of the data carries uncertain labels.
//!
//! * [`kernel`]: scalar functions (`Q`, `f_ε`, `ψ_ε`, `F_ε`) and Gaussian quadrature.
//! * [`overlap`]: the self-consistent overlap equations and their solvers.
//! * [`risk`]: Bayes/oracle risk, usefulness of unlabeled data, error
//!   reductions and labeled-data requirements.
//! * [`montecarlo`]: synthetic data, channel simulation and classifiers.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod kernel;
pub mod montecarlo;
pub mod overlap;
pub mod risk;

pub use error::{Error, Result};
pub use kernel::{Epsilon, QuadratureRule};
pub use overlap::{EpsilonMixture, OverlapSolution, ProblemParams, SolverOptions};
pub use risk::{ReductionReport, RiskReport};
