//! Eigenvalue clusters and the matrix problems that predict how a cluster
//! splits under a small boundary displacement.

mod cluster;
mod forms;
mod identity;

pub use cluster::{find_cluster, find_cluster_with_error, EigenCluster};
pub use forms::{
    SAMPLES_PER_OSCILLATION,
    kappa_boundary, kappa_operator_boundary, pair_predictions, tau_volume, Convention, Form,
    PerturbationPrediction,
};
pub use identity::operator_identity;

use crate::fem::FemError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PerturbationError {
    #[error("spectrum is empty")]
    EmptySpectrum,
    #[error("target {target} outside the computed range [{min}, {max}]")]
    TargetOutOfRange { target: f64, min: f64, max: f64 },
    #[error("cluster near {target} is ambiguous: gap {gap:e} below {required:e}")]
    AmbiguousCluster { target: f64, gap: f64, required: f64 },
    #[error("{n_quad} boundary samples under-resolve the field; need at least {required}")]
    QuadratureUnderResolved { n_quad: usize, required: usize },
    #[error("{n_theta} shell samples under-resolve the field; need at least {required}")]
    ShellNotResolved { n_theta: usize, required: usize },
    #[error("cannot pair {left} predictions with {right} shifts")]
    LengthMismatch { left: usize, right: usize },
    #[error(transparent)]
    Fem(#[from] FemError),
}
