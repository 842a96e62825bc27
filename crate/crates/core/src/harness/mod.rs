//! Amplitude sweeps that compare predicted and measured eigenvalue shifts,
//! with two-level Richardson extrapolation and remainder-order fitting.

mod fit;
mod report;
mod study;

pub use fit::{fit_order, fit_order_for, OrderFit, MIN_FIT_ROWS};
pub use report::{ExperimentReport, FormEstimate, ReportRow, RowEntry, MASK_RATIO};
pub use study::{refine, run_study, Displacement, FormSelection, StudyCase, StudyParams};

use crate::fem::FemError;
use crate::geometry::GeometryError;
use crate::meshing::MeshError;
use crate::perturbation::PerturbationError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid amplitude sequence: {0}")]
    InvalidEpsilons(String),
    #[error("invalid study parameters: {0}")]
    InvalidParams(String),
    #[error("{usable} usable rows, need at least {required}")]
    InsufficientData { usable: usize, required: usize },
    #[error("worker pool: {0}")]
    WorkerPool(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Perturbation(#[from] PerturbationError),
}
