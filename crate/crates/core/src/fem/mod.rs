//! P1 finite elements for the Neumann Laplacian: assembly, the generalized
//! eigensolver and evaluation of computed eigenfunctions.

mod assembly;
mod eigen;
mod solution;
mod sparse;

pub use assembly::{assemble, element_mass, element_stiffness, DEGENERATE_AREA_RATIO};
pub use eigen::{dense_generalized, solve_eigs, EigenPairs, EigenSolverOptions};
pub use solution::{
    solve_mesh, BoundarySample, BoundaryTrace, EigenSolution, GradientSource,
};
pub use sparse::SparseSymMatrix;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FemError {
    #[error("triangle {triangle} is degenerate (area {area:e})")]
    DegenerateTriangle { triangle: usize, area: f64 },
    #[error("matrix dimensions differ ({left} vs {right})")]
    DimensionMismatch { left: usize, right: usize },
    #[error("cannot compute {count} eigenpairs of a dimension-{dim} problem")]
    InvalidCount { count: usize, dim: usize },
    #[error("solver tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("eigensolver did not converge in {iterations} sweeps (last relative change {last_change:e})")]
    SolverNoConvergence { iterations: usize, last_change: f64 },
    #[error("point ({x}, {y}) is outside the meshed domain")]
    PointOutsideDomain { x: f64, y: f64 },
}
