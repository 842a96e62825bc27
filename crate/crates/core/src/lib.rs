//! Numerical toolkit for Hadamard-type perturbation formulas of Neumann-Laplacian
//! eigenvalues: star-shaped domains and boundary perturbation families, P1 finite
//! element eigensolvers, the perturbation matrix problems in boundary and volume
//! form, analytic reference spectra, and remainder-order studies.

pub mod fem;
pub mod geometry;
pub mod harness;
pub mod meshing;
pub mod oracles;
pub mod perturbation;

pub use geometry::{
    apply_normal_offset, family_field, hausdorff_distance, PerturbationFamily, PerturbationField,
    Profile, ProfileShape, SmoothnessClass, StarDomain, Vec2,
};
pub use meshing::{generate_mesh, generate_rect_mesh, resolution_for, TriangleMesh};
pub use fem::{assemble, solve_eigs, solve_mesh, EigenSolution, EigenSolverOptions};
