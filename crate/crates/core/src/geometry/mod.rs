//! Star-shaped domains, boundary displacement fields and their smoothness
//! families, normal offsets and the Hausdorff distance.

mod domain;
mod field;
mod hausdorff;
mod offset;

pub use domain::{BoundaryFrame, StarDomain, POSITIVITY_SAMPLES};
pub use field::{
    FieldShape, PerturbationFamily, PerturbationField, Profile, ProfileShape, SmoothnessClass,
};
pub use hausdorff::hausdorff_distance;
pub use offset::{apply_normal_offset, NormalOffset, FIT_RESIDUAL_TOLERANCE};

pub type Vec2 = nalgebra::Vector2<f64>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("radius series has no coefficients")]
    EmptyCoefficients,
    #[error("radius series has a non-finite coefficient")]
    NonFiniteCoefficient,
    #[error("radius is not positive (sampled minimum {min})")]
    NonPositiveRadius { min: f64 },
    #[error("offset curve is not star-shaped about the center near theta = {theta}")]
    OffsetNotStarShaped { theta: f64 },
    #[error("radius fit residual {residual:e} exceeds {limit:e}")]
    FitResidualTooLarge { residual: f64, limit: f64 },
    #[error("profile offset {0} outside [-1, 1]")]
    InvalidProfileOffset(f64),
    #[error("invalid perturbation family: {0}")]
    InvalidFamily(String),
}

/// The member `h_ε` of a perturbation family.
pub fn family_field(family: &PerturbationFamily, epsilon: f64) -> PerturbationField {
    family.field(epsilon)
}
