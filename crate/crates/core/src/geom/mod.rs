//! Primitive models, point queries, minimal-sample fits and refinement.

mod minimal;
mod primitives;
mod refine;

pub use minimal::{fit_cone_min, fit_cylinder_min, fit_plane_min, fit_sphere_min, fit_minimal};
pub use primitives::{
    canonical_direction, tangent_basis, tiebreak_perpendicular, Cone, Cylinder, OrientedPoint,
    Plane, PrimitiveClass, PrimitiveModel, Sphere,
};
pub use refine::{refit_least_squares, sum_squared_distance, RefitOutcome, RefitStatus};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeomError {
    #[error("degenerate sample")]
    DegenerateSample,
    #[error("inconsistent sample")]
    InconsistentSample,
    #[error("degenerate normal query")]
    DegenerateNormalQuery,
    #[error("invalid parameters: {0}")]
    InvalidParameters(&'static str),
}
