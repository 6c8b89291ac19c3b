//! Exact rational linear algebra, linear programming and polyhedral cones.
//!
//! Everything here is generic over [`Field`], an exact ordered field. The
//! rest of the crate instantiates it with [`Rational`].

pub mod cone;
pub mod linalg;
pub mod lp;
pub mod scalar;

pub use cone::{
    cone_contains, cones_equal, h_to_skeleton, h_to_v, is_pointed, lineality_basis, solve_nonneg_in_span,
    strict_feasible, v_to_h, Cone, ConeSkeleton, DualCertificate, HCone, InfeasibilityCertificate,
    NonnegDecomposition, StrictFeasibility, VCone, MAX_DD_DIM,
};
pub use linalg::{dot, Matrix};
pub use lp::{feasible_point, maximize, LpOutcome, LpSolution};
pub use scalar::{Field, QVector, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExactError {
    #[error("ambient dimension {dim} exceeds the double description limit {max}")]
    DimensionTooLarge { dim: usize, max: usize },
    #[error("cones live in different ambient dimensions ({left} vs {right})")]
    DimensionMismatch { left: usize, right: usize },
}
