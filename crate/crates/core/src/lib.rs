//! Lipschitz-free spaces over finite pointed metric spaces.
//!
//! Free norms are computed by linear programming with exact certificates,
//! liftings of the barycenter map are synthesized and checked for group
//! equivariance, and the discrete complexified free space is built from a
//! cyclic rotation group.

pub mod complexify;
pub mod cube;
pub mod equivariance;
pub mod error;
pub mod free_space;
pub mod metric;
pub mod normed;
pub mod operators;

pub use complexify::{
    build_circle_model, complex_lifting, complex_structure, delta_c_check, q_operator, quotient_norm, y_generators,
    CircleModel, ComplexLifting, ComplexStructure, DeltaCReport, QReport, QuotientNorm,
};
pub use cube::{build_cube_space, cube_lifting, phi_n, CubeLifting, CubeOptions, GridSpec};
pub use equivariance::{
    average_lifting, basis_lifting, check_equivariant, close_group, induced_free_action, min_norm_lifting,
    splitting_equivalences, Deviation, FiniteGroupAction, MinNormLifting, SplittingInput, SplittingReport,
};
pub use error::{Error, Result};
pub use free_space::{free_norm, lip_constant, molecule, pair, FreeNorm, FreeVector, LipFunction, Space, Transport};
pub use lipfree_lp::{Matrix, Mode, Rational, Scalar};
pub use metric::{MetricViolation, PointedMetricSpace};
pub use normed::{NormShape, PolyhedralNorm};
pub use operators::{barycenter, dual_projection_from_lifting, linearize, op_norm, LinearMap, OpNorm, SpaceDescriptor};
