//! Isoperimetric fillings: ray fills pushed onto a grid skeleton, boundary
//! ball avoidance, hyperplane search and the glued fill of a planar domain.

pub mod deform;

pub use deform::{far_exit, pick_generic_point, push_polygon, ray_fill, FfPush, GenericPoint, GridSkeleton, PushStats};
pub mod bend;

pub use bend::{bend_cancel_fill, verify_bend_cancel, BendCancel, BendCancelReport, BendRow};
pub mod avoid;

pub use avoid::{avoid_boundary_ball, random_localized_family, AvoidBall, AvoidBallReport};
pub mod hyperplane;

pub use hyperplane::{estimate_delta_n, find_avoiding_hyperplane, skeleton_check, DeltaEstimate, Hyperplane, SkeletonCheck, SphereBall};
pub mod parametric;

pub use parametric::{parametric_fill, sweepout_family, Domain, MetricGraph, ParamRow, ParametricFill, ParametricReport, TriangulatedPolygon};
