//! Krylov spaces of operators, operator complexity and Krylov observability.

pub mod basis;
mod dd;
pub mod evolved;
pub mod liouvillian;
pub mod observability;

pub use basis::{KrylovBasis, KrylovSource, RankTolerance};
pub use evolved::{
    bohr_frequencies, conditioned_time_step, default_time_step, equidistant_times,
    krylov_space_evolved, verify_span_equality, SpanComparison, DEFAULT_STEP_FACTOR,
};
pub use liouvillian::{
    krylov_space_liouvillian, liouvillian_apply, operator_complexity, ComplexityProfile,
};
pub use observability::{
    disjoint_spaces, krylov_observability, DisjointSpaces, ObservabilityModel, ObservabilityReport,
    ObservableTerm, SpaceGrid,
};
