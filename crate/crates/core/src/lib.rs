//! Reformulation toolkit for disjunctive constraints with convex additively
//! separable left-hand sides.
//!
//! A disjunctive constraint forces at least one of several alternative
//! constraint sets (disjuncts) to hold. This crate compiles such constraints
//! into mixed-integer models under three formulations of different relaxation
//! strength:
//!
//! * **big-M** — one indicator-relaxed row per disjunct constraint; compact
//!   but with the weakest continuous relaxation,
//! * **P-split** — each constraint is split into `P` partial sums that are
//!   lifted into auxiliary variables and disaggregated over the disjuncts;
//!   interpolates between big-M (`P = 1`) and the convex hull (`P = n` for
//!   affine disjuncts),
//! * **extended convex hull** — per-disjunct variable copies (affine
//!   disjuncts only); the sharpest and largest formulation.
//!
//! The pipeline is: build a [`model::DisjunctiveProblem`], choose a
//! [`partition::Partition`] of the variables, compute auxiliary-variable
//! [`bounds::AlphaBounds`], compile with [`reformulate`], and solve with the
//! embedded LP / outer-approximation / branch-and-bound engine in [`solver`].
//! [`emit`] writes LP/MPS files and 2-D feasibility grids for inspecting
//! relaxation strength, and [`instances`] constructs the bundled example
//! problems and test families.

pub mod bounds;
pub mod emit;
pub mod instances;
pub mod mixed;
pub mod model;
pub mod partition;
pub mod reformulate;
pub mod solver;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// A model or subproblem has no feasible point.
    #[error("infeasible: {0}")]
    Infeasible(String),
    /// The requested operation does not support the given model.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// A required auxiliary-variable bound entry is missing.
    #[error("missing bound entry: {0}")]
    MissingBound(String),
    /// A combinatorial size guard was exceeded.
    #[error("size guard exceeded: {0}")]
    SizeGuard(String),
    /// The numerical engine could not certify a result.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// A file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
    /// JSON (de)serialization failure.
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
