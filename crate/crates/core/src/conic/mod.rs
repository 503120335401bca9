//! A small dense interior-point solver for conic programs over products of
//! nonnegative orthants, second-order cones, rotated second-order cones,
//! exponential cones and real PSD cones.

pub mod cones;
pub mod problem;
mod solver;

pub use cones::{check_dual_membership, check_membership, smat, svec, svec_len, Cone, ConeBlock};
pub use problem::{ConicDump, ConicProblem, Sense, DUMP_SCHEMA};
pub use solver::{
    replay, solve, Certificate, ConicSolution, IterationRecord, ReplayReport, SolveStatus, SolverOptions,
};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConicError {
    #[error("malformed conic problem: {0}")]
    Malformed(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid solver options: {0}")]
    InvalidOptions(String),
}
