//! Small dense convex solvers: Hermitian SDP, convex QCQP, eigen helpers.

mod hermitian;
mod ipm;
mod purify;
mod qcqp;
mod sdp;

pub use hermitian::{normalize_phase, principal_eigvec, HermitianMatrix};
pub use purify::reduce_rank;
pub use qcqp::{solve_qcqp, QcqpProblem, QcqpSolution, QuadConstraint};
pub use sdp::{solve_sdp, LinearForm, Relation, SdpConstraint, SdpProblem, SdpSolution};

pub const DEFAULT_SDP_TOL: f64 = 1e-7;
pub const DEFAULT_QCQP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatusKind {
    Optimal,
    Infeasible,
    MaxIterations,
    NumericalFailure,
}

/// Termination report of a solver call. Residuals are relative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStatus {
    pub kind: StatusKind,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
    pub objective: f64,
    /// Upper bound on the optimal value of a maximization (lower for minimization).
    pub dual_objective: f64,
}
