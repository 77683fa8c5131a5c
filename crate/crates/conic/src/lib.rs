//! Small dense primal-dual interior-point solvers.
//!
//! The crate solves semidefinite programs over one real symmetric block,
//! Hermitian programs through the real embedding `[Re -Im; Im Re]`, and
//! linear programs. All three share one Mehrotra predictor-corrector kernel
//! with Nesterov-Todd scaling on the semidefinite block and the diagonal
//! barrier on the nonnegative orthant. Everything is dense; the intended
//! sizes are a few tens of rows and columns.

mod eig;
mod error;
mod hermitian;
mod ipm;
mod lp;
mod purify;
mod sdp;

pub use eig::{numerical_rank, psd_eigendecomposition, Eigen, DEFAULT_RANK_TOL};
pub use error::ConicError;
pub use hermitian::{embed_hermitian, extract_hermitian, HermitianConstraint, HermitianSdp};
pub use lp::{LinearRow, LpProblem, LpSolution};
pub use purify::reduce_rank;
pub use sdp::{Constraint, SdpProblem, SdpSolution};

/// Constraint direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    /// `lhs >= rhs`
    Ge,
    /// `lhs <= rhs`
    Le,
    /// `lhs == rhs`
    Eq,
}

/// Termination state of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

impl Status {
    pub fn is_optimal(self) -> bool {
        self == Status::Optimal
    }
}

/// Stopping criteria shared by the SDP and LP front ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative duality gap `|p - d| / (1 + |p| + |d|)`.
    pub gap: f64,
    /// Relative primal and dual residual norms.
    pub feasibility: f64,
    /// Threshold on the normalized residual of a Farkas-type ray.
    pub infeasibility: f64,
    pub max_iterations: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            gap: 1e-8,
            feasibility: 1e-8,
            infeasibility: 1e-8,
            max_iterations: 100,
        }
    }
}

/// Result of a conic solve. `P` is a matrix for SDPs and a vector for LPs.
#[derive(Debug, Clone)]
pub struct ConicSolution<P> {
    pub status: Status,
    /// Primal objective at the returned point.
    pub value: f64,
    /// Dual objective at the returned point.
    pub dual_value: f64,
    pub primal: P,
    /// One multiplier per constraint, in input order. The Lagrangian is
    /// `objective - sum_i y_i (lhs_i - rhs_i)`, so `y_i >= 0` for `Ge`
    /// rows and `y_i <= 0` for `Le` rows.
    pub duals: Vec<f64>,
    pub rel_gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
}
