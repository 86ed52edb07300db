//! Numerical kernels used by the credal agent.
//!
//! * [`solve_lp`]: bounded-variable primal simplex for small dense problems.
//! * [`charnes_cooper`]: reduces a linear-fractional program over a
//!   box-constrained simplex to a linear program.
//! * [`frank_wolfe_max`]: maximizes a concave function over the convex hull
//!   of a finite point set.
//! * [`box_simplex_vertices`]: enumerates the vertices of
//!   `{s : lo <= s_m <= hi, sum s_m = 1}`.

mod box_simplex;
mod fractional;
mod frank_wolfe;
mod simplex;

use thiserror::Error;

pub use box_simplex::{box_simplex_vertices, MAX_ENUMERATED_MEMBERS};
pub use fractional::{charnes_cooper, CharnesCooperLp, FractionalProgram, FractionalSolution};
pub use frank_wolfe::{frank_wolfe_max, ConcaveObjective, FwOptions, FwSolution};
pub use simplex::{solve_lp, LinearProgram, LpSolution};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimError {
    #[error("malformed problem: {0}")]
    Malformed(String),
    #[error("linear program is infeasible (phase-one residual {residual})")]
    Infeasible { residual: f64 },
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("simplex did not terminate within {iterations} pivots")]
    CycleDetected { iterations: usize },
    #[error("denominator coefficient {value} at index {index} is not strictly positive")]
    DegenerateDenominator { index: usize, value: f64 },
    #[error("box [{lo}, {hi}]^{members} does not meet the probability simplex")]
    InfeasibleBox { members: usize, lo: f64, hi: f64 },
    #[error("vertex enumeration is capped at {max} members, got {members}")]
    TooManyMembers { members: usize, max: usize },
    #[error("Frank-Wolfe gap {gap} above tolerance after {iterations} iterations")]
    ConvergenceFailure { iterations: usize, gap: f64 },
}
