//! The convex minimization engine behind every exponent.

mod case_split;
mod oracle;
mod solver;

pub use case_split::{solve_case_split, BetaCoefficients, CaseSplit, ExponentEngine, Regime};
pub use oracle::{brute_force_oracle, ORACLE_MAX_CELLS};
pub use solver::{minimize_div_plus_info, MarginalConstraint, SolverConfig, SubproblemSolution};

pub(crate) use solver::solve;
