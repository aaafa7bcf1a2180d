//! Solvers for the per-slot instances: a linear-programming core, a
//! branch-and-bound wrapper that proves integer optimality, and an
//! exhaustive oracle used to validate both on small cases.

pub mod bnb;
pub mod lp;
pub mod oracle;

pub use bnb::{solve_exact, solve_exact_warm, BnbConfig, SolveError, SolveStats};
pub use lp::{solve as solve_lp, LpProblem, LpResult, LpRow, LpStatus};
pub use oracle::{solve_oracle, OracleError, OracleOutcome, DEFAULT_ORACLE_BUDGET};
