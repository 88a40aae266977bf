//! Welfare-maximizing rules: the Nash product rule over Leontief utilities
//! and the ℓ1-utilitarian rule.

pub mod decomposition;
pub mod nash;
pub mod utilitarian;

pub use decomposition::{decomposition_certificate, Decomposition, HallViolation, FLOW_ACCEPT};
pub use nash::{
    nash_mirror_descent, nash_objective, nash_optimize, nash_solve, NashSolution, DEFAULT_TOL,
};
pub use utilitarian::{utilitarian_l1, utilitarian_l1_detailed, UtilitarianSolution};
