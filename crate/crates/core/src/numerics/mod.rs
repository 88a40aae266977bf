//! Small, deterministic numerical kernels: exact rationals, dense linear
//! algebra, max-flow, Fourier–Motzkin elimination, a dense simplex solver and
//! the exhaustive simplex-grid oracle.

pub mod flow;
pub mod fm;
pub mod grid;
pub mod linalg;
pub mod lp;
pub mod rational;

pub use flow::{max_flow, FlowNetwork, MaxFlow};
pub use fm::{fm_feasible, Feasibility, LinearConstraint, Rel, MAX_EXACT_VARS};
pub use grid::{grid_argmax, simplex_grid, GridArgmax};
pub use lp::{lp_feasible_float, simplex_solve, LpOutcome, LpProblem};
pub use rational::Rational;

use alloc::vec::Vec;

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpMode {
    /// Fourier–Motzkin over rationals; at most [`MAX_EXACT_VARS`] variables
    /// after equality substitution.
    Exact,
    /// Two-phase simplex in floats; points and certificates are converted
    /// back to (dyadic) rationals.
    Float,
}

/// Feasibility of a linear system over free variables, with a point or an
/// infeasibility certificate.
pub fn lp_feasible(
    constraints: &[LinearConstraint<Rational>],
    nvars: usize,
    mode: LpMode,
) -> Result<Feasibility<Rational>> {
    match mode {
        LpMode::Exact => fm_feasible(constraints, nvars),
        LpMode::Float => {
            let floats: Vec<LinearConstraint<f64>> =
                constraints.iter().map(LinearConstraint::to_f64).collect();
            let back = |v: Vec<f64>| -> Vec<Rational> {
                v.into_iter()
                    .map(|x| Rational::from_f64(x).unwrap_or_else(Rational::zero))
                    .collect()
            };
            Ok(match lp_feasible_float(&floats, nvars) {
                Feasibility::Feasible(x) => Feasibility::Feasible(back(x)),
                Feasibility::Infeasible(y) => Feasibility::Infeasible(back(y)),
            })
        }
    }
}
