//! Deciders and search-based audits for the axioms.
//!
//! Deciders (efficiency for Leontief, ℓ1 and ℓ∞, range-respect, the exact
//! Leontief core-fair-share test) return definite verdicts. Audits search
//! for violations; a pass from an audit means that none was found.

pub mod efficiency;
pub mod fairness;
pub mod incentives;
pub mod probes;
pub mod report;

use core::cmp::Ordering;

pub use efficiency::{
    check_efficiency, check_range_respect, efficiency_grid_search, verify_improvement,
};
pub use fairness::{
    blocking_witness_check, cfs_blocking_search, cfs_group_slack, check_cfs_leontief,
    check_cfs_search, check_proportionality,
};
pub use incentives::{audit_group_sp, audit_strategyproofness, verify_manipulation, SearchConfig};
pub use probes::{
    audit_continuity, check_anonymity, check_neutrality, check_one_sided_range_respect,
    check_participation, check_reinforcement, critical_coverage,
};
pub use report::{AuditReport, CandidateKind, Manipulation, Verdict, Witness};

use crate::error::Result;
use crate::model::{utility, Distribution, RatioVector, UtilityModel};

/// Tolerance under which two leximin ratio entries count as equal.
pub const LEXIMIN_TOL: f64 = 1e-12;

/// How much an agent with `peak` gains by moving from `old` to `new`.
///
/// For scalar models this is the utility difference. Leximin-Leontief has
/// no utility; the gain is the signed difference at the first position
/// where the sorted ratio vectors differ, which has the sign of the leximin
/// comparison.
pub fn gain(
    model: UtilityModel,
    peak: &Distribution,
    new: &Distribution,
    old: &Distribution,
) -> Result<f64> {
    match model {
        UtilityModel::LeximinLeontief => {
            let a = RatioVector::new(peak, new)?;
            let b = RatioVector::new(peak, old)?;
            for (x, y) in a.ratios().zip(b.ratios()) {
                if (x - y).abs() > LEXIMIN_TOL {
                    return Ok(x - y);
                }
            }
            Ok(0.0)
        }
        _ => Ok(utility(model, peak, new)? - utility(model, peak, old)?),
    }
}

/// Sign of [`gain`] with `tol` slack.
pub fn prefers(
    model: UtilityModel,
    peak: &Distribution,
    new: &Distribution,
    old: &Distribution,
    tol: f64,
) -> Result<Ordering> {
    let g = gain(model, peak, new, old)?;
    Ok(if g > tol {
        Ordering::Greater
    } else if g < -tol {
        Ordering::Less
    } else {
        Ordering::Equal
    })
}
