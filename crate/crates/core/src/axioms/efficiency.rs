//! Pareto efficiency and range-respect.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::report::{AuditReport, Witness};
use super::{gain, prefers};
use crate::error::Result;
use crate::model::{critical_set, distance, leontief_utility, Distribution, Profile, UtilityModel};
use crate::numerics::fm::{LinearConstraint, Rel};
use crate::numerics::grid::{lattice_size, simplex_grid};
use crate::numerics::lp::{simplex_solve, LpOutcome, LpProblem};

/// Alternatives with more than this mass count as funded.
pub const FUNDED_EPS: f64 = 1e-7;
/// Criticality tolerance of the Leontief efficiency test.
pub const CRITICAL_EPS: f64 = 1e-6;
/// LP optima above this value certify an improvement.
pub const LP_IMPROVEMENT_EPS: f64 = 1e-8;
/// Strictness margin of the grid fallback.
pub const GRID_MARGIN: f64 = 1e-7;
/// Lattice size used by the grid fallback.
pub const GRID_POINTS: u128 = 20_000;

/// Whether `q_prime` Pareto-improves on `q`: no agent loses more than
/// `1e-12` and some agent gains more than `1e-12`.
pub fn verify_improvement(
    model: UtilityModel,
    profile: &Profile,
    q: &Distribution,
    q_prime: &Distribution,
) -> Result<bool> {
    let mut strict = false;
    for p in profile.peaks() {
        let g = gain(model, p, q_prime, q)?;
        if g < -1e-12 {
            return Ok(false);
        }
        strict |= g > 1e-12;
    }
    Ok(strict)
}

/// Decides whether `q` is Pareto efficient.
///
/// Leontief: every funded alternative must be critical for some agent.
/// ℓ1 and ℓ∞: a linear program maximizes the total improvement. ℓ2 and
/// Leximin-Leontief fall back to a grid search, which can only refute.
pub fn check_efficiency(
    model: UtilityModel,
    profile: &Profile,
    q: &Distribution,
) -> Result<AuditReport> {
    match model {
        UtilityModel::Leontief => leontief_efficiency(profile, q),
        UtilityModel::L1 | UtilityModel::LInf => lp_efficiency(model, profile, q),
        _ => {
            let report = AuditReport::new("efficiency", GRID_MARGIN);
            let k = grid_resolution(profile.m());
            match efficiency_grid_search(model, profile, q, k)? {
                Some(q_prime) => {
                    let gains = gains_of(model, profile, q, &q_prime)?;
                    Ok(report.fail(Witness::Improvement { q_prime, gains }))
                }
                None => Ok(report.inconclusive(format!("no improvement on the 1/{k} grid"))),
            }
        }
    }
}

fn gains_of(
    model: UtilityModel,
    profile: &Profile,
    q: &Distribution,
    q_prime: &Distribution,
) -> Result<Vec<f64>> {
    profile
        .peaks()
        .iter()
        .map(|p| gain(model, p, q_prime, q))
        .collect()
}

fn grid_resolution(m: usize) -> usize {
    let mut k = 2;
    while k < 200 && lattice_size(m, k + 1) <= GRID_POINTS {
        k += 1;
    }
    k
}

fn leontief_efficiency(profile: &Profile, q: &Distribution) -> Result<AuditReport> {
    let mut report = AuditReport::new("efficiency", CRITICAL_EPS);
    let critical: Vec<Vec<usize>> = profile
        .peaks()
        .iter()
        .map(|p| critical_set(p, q, CRITICAL_EPS))
        .collect();
    let uncovered =
        (0..q.len()).find(|&j| q[j] > FUNDED_EPS && !critical.iter().any(|t| t.contains(&j)));
    report.evaluated = q.len();
    let Some(j) = uncovered else {
        return Ok(report);
    };
    // Moving a little mass from `j` onto the critical alternatives raises
    // every agent's minimum ratio.
    let mut targets: Vec<usize> = critical.iter().flatten().copied().collect();
    targets.sort_unstable();
    targets.dedup();
    let mut delta = q[j];
    for p in profile.peaks() {
        if p[j] > 0.0 {
            let room = (q[j] / p[j] - leontief_utility(p, q)) * p[j];
            delta = delta.min(0.5 * room);
        }
    }
    for _ in 0..40 {
        let mut v = q.as_slice().to_vec();
        v[j] -= delta;
        for &t in &targets {
            v[t] += delta / targets.len() as f64;
        }
        let cand = Distribution::normalized(v)?;
        let gains = gains_of(UtilityModel::Leontief, profile, q, &cand)?;
        if gains.iter().all(|&g| g > 0.0) {
            return Ok(report.fail(Witness::Improvement {
                q_prime: cand,
                gains,
            }));
        }
        delta *= 0.5;
    }
    Ok(report.fail(Witness::Uncovered {
        alternative: j,
        value: q[j],
    }))
}

fn lp_efficiency(model: UtilityModel, profile: &Profile, q: &Distribution) -> Result<AuditReport> {
    let n = profile.n();
    let m = profile.m();
    let aux = if model == UtilityModel::L1 { n * m } else { n };
    let width = m + n + aux;
    let slack = |i: usize| m + i;
    let t = |i: usize, j: usize| {
        if model == UtilityModel::L1 {
            m + n + i * m + j
        } else {
            m + n + i
        }
    };
    let mut rows = Vec::new();
    let mut sum = vec![0.0; width];
    sum[..m].iter_mut().for_each(|v| *v = 1.0);
    rows.push(LinearConstraint::new(sum, Rel::Eq, 1.0));
    for i in 0..n {
        let p = profile.peak(i);
        for j in 0..m {
            let mut above = vec![0.0; width];
            above[t(i, j)] = 1.0;
            above[j] = 1.0;
            rows.push(LinearConstraint::new(above, Rel::Ge, p[j]));
            let mut below = vec![0.0; width];
            below[t(i, j)] = 1.0;
            below[j] = -1.0;
            rows.push(LinearConstraint::new(below, Rel::Ge, -p[j]));
        }
        let mut budget = vec![0.0; width];
        budget[slack(i)] = 1.0;
        if model == UtilityModel::L1 {
            for j in 0..m {
                budget[t(i, j)] = 1.0;
            }
        } else {
            budget[t(i, 0)] = 1.0;
        }
        rows.push(LinearConstraint::new(
            budget,
            Rel::Le,
            distance(model, p, q)?,
        ));
    }
    let mut objective = vec![0.0; width];
    for i in 0..n {
        objective[slack(i)] = 1.0;
    }
    let mut report = AuditReport::new("efficiency", LP_IMPROVEMENT_EPS);
    report.evaluated = 1;
    match simplex_solve(&LpProblem {
        objective,
        constraints: rows,
    }) {
        LpOutcome::Optimal { x, value } if value > LP_IMPROVEMENT_EPS => {
            let q_prime = Distribution::normalized(x[..m].to_vec())?;
            let gains = gains_of(model, profile, q, &q_prime)?;
            Ok(report.fail(Witness::Improvement { q_prime, gains }))
        }
        LpOutcome::Optimal { .. } => Ok(report),
        other => Ok(report.inconclusive(format!("improvement LP ended as {other:?}"))),
    }
}

/// Searches the `1/k` lattice for a Pareto improvement on `q` with strict
/// margin [`GRID_MARGIN`].
pub fn efficiency_grid_search(
    model: UtilityModel,
    profile: &Profile,
    q: &Distribution,
    k: usize,
) -> Result<Option<Distribution>> {
    'points: for point in simplex_grid(profile.m(), k) {
        let cand = Distribution::new(point)?;
        let mut strict = false;
        for p in profile.peaks() {
            match prefers(model, p, &cand, q, 0.0)? {
                core::cmp::Ordering::Less => continue 'points,
                _ => strict |= gain(model, p, &cand, q)? > GRID_MARGIN,
            }
        }
        if strict {
            return Ok(Some(cand));
        }
    }
    Ok(None)
}

/// Checks `min_i p_ij <= q_j <= max_i p_ij` within `1e-9`.
pub fn check_range_respect(profile: &Profile, q: &Distribution) -> AuditReport {
    let mut report = AuditReport::new("range-respect", 1e-9);
    report.evaluated = q.len();
    for j in 0..q.len() {
        let lower = profile.min_column(j);
        let upper = profile.max_column(j);
        if q[j] < lower - 1e-9 || q[j] > upper + 1e-9 {
            return report.fail(Witness::Coordinate {
                alternative: j,
                value: q[j],
                lower,
                upper,
            });
        }
    }
    report
}
