//! Symmetry, continuity and population probes.

use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::gain;
use super::report::{AuditReport, Witness};
use crate::error::{Error, Result};
use crate::mechanism::Mechanism;
use crate::model::{critical_set, utility, Distribution, Profile, UtilityModel};
use crate::sampling::{random_distribution, rng};

fn max_abs_diff(a: &Distribution, b: &Distribution) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn permutations(len: usize, count: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    out.push((0..len).rev().collect());
    if len > 1 {
        out.push((1..len).chain([0]).collect());
    }
    let mut r = rng(seed);
    for _ in 0..count {
        let mut p: Vec<usize> = (0..len).collect();
        p.shuffle(&mut r);
        out.push(p);
    }
    out
}

/// Checks that reordering the agents leaves the output unchanged (within
/// `tol`, coordinate-wise) for the reversal, a rotation and `count` random
/// permutations.
pub fn check_anonymity<M: Mechanism + ?Sized>(
    mechanism: &M,
    profile: &Profile,
    tol: f64,
    count: usize,
    seed: u64,
) -> Result<AuditReport> {
    let mut report = AuditReport::new("anonymity", tol);
    let base = mechanism.aggregate(profile)?;
    for perm in permutations(profile.n(), count, seed) {
        let permuted = profile.permute_agents(&perm);
        let output = mechanism.aggregate(&permuted)?;
        report.evaluated += 1;
        if max_abs_diff(&output, &base) > tol {
            return Ok(report.fail(Witness::Profile {
                profile: permuted,
                output,
                expected: base,
            }));
        }
    }
    Ok(report)
}

/// Checks that relabeling the alternatives relabels the output.
pub fn check_neutrality<M: Mechanism + ?Sized>(
    mechanism: &M,
    profile: &Profile,
    tol: f64,
    count: usize,
    seed: u64,
) -> Result<AuditReport> {
    let mut report = AuditReport::new("neutrality", tol);
    let base = mechanism.aggregate(profile)?;
    for perm in permutations(profile.m(), count, seed) {
        let permuted = profile.permute_alternatives(&perm);
        let output = mechanism.aggregate(&permuted)?;
        let expected = base.permuted(&perm);
        report.evaluated += 1;
        if max_abs_diff(&output, &expected) > tol {
            return Ok(report.fail(Witness::Profile {
                profile: permuted,
                output,
                expected,
            }));
        }
    }
    Ok(report)
}

/// `q_j <= max_i p_ij + slack` for every alternative.
pub fn check_one_sided_range_respect(
    profile: &Profile,
    q: &Distribution,
    slack: f64,
) -> AuditReport {
    let mut report = AuditReport::new("one-sided-range-respect", slack);
    report.evaluated = q.len();
    for j in 0..q.len() {
        let upper = profile.max_column(j);
        if q[j] > upper + slack {
            return report.fail(Witness::Coordinate {
                alternative: j,
                value: q[j],
                lower: 0.0,
                upper,
            });
        }
    }
    report
}

/// The first alternative funded above `funded_eps` that is not
/// `crit_eps`-critical for any agent.
pub fn critical_coverage(
    profile: &Profile,
    q: &Distribution,
    funded_eps: f64,
    crit_eps: f64,
) -> Option<usize> {
    let sets: Vec<Vec<usize>> = profile
        .peaks()
        .iter()
        .map(|p| critical_set(p, q, crit_eps))
        .collect();
    (0..q.len()).find(|&j| q[j] > funded_eps && !sets.iter().any(|s| s.contains(&j)))
}

/// No agent is better off staying away: `u_i(f(P)) >= u_i(f(P − i)) − tol`.
pub fn check_participation<M: Mechanism + ?Sized>(
    mechanism: &M,
    model: UtilityModel,
    profile: &Profile,
    tol: f64,
) -> Result<AuditReport> {
    let mut report = AuditReport::new("participation", tol);
    if profile.n() < 2 {
        return Ok(report.inconclusive("needs at least two agents"));
    }
    let with = mechanism.aggregate(profile)?;
    for i in 0..profile.n() {
        let without = mechanism.aggregate(&profile.without_agent(i)?)?;
        report.evaluated += 1;
        let g = gain(model, profile.peak(i), &with, &without)?;
        if g < -tol {
            let (uw, uo) = match model {
                UtilityModel::LeximinLeontief => (f64::NAN, f64::NAN),
                _ => (
                    utility(model, profile.peak(i), &with)?,
                    utility(model, profile.peak(i), &without)?,
                ),
            };
            return Ok(report.fail(Witness::Participation {
                agent: i,
                with: uw,
                without: uo,
            }));
        }
    }
    Ok(report)
}

/// If `f(P1)` and `f(P2)` agree (within `1e-9` in ℓ1), `f(P1 ∪ P2)` must
/// equal them within `tol`. Inconclusive when the premise fails.
pub fn check_reinforcement<M: Mechanism + ?Sized>(
    mechanism: &M,
    p1: &Profile,
    p2: &Profile,
    tol: f64,
) -> Result<AuditReport> {
    let report = AuditReport::new("reinforcement", tol);
    let q1 = mechanism.aggregate(p1)?;
    let q2 = mechanism.aggregate(p2)?;
    if q1.l1_distance(&q2) > 1e-9 {
        return Ok(report.inconclusive("the two profiles have different outputs"));
    }
    let joint = p1.union(p2)?;
    let q = mechanism.aggregate(&joint)?;
    let mut report = report;
    report.evaluated = 3;
    if max_abs_diff(&q, &q1) > tol {
        return Ok(report.fail(Witness::Profile {
            profile: joint,
            output: q,
            expected: q1,
        }));
    }
    Ok(report)
}

/// Perturbs the profile by total ℓ1 amount `δ` (`samples` seeded draws per
/// `δ`) and records the largest ℓ1 displacement of the output. Passes when
/// the displacements do not grow as `δ` shrinks and the last one is at most
/// half the first (or below `1e-9`). This is a trend heuristic, not a proof
/// of continuity.
pub fn audit_continuity<M: Mechanism + ?Sized>(
    mechanism: &M,
    profile: &Profile,
    deltas: &[f64],
    samples: usize,
    seed: u64,
) -> Result<AuditReport> {
    if deltas.is_empty()
        || deltas.iter().any(|&d| d.is_nan() || d <= 0.0)
        || deltas.windows(2).any(|w| w[0] <= w[1])
    {
        return Err(Error::InvalidArgument(
            "deltas must be positive and decreasing".into(),
        ));
    }
    let mut report = AuditReport::new("continuity", 1e-12);
    let base = mechanism.aggregate(profile)?;
    let mut r = rng(seed);
    let mut displacements = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let mut worst = 0.0f64;
        for _ in 0..samples {
            let targets: Vec<Distribution> = (0..profile.n())
                .map(|_| random_distribution(&mut r, profile.m()))
                .collect();
            let spread: f64 = profile
                .peaks()
                .iter()
                .zip(&targets)
                .map(|(p, t)| p.l1_distance(t))
                .sum();
            if spread <= 0.0 {
                continue;
            }
            let lambda = (delta / spread).min(1.0);
            let peaks = profile
                .peaks()
                .iter()
                .zip(&targets)
                .map(|(p, t)| t.mix(lambda, p))
                .collect();
            let perturbed = Profile::new(peaks)?;
            let out = mechanism.aggregate(&perturbed)?;
            report.evaluated += 1;
            worst = worst.max(out.l1_distance(&base));
        }
        displacements.push(worst);
    }
    let shrinking = displacements.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let first = displacements[0];
    let last = *displacements.last().expect("nonempty");
    let note = format!("displacements {displacements:?}");
    if shrinking && last <= (0.5 * first).max(1e-9) {
        Ok(report.note(note))
    } else {
        Ok(report
            .fail(Witness::Displacement {
                deltas: deltas.to_vec(),
                displacements,
            })
            .note(note))
    }
}
