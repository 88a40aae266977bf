//! Proportionality and core fair share.

use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use super::gain;
use super::report::{AuditReport, Witness};
use crate::error::{Error, Result};
use crate::mechanism::Mechanism;
use crate::model::{
    is_single_minded, leontief_utility, mean_rule, Distribution, Profile, UtilityModel,
};
use crate::numerics::grid::simplex_grid;
use crate::sampling::{rng, single_minded_profile};
use crate::welfare::decomposition_certificate;

/// Output deviation tolerated by the proportionality check.
pub const PROPORTIONALITY_TOL: f64 = 1e-7;
/// Slack of the exact Leontief blocking test.
pub const CFS_TOL: f64 = 1e-9;
/// Largest population for which every group is enumerated.
pub const CFS_EXHAUSTIVE_MAX: usize = 16;
/// Single-minded profiles enumerated before switching to sampling.
pub const PROPORTIONALITY_EXHAUSTIVE_MAX: u64 = 1_000_000;

/// Runs the mechanism on single-minded profiles (all of them when there are
/// at most a million, else `samples` seeded draws) and compares each output
/// with the mean of the peaks.
pub fn check_proportionality<M: Mechanism + ?Sized>(
    mechanism: &M,
    n: usize,
    m: usize,
    samples: usize,
    seed: u64,
) -> Result<AuditReport> {
    let mut report = AuditReport::new("proportionality", PROPORTIONALITY_TOL);
    let total = (m as u64).checked_pow(n as u32).unwrap_or(u64::MAX);
    let exhaustive = total <= PROPORTIONALITY_EXHAUSTIVE_MAX;
    let mut r = rng(seed);
    let count = if exhaustive { total } else { samples as u64 };
    for code in 0..count {
        let choices: Vec<usize> = if exhaustive {
            let mut c = alloc::vec![0; n];
            let mut x = code;
            for slot in c.iter_mut().rev() {
                *slot = (x % m as u64) as usize;
                x /= m as u64;
            }
            c
        } else {
            (0..n).map(|_| r.gen_range(0..m)).collect()
        };
        let profile = single_minded_profile(m, &choices);
        let output = mechanism.aggregate(&profile)?;
        let expected = mean_rule(&profile);
        report.evaluated += 1;
        let off = output
            .iter()
            .zip(expected.iter())
            .any(|(a, b)| (a - b).abs() > PROPORTIONALITY_TOL);
        if off {
            return Ok(report.fail(Witness::Profile {
                profile,
                output,
                expected,
            }));
        }
    }
    if !exhaustive {
        report = report.note(format!(
            "sampled {samples} of {total} single-minded profiles"
        ));
    }
    Ok(report)
}

/// `Σ_j max_{i ∈ G} u_i(q)·p_ij − |G|/n` for the group given as a bit
/// mask; the group blocks when this is negative.
pub fn cfs_group_slack(profile: &Profile, utilities: &[f64], group: u64) -> f64 {
    let n = profile.n();
    let members: Vec<usize> = (0..n).filter(|&i| group >> i & 1 == 1).collect();
    let sum: f64 = (0..profile.m())
        .map(|j| {
            members
                .iter()
                .map(|&i| utilities[i] * profile.peak(i)[j])
                .fold(0.0, f64::max)
        })
        .sum();
    sum - members.len() as f64 / n as f64
}

fn blocking_redistribution(
    profile: &Profile,
    utilities: &[f64],
    members: &[usize],
) -> Result<Distribution> {
    let n = profile.n() as f64;
    let m = profile.m();
    let scale = n / members.len() as f64;
    let l: Vec<f64> = (0..m)
        .map(|j| {
            scale
                * members
                    .iter()
                    .map(|&i| utilities[i] * profile.peak(i)[j])
                    .fold(0.0, f64::max)
        })
        .collect();
    let rest = (1.0 - l.iter().sum::<f64>()).max(0.0) / m as f64;
    Distribution::normalized(l.into_iter().map(|x| x + rest).collect())
}

fn members_of(n: usize, mask: u64) -> Vec<usize> {
    (0..n).filter(|&i| mask >> i & 1 == 1).collect()
}

/// Exact core-fair-share test for Leontief utilities.
///
/// A group `G` blocks `q` exactly when `Σ_j max_{i∈G} u_i(q)·p_ij < |G|/n`.
/// All groups are enumerated for `n <= 16`. Larger profiles pass when the
/// decomposition flow succeeds (Hall's condition is sufficient); otherwise
/// `samples` random groups are tried and the verdict is inconclusive if
/// none blocks.
pub fn check_cfs_leontief(
    profile: &Profile,
    q: &Distribution,
    samples: usize,
    seed: u64,
) -> Result<AuditReport> {
    let n = profile.n();
    let utilities: Vec<f64> = profile
        .peaks()
        .iter()
        .map(|p| leontief_utility(p, q))
        .collect();
    let mut report = AuditReport::new("core-fair-share", CFS_TOL);
    let masks: Vec<u64> = if n <= CFS_EXHAUSTIVE_MAX {
        (1u64..(1 << n)).collect()
    } else {
        if decomposition_certificate(profile, q, CFS_TOL).is_ok() {
            report.evaluated = 1;
            return Ok(report.note("Hall condition holds on critical alternatives"));
        }
        if n > 63 {
            return Err(Error::InvalidArgument(
                "core fair share test supports at most 63 agents".into(),
            ));
        }
        let mut r = rng(seed);
        let mut agents: Vec<usize> = (0..n).collect();
        (0..samples)
            .map(|_| {
                agents.shuffle(&mut r);
                let size = r.gen_range(1..=n);
                agents[..size].iter().fold(0u64, |acc, &i| acc | 1 << i)
            })
            .collect()
    };
    let mut worst: Option<(u64, f64)> = None;
    for &mask in &masks {
        let slack = cfs_group_slack(profile, &utilities, mask);
        report.evaluated += 1;
        if worst.is_none_or(|(_, s)| slack < s) {
            worst = Some((mask, slack));
        }
    }
    let (mask, slack) = worst.expect("at least one group");
    if slack < -CFS_TOL {
        let group = members_of(n, mask);
        let q_prime = blocking_redistribution(profile, &utilities, &group)?;
        return Ok(report.fail(Witness::BlockingGroup {
            group,
            q_prime,
            slack,
        }));
    }
    if n > CFS_EXHAUSTIVE_MAX {
        return Ok(report.inconclusive(format!("no blocking group among {samples} sampled groups")));
    }
    Ok(report.note(format!("smallest group slack {slack:e}")))
}

/// Evaluates the core-fair-share inequalities for one adversarial
/// completion `q2`: every member of `group` weakly prefers
/// `(|G|/n)·q1 + (1 − |G|/n)·q2` to `q` and some member strictly prefers it.
pub fn blocking_witness_check(
    model: UtilityModel,
    profile: &Profile,
    q: &Distribution,
    group: &[usize],
    q1: &Distribution,
    q2: &Distribution,
) -> Result<bool> {
    blocking_with_margin(model, profile, q, group, q1, q2, 0.0)
}

fn blocking_with_margin(
    model: UtilityModel,
    profile: &Profile,
    q: &Distribution,
    group: &[usize],
    q1: &Distribution,
    q2: &Distribution,
    margin: f64,
) -> Result<bool> {
    if group.is_empty() {
        return Err(Error::InvalidArgument(
            "blocking group must be nonempty".into(),
        ));
    }
    let w = group.len() as f64 / profile.n() as f64;
    let mix = q1.mix(w, q2);
    let mut strict = false;
    for &i in group {
        let g = gain(model, profile.peak(i), &mix, q)?;
        if g < -margin {
            return Ok(false);
        }
        strict |= g > margin;
    }
    Ok(strict)
}

/// Brute-force search for a blocking pair `(G, q1)` with `q1` on the `1/k`
/// lattice, testing every simplex vertex as the completion. Strict gains
/// must exceed `1e-12`.
pub fn cfs_blocking_search(
    model: UtilityModel,
    profile: &Profile,
    q: &Distribution,
    k: usize,
) -> Result<Option<(Vec<usize>, Distribution)>> {
    let n = profile.n();
    let m = profile.m();
    if n > 20 {
        return Err(Error::InvalidArgument(
            "brute-force blocking search supports at most 20 agents".into(),
        ));
    }
    let vertices: Vec<Distribution> = (0..m).map(|j| Distribution::vertex(m, j)).collect();
    let lattice: Vec<Distribution> = simplex_grid(m, k)
        .map(|p| Distribution::new(p).expect("lattice point"))
        .collect();
    for mask in 1u64..(1 << n) {
        let group = members_of(n, mask);
        'cands: for q1 in &lattice {
            for q2 in &vertices {
                if !blocking_with_margin(model, profile, q, &group, q1, q2, CFS_TOL)? {
                    continue 'cands;
                }
            }
            return Ok(Some((group, q1.clone())));
        }
    }
    Ok(None)
}

/// Core fair share by brute-force search, for any model. A found blocking
/// pair fails the check; otherwise the verdict is inconclusive (or pass
/// for Leontief, where the exact test is used instead).
pub fn check_cfs_search(
    model: UtilityModel,
    profile: &Profile,
    q: &Distribution,
    k: usize,
) -> Result<AuditReport> {
    if model == UtilityModel::Leontief {
        return check_cfs_leontief(profile, q, 0, 0);
    }
    let report = AuditReport::new("core-fair-share", CFS_TOL);
    match cfs_blocking_search(model, profile, q, k)? {
        Some((group, q_prime)) => Ok(report.fail(Witness::BlockingGroup {
            group,
            q_prime,
            slack: f64::NAN,
        })),
        None => {
            let extra = if is_single_minded(profile) {
                " (single-minded profile)"
            } else {
                ""
            };
            Ok(report.inconclusive(format!("no blocking group on the 1/{k} grid{extra}")))
        }
    }
}
