//! Search for profitable misreports by single agents and small coalitions.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::gain;
use super::report::{AuditReport, CandidateKind, Manipulation, Witness};
use crate::error::{Error, Result};
use crate::mechanism::Mechanism;
use crate::model::{critical_set, Distribution, Profile, UtilityModel};
use crate::numerics::grid::{lattice_size, simplex_grid};
use crate::sampling::{random_distribution, rng};

/// Settings shared by the manipulation audits.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    /// Finest lattice resolution tried for single-agent grids.
    pub grid_resolution: usize,
    /// Upper bound on lattice points per agent; the resolution is lowered
    /// until the lattice fits.
    pub max_grid_points: u128,
    /// Random misreports per agent.
    pub random_samples: usize,
    /// Random joint misreports per coalition.
    pub joint_samples: usize,
    /// Amounts moved between pairs of alternatives.
    pub shift_steps: Vec<f64>,
    /// Gains must exceed this to count as strict.
    pub margin: f64,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            grid_resolution: 20,
            max_grid_points: 2_000,
            random_samples: 100,
            joint_samples: 200,
            shift_steps: vec![0.02, 0.05, 0.1],
            margin: 1e-7,
            seed: 0,
        }
    }
}

impl SearchConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn agent_seed(&self, salt: u64) -> u64 {
        self.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15)
    }
}

fn push_normalized(out: &mut Vec<(CandidateKind, Distribution)>, kind: CandidateKind, v: Vec<f64>) {
    if let Ok(d) = Distribution::normalized(v.into_iter().map(|x| x.max(0.0)).collect()) {
        out.push((kind, d));
    }
}

/// Misreports built from the instance: the truth, the current output,
/// vertices, projections onto the critical alternatives, exaggerations away
/// from the output and small pairwise mass shifts.
fn targeted_candidates(
    peak: &Distribution,
    output: &Distribution,
    steps: &[f64],
) -> Vec<(CandidateKind, Distribution)> {
    let m = peak.len();
    let mut out = vec![
        (CandidateKind::Truth, peak.clone()),
        (CandidateKind::Output, output.clone()),
    ];
    for j in 0..m {
        out.push((CandidateKind::Vertex, Distribution::vertex(m, j)));
    }
    let crit = critical_set(peak, output, 1e-9);
    let on = |set: &dyn Fn(usize) -> bool| {
        (0..m)
            .map(|j| if set(j) { peak[j] } else { 0.0 })
            .collect::<Vec<_>>()
    };
    push_normalized(
        &mut out,
        CandidateKind::CriticalProjection,
        on(&|j| crit.contains(&j)),
    );
    push_normalized(
        &mut out,
        CandidateKind::CriticalProjection,
        on(&|j| !crit.contains(&j)),
    );
    push_normalized(
        &mut out,
        CandidateKind::CriticalProjection,
        (0..m)
            .map(|j| if crit.contains(&j) { 1.0 } else { 0.0 })
            .collect(),
    );
    for lambda in [0.5, 1.0, 2.0, 4.0] {
        push_normalized(
            &mut out,
            CandidateKind::Exaggeration,
            (0..m)
                .map(|j| peak[j] + lambda * (peak[j] - output[j]))
                .collect(),
        );
    }
    for a in 0..m {
        for b in 0..m {
            if a == b {
                continue;
            }
            for &s in steps {
                let amount = s.min(peak[a]);
                if amount <= 0.0 {
                    continue;
                }
                let mut v = peak.as_slice().to_vec();
                v[a] -= amount;
                v[b] += amount;
                push_normalized(&mut out, CandidateKind::MassShift, v);
            }
        }
    }
    out
}

fn all_candidates(
    peak: &Distribution,
    output: &Distribution,
    config: &SearchConfig,
    salt: u64,
) -> Vec<(CandidateKind, Distribution)> {
    let m = peak.len();
    let mut out = targeted_candidates(peak, output, &config.shift_steps);
    let mut k = config.grid_resolution;
    while k > 1 && lattice_size(m, k) > config.max_grid_points {
        k -= 1;
    }
    if k >= 1 && lattice_size(m, k) <= config.max_grid_points {
        for p in simplex_grid(m, k) {
            push_normalized(&mut out, CandidateKind::Grid, p);
        }
    }
    let mut r = rng(config.agent_seed(salt));
    for _ in 0..config.random_samples {
        out.push((CandidateKind::Random, random_distribution(&mut r, m)));
    }
    out
}

/// Searches each agent's misreports for a strict gain above
/// `config.margin`. The witness is the largest gain found (the earliest
/// candidate on ties); every targeted manipulation is also listed.
pub fn audit_strategyproofness<M: Mechanism + ?Sized>(
    mechanism: &M,
    model: UtilityModel,
    profile: &Profile,
    config: &SearchConfig,
) -> Result<AuditReport> {
    let mut report = AuditReport::new("strategyproofness", config.margin);
    let truthful = mechanism.aggregate(profile)?;
    let truth_tie = mechanism.has_tie(profile);
    let mut best: Option<Manipulation> = None;
    let mut errors = 0usize;
    for i in 0..profile.n() {
        let peak = profile.peak(i);
        for (kind, report_i) in all_candidates(peak, &truthful, config, i as u64) {
            let deviated = profile.with_peak(i, report_i.clone())?;
            let Ok(out) = mechanism.aggregate(&deviated) else {
                errors += 1;
                continue;
            };
            report.evaluated += 1;
            let g = gain(model, peak, &out, &truthful)?;
            if g <= config.margin {
                continue;
            }
            let manipulation = Manipulation {
                agents: vec![i],
                misreports: vec![report_i],
                truthful_output: truthful.clone(),
                manipulated_output: out,
                gains: vec![g],
                kind,
                tie_artifact: truth_tie || mechanism.has_tie(&deviated),
            };
            if best.as_ref().is_none_or(|b| g > b.max_gain()) {
                best = Some(manipulation.clone());
            }
            if kind.is_targeted() {
                report.manipulations.push(manipulation);
            }
        }
    }
    if errors > 0 {
        report = report.note(format!(
            "{errors} candidate evaluations failed and were skipped"
        ));
    }
    match best {
        Some(m) => Ok(report.fail(Witness::Manipulation(m))),
        None => Ok(report.note("no manipulation found")),
    }
}

fn joint_candidates(
    peak: &Distribution,
    output: &Distribution,
) -> Vec<(CandidateKind, Distribution)> {
    let m = peak.len();
    let mut out = vec![
        (CandidateKind::Truth, peak.clone()),
        (CandidateKind::Output, output.clone()),
    ];
    for j in 0..m {
        out.push((CandidateKind::Vertex, Distribution::vertex(m, j)));
    }
    let crit = critical_set(peak, output, 1e-9);
    push_normalized(
        &mut out,
        CandidateKind::CriticalProjection,
        (0..m)
            .map(|j| if crit.contains(&j) { peak[j] } else { 0.0 })
            .collect(),
    );
    push_normalized(
        &mut out,
        CandidateKind::Exaggeration,
        (0..m).map(|j| 2.0 * peak[j] - output[j]).collect(),
    );
    out
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Joint misreport search for every coalition of at most
/// `max_group_size <= 3` agents. A manipulation leaves no member worse off
/// by more than the margin and gives some member a gain above it.
pub fn audit_group_sp<M: Mechanism + ?Sized>(
    mechanism: &M,
    model: UtilityModel,
    profile: &Profile,
    max_group_size: usize,
    config: &SearchConfig,
) -> Result<AuditReport> {
    if max_group_size == 0 || max_group_size > 3 {
        return Err(Error::InvalidArgument(
            "group size must be 1, 2 or 3".into(),
        ));
    }
    let mut single = audit_strategyproofness(mechanism, model, profile, config)?;
    single.axiom = "group-strategyproofness".into();
    if single.failed() {
        return Ok(single);
    }
    let mut report = single;
    let truthful = mechanism.aggregate(profile)?;
    let truth_tie = mechanism.has_tie(profile);
    let lists: Vec<Vec<(CandidateKind, Distribution)>> = profile
        .peaks()
        .iter()
        .map(|p| joint_candidates(p, &truthful))
        .collect();
    let m = profile.m();
    let mut best: Option<Manipulation> = None;
    let mut consider = |group: &[usize],
                        reports: Vec<Distribution>,
                        kind: CandidateKind,
                        report: &mut AuditReport|
     -> Result<()> {
        let mut deviated = profile.clone();
        for (&i, r) in group.iter().zip(&reports) {
            deviated = deviated.with_peak(i, r.clone())?;
        }
        let Ok(out) = mechanism.aggregate(&deviated) else {
            return Ok(());
        };
        report.evaluated += 1;
        let gains = group
            .iter()
            .map(|&i| gain(model, profile.peak(i), &out, &truthful))
            .collect::<Result<Vec<f64>>>()?;
        let loses = gains.iter().any(|&g| g < -config.margin);
        let top = gains.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !loses && top > config.margin && best.as_ref().is_none_or(|b| top > b.max_gain()) {
            best = Some(Manipulation {
                agents: group.to_vec(),
                misreports: reports,
                truthful_output: truthful.clone(),
                manipulated_output: out,
                gains,
                kind,
                tie_artifact: truth_tie || mechanism.has_tie(&deviated),
            });
        }
        Ok(())
    };
    for size in 2..=max_group_size.min(profile.n()) {
        for group in combinations(profile.n(), size) {
            let mut idx = vec![0usize; size];
            'product: loop {
                let reports: Vec<Distribution> = group
                    .iter()
                    .zip(&idx)
                    .map(|(&i, &k)| lists[i][k].1.clone())
                    .collect();
                if idx.iter().any(|&k| k != 0) {
                    let kind = group
                        .iter()
                        .zip(&idx)
                        .map(|(&i, &k)| lists[i][k].0)
                        .max()
                        .unwrap_or(CandidateKind::Truth);
                    consider(&group, reports, kind, &mut report)?;
                }
                for pos in (0..size).rev() {
                    idx[pos] += 1;
                    if idx[pos] < lists[group[pos]].len() {
                        continue 'product;
                    }
                    idx[pos] = 0;
                }
                break;
            }
            let salt = group.iter().fold(0x51u64, |acc, &i| {
                acc.wrapping_mul(31).wrapping_add(i as u64 + 1)
            });
            let mut r = rng(config.agent_seed(salt));
            for _ in 0..config.joint_samples {
                let reports = group
                    .iter()
                    .map(|_| random_distribution(&mut r, m))
                    .collect();
                consider(&group, reports, CandidateKind::Random, &mut report)?;
            }
        }
    }
    match best {
        Some(mm) => Ok(report.fail(Witness::Manipulation(mm))),
        None => Ok(report),
    }
}

/// Re-runs the mechanism on a reported manipulation and checks that it
/// still yields a strict gain above `margin` with no member losing more
/// than `margin`.
pub fn verify_manipulation<M: Mechanism + ?Sized>(
    mechanism: &M,
    model: UtilityModel,
    profile: &Profile,
    manipulation: &Manipulation,
    margin: f64,
) -> Result<bool> {
    let truthful = mechanism.aggregate(profile)?;
    let mut deviated = profile.clone();
    for (&i, r) in manipulation.agents.iter().zip(&manipulation.misreports) {
        deviated = deviated.with_peak(i, r.clone())?;
    }
    let out = mechanism.aggregate(&deviated)?;
    let mut strict = false;
    for &i in &manipulation.agents {
        let g = gain(model, profile.peak(i), &out, &truthful)?;
        if g < -margin {
            return Ok(false);
        }
        strict |= g > margin;
    }
    Ok(strict)
}
