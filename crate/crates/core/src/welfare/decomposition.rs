//! Flow certificates for Nash optimality.
//!
//! A distribution maximizes the Nash product exactly when it splits into
//! per-agent contributions of `1/n`, each spent only on that agent's
//! critical alternatives. The split is a bipartite flow problem.

use alloc::vec;
use alloc::vec::Vec;

use crate::model::{critical_set, Distribution, Profile};
use crate::numerics::flow::{max_flow, FlowNetwork};

/// A certificate is accepted when the flow reaches `1 - FLOW_ACCEPT`.
pub const FLOW_ACCEPT: f64 = 1e-7;

/// Scores `s[i][j] >= 0` with row sums `1/n` and column sums `q_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub scores: Vec<Vec<f64>>,
    pub flow_value: f64,
}

impl Decomposition {
    /// Largest deviation of a row sum from `1/n` or a column sum from `q_j`.
    pub fn residual(&self, q: &Distribution) -> f64 {
        let n = self.scores.len() as f64;
        let rows = self
            .scores
            .iter()
            .map(|r| (r.iter().sum::<f64>() - 1.0 / n).abs())
            .fold(0.0, f64::max);
        let cols = (0..q.len())
            .map(|j| (self.scores.iter().map(|r| r[j]).sum::<f64>() - q[j]).abs())
            .fold(0.0, f64::max);
        rows.max(cols)
    }
}

/// A group whose critical alternatives are too poorly funded:
/// `q(T_G) < |G|/n`.
#[derive(Clone, Debug, PartialEq)]
pub struct HallViolation {
    pub group: Vec<usize>,
    pub critical: Vec<usize>,
    pub critical_mass: f64,
    pub required: f64,
    pub flow_value: f64,
}

/// Tries to decompose `q` along `eps`-critical alternatives.
pub fn decomposition_certificate(
    profile: &Profile,
    q: &Distribution,
    eps: f64,
) -> Result<Decomposition, HallViolation> {
    decomposition_certificate_with(profile, q, eps, FLOW_ACCEPT)
}

/// As [`decomposition_certificate`] with an explicit acceptance gap.
pub fn decomposition_certificate_with(
    profile: &Profile,
    q: &Distribution,
    eps: f64,
    accept: f64,
) -> Result<Decomposition, HallViolation> {
    let n = profile.n();
    let m = profile.m();
    let source = 0;
    let sink = n + m + 1;
    let mut net = FlowNetwork::new(n + m + 2, source, sink);
    let critical: Vec<Vec<usize>> = profile
        .peaks()
        .iter()
        .map(|p| critical_set(p, q, eps))
        .collect();
    for i in 0..n {
        net.add_arc(source, 1 + i, 1.0 / n as f64);
    }
    let mut agent_arcs = Vec::new();
    for (i, set) in critical.iter().enumerate() {
        for &j in set {
            agent_arcs.push((i, j, net.add_arc(1 + i, 1 + n + j, 1.0)));
        }
    }
    for j in 0..m {
        net.add_arc(1 + n + j, sink, q[j]);
    }
    let flow = max_flow(net);
    if flow.value >= 1.0 - accept {
        let mut scores = vec![vec![0.0; m]; n];
        for &(i, j, arc) in &agent_arcs {
            scores[i][j] = flow.arc_flows[arc].max(0.0);
        }
        return Ok(Decomposition {
            scores,
            flow_value: flow.value,
        });
    }
    let group: Vec<usize> = (0..n).filter(|&i| flow.source_side[1 + i]).collect();
    let mut crit: Vec<usize> = group
        .iter()
        .flat_map(|&i| critical[i].iter().copied())
        .collect();
    crit.sort_unstable();
    crit.dedup();
    Err(HallViolation {
        critical_mass: q.mass(&crit),
        required: group.len() as f64 / n as f64,
        critical: crit,
        group,
        flow_value: flow.value,
    })
}
