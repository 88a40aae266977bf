use alloc::string::String;
use alloc::vec::Vec;

use crate::model::{Distribution, Profile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Where a misreport candidate came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CandidateKind {
    Truth,
    Output,
    Vertex,
    CriticalProjection,
    Exaggeration,
    MassShift,
    Grid,
    Random,
    /// A misreport prescribed by a fixed profile pair.
    Fixed,
}

impl CandidateKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CandidateKind::Truth => "truth",
            CandidateKind::Output => "output",
            CandidateKind::Vertex => "vertex",
            CandidateKind::CriticalProjection => "critical-projection",
            CandidateKind::Exaggeration => "exaggeration",
            CandidateKind::MassShift => "mass-shift",
            CandidateKind::Grid => "grid",
            CandidateKind::Random => "random",
            CandidateKind::Fixed => "fixed",
        }
    }

    /// Targeted candidates are constructed from the instance rather than
    /// enumerated or sampled.
    pub fn is_targeted(self) -> bool {
        !matches!(self, CandidateKind::Grid | CandidateKind::Random)
    }
}

/// A profitable misreport by one agent or a coalition.
#[derive(Clone, Debug, PartialEq)]
pub struct Manipulation {
    pub agents: Vec<usize>,
    pub misreports: Vec<Distribution>,
    pub truthful_output: Distribution,
    pub manipulated_output: Distribution,
    /// Gain of each deviating agent, in `agents` order.
    pub gains: Vec<f64>,
    pub kind: CandidateKind,
    /// Set when the mechanism broke a tie on either profile.
    pub tie_artifact: bool,
}

impl Manipulation {
    pub fn max_gain(&self) -> f64 {
        self.gains.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn label(&self) -> Option<&'static str> {
        self.tie_artifact.then_some("tie-artifact")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Witness {
    Manipulation(Manipulation),
    /// A distribution every agent weakly prefers and some agent strictly
    /// prefers.
    Improvement {
        q_prime: Distribution,
        gains: Vec<f64>,
    },
    /// A coordinate outside the allowed interval.
    Coordinate {
        alternative: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },
    /// A profile on which the mechanism missed its target output.
    Profile {
        profile: Profile,
        output: Distribution,
        expected: Distribution,
    },
    /// A group that can block, with the redistribution it would fund.
    BlockingGroup {
        group: Vec<usize>,
        q_prime: Distribution,
        slack: f64,
    },
    /// An alternative that is funded but critical for nobody.
    Uncovered {
        alternative: usize,
        value: f64,
    },
    /// Output displacement per perturbation size.
    Displacement {
        deltas: Vec<f64>,
        displacements: Vec<f64>,
    },
    /// An agent that is worse off for participating.
    Participation {
        agent: usize,
        with: f64,
        without: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditReport {
    pub axiom: String,
    pub verdict: Verdict,
    /// The slack used for strict comparisons.
    pub margin: f64,
    pub witness: Option<Witness>,
    /// Every targeted manipulation found (strategyproofness audits).
    pub manipulations: Vec<Manipulation>,
    /// Number of instances or candidates evaluated.
    pub evaluated: usize,
    pub notes: Vec<String>,
}

impl AuditReport {
    pub fn new(axiom: &str, margin: f64) -> Self {
        AuditReport {
            axiom: axiom.into(),
            verdict: Verdict::Pass,
            margin,
            witness: None,
            manipulations: Vec::new(),
            evaluated: 0,
            notes: Vec::new(),
        }
    }

    pub fn fail(mut self, witness: Witness) -> Self {
        self.verdict = Verdict::Fail;
        self.witness = Some(witness);
        self
    }

    pub fn inconclusive(mut self, note: impl Into<String>) -> Self {
        self.verdict = Verdict::Inconclusive;
        self.notes.push(note.into());
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn failed(&self) -> bool {
        self.verdict == Verdict::Fail
    }

    /// The witnessed manipulation, if any.
    pub fn manipulation(&self) -> Option<&Manipulation> {
        match &self.witness {
            Some(Witness::Manipulation(m)) => Some(m),
            _ => None,
        }
    }
}
