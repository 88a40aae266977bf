//! Runs a concrete mechanism through the profiles of the impossibility
//! argument and reports the first axiom it visibly breaks.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;

use super::chain::verify_family;
use super::family::{gen_profiles_padded, to_distribution};
use super::Metric;
use crate::axioms::{check_efficiency, AuditReport, CandidateKind, Manipulation, Witness};
use crate::error::{Error, Result};
use crate::mechanism::Mechanism;
use crate::model::{distance, Distribution, Profile};

/// Slack for the float comparisons on mechanism outputs.
pub const GAUNTLET_MARGIN: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq)]
pub struct GauntletOutcome {
    /// `"proportionality"`, `"strategyproofness"` or `"efficiency"`.
    pub violated: Option<&'static str>,
    /// Label of the profile where the violation shows.
    pub profile: Option<String>,
    pub report: AuditReport,
    /// The mechanism's output on every profile of the family.
    pub outputs: BTreeMap<String, Distribution>,
}

pub fn mechanism_gauntlet<M: Mechanism + ?Sized>(
    mechanism: &M,
    metric: Metric,
    n: usize,
) -> Result<GauntletOutcome> {
    mechanism_gauntlet_padded(mechanism, metric, n, 3)
}

/// Checks, in order, proportionality on the single-minded profiles, each
/// strategyproofness constraint the argument uses, and efficiency on the
/// remaining profiles.
pub fn mechanism_gauntlet_padded<M: Mechanism + ?Sized>(
    mechanism: &M,
    metric: Metric,
    n: usize,
    m: usize,
) -> Result<GauntletOutcome> {
    let fam = gen_profiles_padded(metric, n, m)?;
    let proof = verify_family(&fam)?;
    if !proof.certified {
        return Err(Error::InvalidArgument(
            "the profile family does not certify".into(),
        ));
    }
    let mut profiles: BTreeMap<String, Profile> = BTreeMap::new();
    let mut outputs: BTreeMap<String, Distribution> = BTreeMap::new();
    for p in fam.all() {
        let profile = p.to_profile()?;
        outputs.insert(p.label.clone(), mechanism.aggregate(&profile)?);
        profiles.insert(p.label.clone(), profile);
    }
    let mut report = AuditReport::new("gauntlet", GAUNTLET_MARGIN);
    let done = |report: AuditReport, axiom: &'static str, label: &str, outputs| GauntletOutcome {
        violated: Some(axiom),
        profile: Some(label.to_string()),
        report: report.note(format!("{axiom} fails on profile {label}")),
        outputs,
    };

    for p in fam.all().filter(|p| p.is_single_minded()) {
        report.evaluated += 1;
        let expected = to_distribution(&p.mean())?;
        let output = &outputs[&p.label];
        let gap = output
            .iter()
            .zip(expected.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if gap > GAUNTLET_MARGIN {
            let report = report.fail(Witness::Profile {
                profile: profiles[&p.label].clone(),
                output: output.clone(),
                expected,
            });
            return Ok(done(report, "proportionality", &p.label, outputs));
        }
    }

    let model = metric.utility_model();
    for (agent, truthful, misreport) in proof.manipulations() {
        report.evaluated += 1;
        let peak = profiles[&truthful].peak(agent).clone();
        let honest = &outputs[&truthful];
        let lied = &outputs[&misreport];
        let gain = distance(model, &peak, honest)? - distance(model, &peak, lied)?;
        if gain > GAUNTLET_MARGIN {
            let tie =
                mechanism.has_tie(&profiles[&truthful]) || mechanism.has_tie(&profiles[&misreport]);
            let report = report.fail(Witness::Manipulation(Manipulation {
                agents: vec![agent],
                misreports: vec![profiles[&misreport].peak(agent).clone()],
                truthful_output: honest.clone(),
                manipulated_output: lied.clone(),
                gains: vec![gain],
                kind: CandidateKind::Fixed,
                tie_artifact: tie,
            }));
            let label = format!("{truthful}->{misreport}");
            return Ok(done(report, "strategyproofness", &label, outputs));
        }
    }

    for p in fam.all().filter(|p| !p.is_single_minded()) {
        report.evaluated += 1;
        let audit = check_efficiency(model, &profiles[&p.label], &outputs[&p.label])?;
        if audit.failed() {
            let mut report = report;
            report.verdict = audit.verdict;
            report.witness = audit.witness;
            return Ok(done(report, "efficiency", &p.label, outputs));
        }
    }

    Ok(GauntletOutcome {
        violated: None,
        profile: None,
        report: report.note("no violation detected within the margin"),
        outputs,
    })
}
