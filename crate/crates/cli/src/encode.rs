//! JSON views of core results.

use portionforge_core::axioms::{AuditReport, Manipulation, Witness};
use portionforge_core::impossibility::{GauntletOutcome, ProofReport, ProofStep};
use portionforge_core::{Distribution, Profile};
use serde_json::{json, Map, Value};

pub fn distribution(q: &Distribution) -> Value {
    json!(q.as_slice())
}

pub fn profile(p: &Profile) -> Value {
    Value::Array(p.peaks().iter().map(distribution).collect())
}

pub fn manipulation(m: &Manipulation) -> Value {
    json!({
        "agents": m.agents,
        "misreports": m.misreports.iter().map(distribution).collect::<Vec<_>>(),
        "truthful_output": distribution(&m.truthful_output),
        "manipulated_output": distribution(&m.manipulated_output),
        "gains": m.gains,
        "gain": m.max_gain(),
        "kind": m.kind.as_str(),
        "label": m.label(),
    })
}

pub fn witness(w: &Witness) -> Value {
    match w {
        Witness::Manipulation(m) => {
            json!({"type": "manipulation", "manipulation": manipulation(m)})
        }
        Witness::Improvement { q_prime, gains } => {
            json!({"type": "improvement", "q_prime": distribution(q_prime), "gains": gains})
        }
        Witness::Coordinate {
            alternative,
            value,
            lower,
            upper,
        } => json!({
            "type": "coordinate", "alternative": alternative, "value": value, "lower": lower, "upper": upper,
        }),
        Witness::Profile {
            profile: p,
            output,
            expected,
        } => json!({
            "type": "profile", "profile": profile(p), "output": distribution(output), "expected": distribution(expected),
        }),
        Witness::BlockingGroup {
            group,
            q_prime,
            slack,
        } => json!({
            "type": "blocking-group", "group": group, "q_prime": distribution(q_prime), "slack": slack,
        }),
        Witness::Uncovered { alternative, value } => {
            json!({"type": "uncovered", "alternative": alternative, "value": value})
        }
        Witness::Displacement {
            deltas,
            displacements,
        } => {
            json!({"type": "displacement", "deltas": deltas, "displacements": displacements})
        }
        Witness::Participation {
            agent,
            with,
            without,
        } => {
            json!({"type": "participation", "agent": agent, "with": with, "without": without})
        }
    }
}

pub fn report(r: &AuditReport) -> Value {
    let mut v = json!({
        "axiom": r.axiom,
        "verdict": r.verdict.as_str(),
        "margin": r.margin,
        "evaluated": r.evaluated,
        "witness": r.witness.as_ref().map(witness),
        "notes": r.notes,
    });
    if !r.manipulations.is_empty() {
        v["manipulations"] = Value::Array(r.manipulations.iter().map(manipulation).collect());
    }
    v
}

pub fn proof_step(s: &ProofStep) -> Value {
    let mut v = json!({
        "id": s.id,
        "profile": s.profile,
        "claim": s.claim,
        "method": s.method.tag(),
        "status": s.status.as_str(),
    });
    if let Some(d) = &s.detail {
        v["detail"] = json!(d);
    }
    v
}

pub fn proof_summary(r: &ProofReport) -> Value {
    json!({
        "summary": {
            "model": r.metric.tag(),
            "agents": r.n,
            "alternatives": r.m,
            "steps": r.steps.len(),
            "certified": r.certified,
            "terminal": r.terminal,
            "failed_step": r.failed_step().map(|s| s.id.clone()),
        }
    })
}

pub fn gauntlet(mechanism: &str, g: &GauntletOutcome) -> Value {
    let outputs: Map<String, Value> = g
        .outputs
        .iter()
        .map(|(k, q)| (k.clone(), distribution(q)))
        .collect();
    json!({
        "gauntlet": {
            "mechanism": mechanism,
            "violated": g.violated,
            "profile": g.profile,
            "report": report(&g.report),
            "outputs": outputs,
        }
    })
}
