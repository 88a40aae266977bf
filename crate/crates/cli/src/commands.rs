use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use clap::ValueEnum;
use portionforge_core::axioms::{
    audit_continuity, audit_group_sp, audit_strategyproofness, check_anonymity, check_cfs_leontief,
    check_cfs_search, check_efficiency, check_neutrality, check_participation,
    check_proportionality, check_range_respect, AuditReport, SearchConfig, Verdict,
};
use portionforge_core::impossibility::{mechanism_gauntlet_padded, verify_chain_padded, Metric};
use portionforge_core::mechanism::by_name;
use portionforge_core::model::{distance, utility, RatioVector};
use portionforge_core::numerics::grid::DEFAULT_POINT_BUDGET;
use portionforge_core::numerics::grid_argmax;
use portionforge_core::sampling::{random_profile, rng};
use portionforge_core::welfare::{
    nash_objective, nash_optimize, nash_solve, utilitarian_l1, DEFAULT_TOL, FLOW_ACCEPT,
};
use portionforge_core::{Distribution, Mechanism, Profile, UtilityModel};
use serde_json::{json, Value};

use crate::args::{
    AggregateArgs, AuditArgs, Axiom, CertifyArgs, Cli, Command, Format, Objective, OracleArgs,
    VerifyArgs,
};
use crate::files::ProfileFile;
use crate::parallel::{par_map, thread_count};
use crate::{encode, CliError, CliResult, EXIT_FAIL, EXIT_OK};

/// Tolerance of the permutation probes.
pub const PERMUTATION_TOL: f64 = 1e-7;
/// Tolerance of the participation probe.
pub const PARTICIPATION_TOL: f64 = 1e-6;
/// Lattice resolution of the general-model blocking search.
pub const CFS_SEARCH_RESOLUTION: usize = 20;
/// Failing trials kept in a random-audit report.
pub const MAX_REPORTED_FAILURES: usize = 10;

pub fn dispatch(cli: Cli, argv: &[String], out: &mut dyn Write) -> CliResult<u8> {
    match cli.command {
        Command::Aggregate(a) => aggregate(&a, out),
        Command::Audit(a) => audit(&a, argv, out),
        Command::VerifyImpossibility(a) => verify_impossibility(&a, out),
        Command::Oracle(a) => oracle(&a, out),
        Command::CertifyNash(a) => certify_nash(&a, out),
    }
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => out
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json values serialize") + "\n"
}

fn mechanism(name: &str, cap: f64) -> CliResult<Box<dyn Mechanism>> {
    by_name(name, cap).map_err(|e| CliError::Usage(e.to_string()))
}

fn parse_model(s: &str) -> CliResult<UtilityModel> {
    s.parse()
        .map_err(|e: portionforge_core::Error| CliError::Usage(e.to_string()))
}

fn utilities(model: UtilityModel, profile: &Profile, q: &Distribution) -> CliResult<Value> {
    if model == UtilityModel::LeximinLeontief {
        let vectors = profile
            .peaks()
            .iter()
            .map(|p| RatioVector::new(p, q).map(|r| r.ratios().collect::<Vec<_>>()))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(json!(vectors));
    }
    let u = profile
        .peaks()
        .iter()
        .map(|p| utility(model, p, q))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(json!(u))
}

pub fn aggregate(a: &AggregateArgs, out: &mut dyn Write) -> CliResult<u8> {
    let file = ProfileFile::read(&a.profile)?;
    let (model, profile) = (file.model()?, file.profile()?);
    let mech = mechanism(&a.mechanism, a.cap)?;
    let q = mech.aggregate(&profile)?;
    let utils = utilities(model, &profile, &q)?;
    let text = match a.format {
        Format::Json => pretty(&json!({
            "mechanism": mech.name(),
            "model": model.tag(),
            "distribution": encode::distribution(&q),
            "utilities": utils,
            "tie": mech.has_tie(&profile),
        })),
        Format::Csv => {
            let mut s = String::from(
                "# lossy export (floats only); json is the canonical format\nkind,index,value\n",
            );
            for (j, x) in q.iter().enumerate() {
                s += &format!("share,{j},{x}\n");
            }
            if let Value::Array(us) = &utils {
                for (i, u) in us.iter().enumerate() {
                    if let Some(u) = u.as_f64() {
                        s += &format!("utility,{i},{u}\n");
                    }
                }
            }
            s
        }
    };
    emit(out, a.out.as_deref(), &text)?;
    Ok(EXIT_OK)
}

/// Runs one axiom on one profile.
pub fn audit_profile(
    axiom: Axiom,
    mech: &dyn Mechanism,
    model: UtilityModel,
    profile: &Profile,
    samples: usize,
    seed: u64,
) -> CliResult<AuditReport> {
    let config = SearchConfig::default().with_seed(seed);
    let output = || mech.aggregate(profile);
    Ok(match axiom {
        Axiom::Strategyproofness => audit_strategyproofness(mech, model, profile, &config)?,
        Axiom::GroupStrategyproofness => {
            audit_group_sp(mech, model, profile, profile.n().min(3), &config)?
        }
        Axiom::Efficiency => check_efficiency(model, profile, &output()?)?,
        Axiom::RangeRespect => check_range_respect(profile, &output()?),
        Axiom::Proportionality => {
            check_proportionality(mech, profile.n(), profile.m(), samples, seed)?
        }
        Axiom::Cfs => match model {
            UtilityModel::Leontief | UtilityModel::LeximinLeontief => {
                check_cfs_leontief(profile, &output()?, samples, seed)?
            }
            _ => check_cfs_search(model, profile, &output()?, CFS_SEARCH_RESOLUTION)?,
        },
        Axiom::Anonymity => check_anonymity(mech, profile, PERMUTATION_TOL, samples.min(24), seed)?,
        Axiom::Neutrality => {
            check_neutrality(mech, profile, PERMUTATION_TOL, samples.min(24), seed)?
        }
        Axiom::Participation => check_participation(mech, model, profile, PARTICIPATION_TOL)?,
        Axiom::Continuity => {
            audit_continuity(mech, profile, &[1e-2, 1e-3, 1e-4], samples.min(16), seed)?
        }
    })
}

fn trial_seed(seed: u64, trial: usize) -> u64 {
    seed.wrapping_add((trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

pub fn audit(a: &AuditArgs, argv: &[String], out: &mut dyn Write) -> CliResult<u8> {
    let start = Instant::now();
    let mech = mechanism(&a.mechanism, a.cap)?;
    let mut doc = json!({
        "command": argv,
        "seed": a.seed,
        "axiom": a.axiom.to_possible_value().expect("axioms have names").get_name(),
        "mechanism": mech.name(),
    });
    let verdict = if let Some(path) = &a.profile {
        let file = ProfileFile::read(path)?;
        let model = match &a.model {
            Some(m) => parse_model(m)?,
            None => file.model()?,
        };
        let report = audit_profile(a.axiom, &*mech, model, &file.profile()?, a.samples, a.seed)?;
        doc["model"] = json!(model.tag());
        doc["source"] = json!({"profile": path.display().to_string()});
        doc["verdict"] = json!(report.verdict.as_str());
        doc["report"] = encode::report(&report);
        report.verdict
    } else {
        let dims = a
            .random
            .as_deref()
            .expect("clap requires --profile or --random");
        let (n, m, trials) = (dims[0], dims[1], dims[2]);
        if n == 0 || m < 2 {
            return Err(CliError::Usage("--random needs n >= 1 and m >= 2".into()));
        }
        let model = a
            .model
            .as_deref()
            .map_or(Ok(UtilityModel::Leontief), parse_model)?;
        let trials = if a.axiom == Axiom::Proportionality {
            trials.min(1)
        } else {
            trials
        };
        let mut r = rng(a.seed);
        let profiles: Vec<Profile> = (0..trials).map(|_| random_profile(&mut r, n, m)).collect();
        let results = par_map(&profiles, thread_count(), |i, p| {
            audit_profile(a.axiom, &*mech, model, p, a.samples, trial_seed(a.seed, i))
        });
        let reports = results.into_iter().collect::<CliResult<Vec<_>>>()?;
        let count = |v: Verdict| reports.iter().filter(|r| r.verdict == v).count();
        let verdict = if count(Verdict::Fail) > 0 {
            Verdict::Fail
        } else if count(Verdict::Inconclusive) > 0 {
            Verdict::Inconclusive
        } else {
            Verdict::Pass
        };
        let failures: Vec<Value> = reports
            .iter()
            .zip(&profiles)
            .enumerate()
            .filter(|(_, (r, _))| r.failed())
            .take(MAX_REPORTED_FAILURES)
            .map(|(i, (r, p))| json!({"trial": i, "profile": encode::profile(p), "report": encode::report(r)}))
            .collect();
        doc["model"] = json!(model.tag());
        doc["source"] = json!({"random": {"agents": n, "alternatives": m, "trials": trials}});
        doc["verdict"] = json!(verdict.as_str());
        doc["counts"] = json!({
            "pass": count(Verdict::Pass),
            "fail": count(Verdict::Fail),
            "inconclusive": count(Verdict::Inconclusive),
        });
        doc["verdicts"] = json!(reports
            .iter()
            .map(|r| r.verdict.as_str())
            .collect::<Vec<_>>());
        doc["failures"] = Value::Array(failures);
        verdict
    };
    if a.timings {
        doc["timings"] = json!({"total_ms": start.elapsed().as_secs_f64() * 1e3});
    }
    emit(out, a.out.as_deref(), &pretty(&doc))?;
    Ok(if verdict == Verdict::Fail {
        EXIT_FAIL
    } else {
        EXIT_OK
    })
}

pub fn verify_impossibility(a: &VerifyArgs, out: &mut dyn Write) -> CliResult<u8> {
    let metric: Metric = a
        .model
        .parse()
        .map_err(|e: portionforge_core::Error| CliError::Usage(e.to_string()))?;
    let mech = a
        .mechanism
        .as_deref()
        .map(|name| mechanism(name, a.cap))
        .transpose()?;
    let report = verify_chain_padded(metric, a.agents, a.alternatives)?;
    let mut text = String::new();
    for step in &report.steps {
        text += &(encode::proof_step(step).to_string() + "\n");
    }
    text += &(encode::proof_summary(&report).to_string() + "\n");
    if let Some(mech) = &mech {
        let g = mechanism_gauntlet_padded(&**mech, metric, a.agents, a.alternatives)?;
        text += &(encode::gauntlet(mech.name(), &g).to_string() + "\n");
    }
    emit(out, None, &text)?;
    Ok(if report.certified { EXIT_OK } else { EXIT_FAIL })
}

pub fn oracle(a: &OracleArgs, out: &mut dyn Write) -> CliResult<u8> {
    let file = ProfileFile::read(&a.profile)?;
    let profile = file.profile()?;
    let m = profile.m();
    let budget = a.budget.unwrap_or(DEFAULT_POINT_BUDGET);
    let to_dist =
        |x: &[f64]| Distribution::normalized(x.to_vec()).expect("lattice points are distributions");
    let (grid, solver) = match a.objective {
        Objective::Nash => (
            grid_argmax(
                |x| nash_objective(&profile, &to_dist(x)),
                m,
                a.resolution,
                budget,
            )?,
            nash_optimize(&profile, DEFAULT_TOL)?,
        ),
        Objective::Utilitarian => {
            let objective = |x: &[f64]| {
                let q = to_dist(x);
                -profile
                    .peaks()
                    .iter()
                    .map(|p| distance(UtilityModel::L1, p, &q).unwrap_or(f64::INFINITY))
                    .sum::<f64>()
            };
            (
                grid_argmax(objective, m, a.resolution, budget)?,
                utilitarian_l1(&profile)?,
            )
        }
    };
    let point = to_dist(&grid.point);
    let doc = json!({
        "objective": a.objective.to_possible_value().expect("objectives have names").get_name(),
        "resolution": a.resolution,
        "point": grid.point,
        "value": grid.value,
        "visited": grid.visited.to_string(),
        "solver": encode::distribution(&solver),
        "l1_gap": point.l1_distance(&solver),
    });
    emit(out, None, &pretty(&doc))?;
    Ok(EXIT_OK)
}

pub fn certify_nash(a: &CertifyArgs, out: &mut dyn Write) -> CliResult<u8> {
    let file = ProfileFile::read(&a.profile)?;
    let profile = file.profile()?;
    let s = nash_solve(&profile, a.tol)?;
    let certified = s.decomposition.flow_value >= 1.0 - FLOW_ACCEPT;
    let doc = json!({
        "distribution": encode::distribution(&s.q),
        "utilities": s.utilities,
        "scores": s.decomposition.scores,
        "flow_value": s.decomposition.flow_value,
        "residual": s.decomposition.residual(&s.q),
        "certificate_eps": s.certificate_eps,
        "newton_steps": s.newton_steps,
        "certified": certified,
    });
    emit(out, None, &pretty(&doc))?;
    Ok(if certified { EXIT_OK } else { EXIT_FAIL })
}
