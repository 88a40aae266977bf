use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const TWO_AGENTS: &str = r#"{"m":3,"model":"leontief","agents":[[0.8,0.2,0.0],[0.8,0.0,0.2]]}"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_portionforge"))
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect()
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn aggregate_two_agents() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "two.json", TWO_AGENTS);
    let o = run(&["aggregate", "--mechanism", "nash", "--profile", p(&f)]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert!(close(
        &floats(&v["distribution"]),
        &[2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
        1e-6
    ));
    assert!(close(
        &floats(&v["utilities"]),
        &[5.0 / 6.0, 5.0 / 6.0],
        1e-6
    ));

    let o = run(&[
        "aggregate",
        "--mechanism",
        "independent-markets",
        "--profile",
        p(&f),
    ]);
    assert_eq!(code(&o), 0);
    assert!(close(
        &floats(&json(&o)["distribution"]),
        &[0.6, 0.2, 0.2],
        1e-9
    ));
}

#[test]
fn aggregate_contracts() {
    let dir = TempDir::new().unwrap();
    let m3 = write(
        &dir,
        "m3.json",
        r#"{"m":3,"model":"l1","agents":[[0.2,0.3,0.5],[0.5,0.5,0.0]]}"#,
    );
    let o = run(&[
        "aggregate",
        "--mechanism",
        "uniform-phantom",
        "--profile",
        p(&m3),
    ]);
    assert_eq!(code(&o), 3);
    let o = run(&[
        "aggregate",
        "--mechanism",
        "capped-nearest",
        "--profile",
        p(&m3),
    ]);
    assert_eq!(code(&o), 3);

    let m2 = write(
        &dir,
        "m2.json",
        r#"{"m":2,"model":"l1","agents":[[0.2,0.8],[0.5,0.5],[0.9,0.1]]}"#,
    );
    let o = run(&[
        "aggregate",
        "--mechanism",
        "uniform-phantom",
        "--profile",
        p(&m2),
    ]);
    assert_eq!(code(&o), 0);
    assert!(close(
        &floats(&json(&o)["distribution"]),
        &[0.5, 0.5],
        1e-12
    ));

    let one = write(
        &dir,
        "one.json",
        r#"{"m":3,"model":"l1","agents":[[0.91,0.08,0.01]]}"#,
    );
    let o = run(&[
        "aggregate",
        "--mechanism",
        "capped-nearest",
        "--profile",
        p(&one),
    ]);
    assert_eq!(code(&o), 0);
    assert!(close(
        &floats(&json(&o)["distribution"]),
        &[0.9, 0.085, 0.015],
        1e-12
    ));
    let o = run(&[
        "aggregate",
        "--mechanism",
        "capped-nearest",
        "--cap",
        "0.2",
        "--profile",
        p(&one),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn aggregate_outputs() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "two.json", TWO_AGENTS);
    let out = dir.path().join("out.json");
    let o = run(&[
        "aggregate",
        "--mechanism",
        "mean",
        "--profile",
        p(&f),
        "--out",
        p(&out),
    ]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(close(&floats(&v["distribution"]), &[0.8, 0.1, 0.1], 1e-12));

    let o = run(&[
        "aggregate",
        "--mechanism",
        "mean",
        "--profile",
        p(&f),
        "--format",
        "csv",
    ]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("# lossy"));
    assert!(text.contains("share,0,0.8\n"));

    let lex = write(
        &dir,
        "lex.json",
        &TWO_AGENTS.replace("\"leontief\"", "\"leximin-leontief\""),
    );
    let o = run(&["aggregate", "--mechanism", "nash", "--profile", p(&lex)]);
    assert_eq!(code(&o), 0);
    let ratios = &json(&o)["utilities"];
    assert_eq!(ratios.as_array().unwrap().len(), 2);
    assert_eq!(ratios[0].as_array().unwrap().len(), 2);
}

#[test]
fn malformed_input() {
    let dir = TempDir::new().unwrap();
    let bad = write(
        &dir,
        "bad.json",
        r#"{"m":3,"model":"leontief","agents":[[0.8,0.3,0.0]]}"#,
    );
    let o = run(&["aggregate", "--mechanism", "nash", "--profile", p(&bad)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("sum"));
    let o = run(&[
        "aggregate",
        "--mechanism",
        "nash",
        "--profile",
        "/nonexistent/x.json",
    ]);
    assert_eq!(code(&o), 2);
    let f = write(&dir, "two.json", TWO_AGENTS);
    assert_eq!(
        code(&run(&[
            "aggregate",
            "--mechanism",
            "median",
            "--profile",
            p(&f)
        ])),
        2
    );
    assert_eq!(
        code(&run(&["audit", "--axiom", "cfs", "--mechanism", "nash"])),
        2
    );
    assert_eq!(
        code(&run(&[
            "audit",
            "--axiom",
            "honesty",
            "--mechanism",
            "nash",
            "--profile",
            p(&f)
        ])),
        2
    );
    assert_eq!(
        code(&run(&[
            "audit",
            "--axiom",
            "cfs",
            "--mechanism",
            "nash",
            "--random",
            "0",
            "3",
            "4"
        ])),
        2
    );
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn audit_finds_the_small_misreport() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "manipulable.json", TWO_AGENTS);
    let o = run(&[
        "audit",
        "--axiom",
        "strategyproofness",
        "--mechanism",
        "independent-markets",
        "--model",
        "leontief",
        "--profile",
        p(&f),
    ]);
    assert_eq!(code(&o), 1);
    let v = json(&o);
    assert_eq!(v["verdict"], "fail");
    let report = &v["report"];
    assert_eq!(report["witness"]["type"], "manipulation");
    let gains: Vec<f64> = report["manipulations"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m["gain"].as_f64().unwrap())
        .collect();
    assert!(gains.iter().any(|g| (g - 0.025).abs() <= 1e-9), "{gains:?}");
    let top = report["witness"]["manipulation"]["gain"].as_f64().unwrap();
    assert!(gains.iter().all(|&g| g <= top + 1e-15));
}

#[test]
fn audit_nash_cfs_random() {
    let o = run(&[
        "audit",
        "--axiom",
        "cfs",
        "--mechanism",
        "nash",
        "--random",
        "5",
        "3",
        "100",
        "--seed",
        "7",
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["verdict"], "pass");
    assert_eq!(v["counts"]["pass"], 100);
}

#[test]
fn audit_range_respect() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "two.json", TWO_AGENTS);
    let o = run(&[
        "audit",
        "--axiom",
        "range-respect",
        "--mechanism",
        "nash",
        "--profile",
        p(&f),
    ]);
    assert_eq!(code(&o), 1);
    assert_eq!(json(&o)["report"]["witness"]["type"], "coordinate");
    let o = run(&[
        "audit",
        "--axiom",
        "range-respect",
        "--mechanism",
        "mean",
        "--profile",
        p(&f),
    ]);
    assert_eq!(code(&o), 0);
}

#[test]
fn audit_other_axioms() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "two.json", TWO_AGENTS);
    for (axiom, mechanism, expected) in [
        ("efficiency", "nash", 0),
        ("efficiency", "mean", 1),
        ("anonymity", "nash", 0),
        ("neutrality", "independent-markets", 0),
        ("participation", "nash", 0),
        ("continuity", "mean", 0),
        ("group-strategyproofness", "mean", 1),
    ] {
        let o = run(&[
            "audit",
            "--axiom",
            axiom,
            "--mechanism",
            mechanism,
            "--profile",
            p(&f),
        ]);
        assert_eq!(
            code(&o),
            expected,
            "{axiom} {mechanism}: {}",
            String::from_utf8_lossy(&o.stdout)
        );
    }
    let o = run(&[
        "audit",
        "--axiom",
        "proportionality",
        "--mechanism",
        "utilitarian-l1",
        "--random",
        "3",
        "3",
        "1",
    ]);
    assert_eq!(code(&o), 1);
    let o = run(&[
        "audit",
        "--axiom",
        "proportionality",
        "--mechanism",
        "mean",
        "--random",
        "4",
        "3",
        "1",
    ]);
    assert_eq!(code(&o), 0);
    let o = run(&[
        "audit",
        "--axiom",
        "cfs",
        "--mechanism",
        "mean",
        "--model",
        "l1",
        "--random",
        "3",
        "3",
        "4",
    ]);
    assert_eq!(json(&o)["model"], "l1");
}

#[test]
fn audit_reports_are_reproducible() {
    let args = [
        "audit",
        "--axiom",
        "strategyproofness",
        "--mechanism",
        "independent-markets",
        "--random",
        "3",
        "3",
        "12",
        "--seed",
        "11",
    ];
    let one = bin()
        .args(args)
        .env("PORTIONFORGE_THREADS", "1")
        .output()
        .unwrap();
    let many = bin()
        .args(args)
        .env("PORTIONFORGE_THREADS", "6")
        .output()
        .unwrap();
    let again = bin().args(args).output().unwrap();
    assert_eq!(code(&one), code(&many));
    assert_eq!(one.stdout, many.stdout);
    assert_eq!(one.stdout, again.stdout);
    let other = bin()
        .args(&args[..args.len() - 1])
        .arg("12")
        .output()
        .unwrap();
    assert_ne!(one.stdout, other.stdout);

    let timed = bin().args(args).arg("--timings").output().unwrap();
    assert!(json(&timed)["timings"]["total_ms"].is_number());
    assert!(json(&one).get("timings").is_none());
}

fn json_lines(o: &Output) -> Vec<Value> {
    String::from_utf8(o.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn verify_impossibility_log() {
    for (model, agents) in [("l1", "3"), ("linf", "7")] {
        let o = run(&["verify-impossibility", "--model", model, "--agents", agents]);
        assert_eq!(code(&o), 0, "{model} {agents}");
        let lines = json_lines(&o);
        let (summary, steps) = lines.split_last().unwrap();
        assert_eq!(summary["summary"]["certified"], true);
        assert!(!steps.is_empty());
        for s in steps {
            assert!(s["id"].is_string() && s["claim"].is_string());
            assert_eq!(s["status"], "certified");
        }
    }
    let o = run(&["verify-impossibility", "--model", "l1", "--agents", "2"]);
    assert_eq!(code(&o), 2);
    let o = run(&["verify-impossibility", "--model", "l2", "--agents", "3"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn verify_impossibility_gauntlet() {
    for mechanism in ["nash", "mean", "independent-markets", "utilitarian-l1"] {
        let o = run(&[
            "verify-impossibility",
            "--model",
            "l1",
            "--agents",
            "4",
            "--alternatives",
            "4",
            "--mechanism",
            mechanism,
        ]);
        assert_eq!(code(&o), 0);
        let last = json_lines(&o).pop().unwrap();
        let g = &last["gauntlet"];
        assert_eq!(g["mechanism"], mechanism);
        assert!(g["violated"].is_string(), "{mechanism}: {g}");
        assert_eq!(g["report"]["verdict"], "fail");
    }
    let o = run(&[
        "verify-impossibility",
        "--model",
        "linf",
        "--agents",
        "3",
        "--mechanism",
        "uniform-phantom",
    ]);
    assert_eq!(code(&o), 3);
}

#[test]
fn oracle_and_certificate() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "two.json", TWO_AGENTS);
    let o = run(&[
        "oracle",
        "--objective",
        "nash",
        "--profile",
        p(&f),
        "--resolution",
        "300",
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert!(close(
        &floats(&v["point"]),
        &[2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
        1e-2
    ));
    assert!(v["l1_gap"].as_f64().unwrap() <= 1e-2);

    let o = run(&[
        "oracle",
        "--objective",
        "utilitarian",
        "--profile",
        p(&f),
        "--resolution",
        "40",
    ]);
    assert_eq!(code(&o), 0);
    assert!(json(&o)["l1_gap"].as_f64().unwrap() <= 5e-2);
    let o = run(&[
        "oracle",
        "--objective",
        "nash",
        "--profile",
        p(&f),
        "--resolution",
        "300",
        "--budget",
        "10",
    ]);
    assert_eq!(code(&o), 2);

    let o = run(&["certify-nash", "--profile", p(&f)]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["certified"], true);
    assert!(v["flow_value"].as_f64().unwrap() >= 1.0 - 1e-7);
    let scores = v["scores"].as_array().unwrap();
    for row in scores {
        assert!((floats(row).iter().sum::<f64>() - 0.5).abs() <= 1e-7);
    }
}
