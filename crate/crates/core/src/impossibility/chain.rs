//! Step-by-step exact verification of the two impossibility arguments.
//!
//! Each outcome `q^(k)` is tracked as a set of atoms. A step either adds a
//! fact (proportionality, a strategyproofness inequality, an efficiency
//! move) or claims a consequence, which is certified by showing that the
//! facts together with the negated claim describe an empty region. Claims
//! number agents from 1, like the profile tables.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::family::{gen_profiles_padded, CoordinateBound, RationalProfileFamily};
use super::region::{alt_name, exact_distance, implies, region_infeasible, render_point, Atom};
use super::Metric;
use crate::error::{Error, Result};
use crate::numerics::rational::q;
use crate::numerics::{Rational, Rel};

#[derive(Clone, Debug, PartialEq)]
pub enum Method {
    Proportionality,
    /// `agent` (0-based) must not gain by reporting its peak in
    /// `misreport` when its true peak is the one in `truthful`.
    Strategyproofness {
        agent: usize,
        truthful: String,
        misreport: String,
    },
    /// A bound on a distance over the region known for an outcome.
    Bound,
    Consequence,
    /// Moving mass from `from` to `to` is a Pareto improvement everywhere
    /// in the excluded region; `gaining_agent` strictly gains.
    Efficiency {
        from: usize,
        to: usize,
        gaining_agent: usize,
    },
    Assumption,
    Discharge,
    Table,
    Contradiction,
}

impl Method {
    pub fn tag(&self) -> &'static str {
        match self {
            Method::Proportionality => "proportionality",
            Method::Strategyproofness { .. } => "strategyproofness",
            Method::Bound => "bound",
            Method::Consequence => "consequence",
            Method::Efficiency { .. } => "efficiency",
            Method::Assumption => "assumption",
            Method::Discharge => "discharge",
            Method::Table => "table",
            Method::Contradiction => "contradiction",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepStatus {
    Certified,
    Failed,
}

impl StepStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            StepStatus::Certified => "certified",
            StepStatus::Failed => "failed",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProofStep {
    pub id: String,
    /// Label of the profile whose outcome the step is about.
    pub profile: String,
    pub claim: String,
    pub method: Method,
    pub status: StepStatus,
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProofReport {
    pub metric: Metric,
    pub n: usize,
    pub m: usize,
    pub steps: Vec<ProofStep>,
    pub certified: bool,
    /// The final contradiction, when reached.
    pub terminal: Option<String>,
}

impl ProofReport {
    pub fn failed_step(&self) -> Option<&ProofStep> {
        self.steps.iter().find(|s| s.status == StepStatus::Failed)
    }

    /// The strategyproofness constraints the argument relies on, as
    /// `(agent, truthful profile, misreport profile)`.
    pub fn manipulations(&self) -> Vec<(usize, String, String)> {
        let mut out: Vec<(usize, String, String)> = Vec::new();
        for s in &self.steps {
            if let Method::Strategyproofness {
                agent,
                truthful,
                misreport,
            } = &s.method
            {
                let key = (*agent, truthful.clone(), misreport.clone());
                if !out.contains(&key) {
                    out.push(key);
                }
            }
        }
        out
    }
}

enum Halt {
    Failed,
    Error(Error),
}

impl From<Error> for Halt {
    fn from(e: Error) -> Self {
        Halt::Error(e)
    }
}

type Step<T = ()> = core::result::Result<T, Halt>;

const B: usize = 1;

/// Role assignment for the sub-argument that pins down the outcome of a
/// profile with one "leaning" agent. The mirrored frame swaps `a` with `c`
/// and agent 0 with agent `n − 1`.
struct Frame {
    name: &'static str,
    /// The leaning agent's own alternative.
    x: usize,
    /// The opposite agent's alternative.
    y: usize,
    agent: usize,
    p1: &'static str,
    p2: &'static str,
    p3: &'static str,
    p4: &'static str,
}

struct Prover<'a> {
    fam: &'a RationalProfileFamily,
    metric: Metric,
    m: usize,
    facts: BTreeMap<String, Vec<Atom>>,
    exact: BTreeMap<String, Vec<Rational>>,
    steps: Vec<ProofStep>,
    scope: Vec<String>,
    counter: usize,
    terminal: Option<String>,
}

fn var(label: &str) -> String {
    format!("q{label}")
}

impl<'a> Prover<'a> {
    fn new(fam: &'a RationalProfileFamily) -> Self {
        Prover {
            fam,
            metric: fam.metric,
            m: fam.m,
            facts: BTreeMap::new(),
            exact: BTreeMap::new(),
            steps: Vec::new(),
            scope: Vec::new(),
            counter: 0,
            terminal: None,
        }
    }

    fn record(
        &mut self,
        profile: &str,
        claim: String,
        method: Method,
        ok: bool,
        detail: Option<String>,
    ) -> Step {
        self.counter += 1;
        let id = format!("{}/{:02}", self.scope.join("/"), self.counter);
        self.steps.push(ProofStep {
            id,
            profile: profile.to_string(),
            claim,
            method,
            status: if ok {
                StepStatus::Certified
            } else {
                StepStatus::Failed
            },
            detail,
        });
        if ok {
            Ok(())
        } else {
            Err(Halt::Failed)
        }
    }

    fn facts(&self, label: &str) -> Vec<Atom> {
        self.facts.get(label).cloned().unwrap_or_default()
    }

    fn add(&mut self, label: &str, atom: Atom) {
        self.facts.entry(label.to_string()).or_default().push(atom);
    }

    fn peak(&self, label: &str, agent: usize) -> Vec<Rational> {
        self.fam
            .get(label)
            .expect("known profile")
            .peak(agent)
            .to_vec()
    }

    fn coord(&self, j: usize, rel: Rel, rhs: Rational) -> Atom {
        Atom::coordinate(self.m, j, rel, rhs)
    }

    fn sum(&self, js: &[usize], rel: Rel, rhs: Rational) -> Atom {
        let terms: Vec<(usize, Rational)> = js.iter().map(|&j| (j, Rational::one())).collect();
        Atom::linear(self.m, &terms, rel, rhs)
    }

    fn point(&self, entries: &[(usize, Rational)]) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.m];
        for (j, x) in entries {
            v[*j] = x.clone();
        }
        v
    }

    fn proportionality(&mut self, label: &str) -> Step {
        let p = self.fam.get(label).expect("known profile");
        if !p.is_single_minded() {
            return self.record(
                label,
                format!("profile {label} is single-minded"),
                Method::Proportionality,
                false,
                None,
            );
        }
        let mean = p.mean();
        for (j, x) in mean.iter().enumerate() {
            let a = self.coord(j, Rel::Eq, x.clone());
            self.add(label, a);
        }
        self.exact.insert(label.to_string(), mean.clone());
        self.record(
            label,
            format!("{} = {}", var(label), render_point(&mean)),
            Method::Proportionality,
            true,
            None,
        )
    }

    fn claim(&mut self, label: &str, atom: Atom) -> Step {
        let ok = implies(self.m, &self.facts(label), &atom)?;
        let text = atom.render(&var(label));
        if ok {
            self.add(label, atom);
        }
        self.record(label, text, Method::Consequence, ok, None)
    }

    fn pin(&mut self, label: &str, point: Vec<Rational>) -> Step {
        let facts = self.facts(label);
        let mut ok = true;
        for (j, x) in point.iter().enumerate() {
            ok &= implies(self.m, &facts, &self.coord(j, Rel::Eq, x.clone()))?;
        }
        if ok {
            for (j, x) in point.iter().enumerate() {
                let a = self.coord(j, Rel::Eq, x.clone());
                self.add(label, a);
            }
            self.exact.insert(label.to_string(), point.clone());
        }
        self.record(
            label,
            format!("{} = {}", var(label), render_point(&point)),
            Method::Consequence,
            ok,
            None,
        )
    }

    fn check_pair(&mut self, agent: usize, truthful: &str, misreport: &str) -> Step {
        let t = self.fam.get(truthful).expect("known profile");
        let l = self.fam.get(misreport).expect("known profile");
        if t.differs_only_at(l, agent) {
            return Ok(());
        }
        self.record(
            truthful,
            format!(
                "profiles {truthful} and {misreport} differ only in agent {}",
                agent + 1
            ),
            Method::Consequence,
            false,
            None,
        )
    }

    /// Strategyproofness against a misreport when one side of the pair is
    /// already known exactly; `expected` is the value of the known side.
    fn sp(&mut self, agent: usize, truthful: &str, misreport: &str, expected: Rational) -> Step {
        self.check_pair(agent, truthful, misreport)?;
        let p = self.peak(truthful, agent);
        let method = Method::Strategyproofness {
            agent,
            truthful: truthful.to_string(),
            misreport: misreport.to_string(),
        };
        let d = format!("d_{}^({truthful})", agent + 1);
        if let Some(lie) = self.exact.get(misreport).cloned() {
            let c = exact_distance(self.metric, &p, &lie);
            let ok = c == expected;
            let claim = format!("{d}({}) <= {d}({}) = {c}", var(truthful), var(misreport));
            if ok {
                self.add(truthful, Atom::distance(self.metric, &p, Rel::Le, c));
            }
            self.record(
                truthful,
                claim,
                method,
                ok,
                (!ok).then(|| format!("expected {expected}")),
            )
        } else if let Some(truth) = self.exact.get(truthful).cloned() {
            let c = exact_distance(self.metric, &p, &truth);
            let ok = c == expected;
            let claim = format!("{d}({}) >= {d}({}) = {c}", var(misreport), var(truthful));
            if ok {
                self.add(misreport, Atom::distance(self.metric, &p, Rel::Ge, c));
            }
            self.record(
                misreport,
                claim,
                method,
                ok,
                (!ok).then(|| format!("expected {expected}")),
            )
        } else {
            self.record(
                truthful,
                format!(
                    "one of {} and {} is known exactly",
                    var(truthful),
                    var(misreport)
                ),
                method,
                false,
                None,
            )
        }
    }

    /// Strategyproofness when the misreport outcome is only bounded:
    /// first certify `d(q_misreport) rel bound`, then transfer it.
    fn sp_bounded(
        &mut self,
        agent: usize,
        truthful: &str,
        misreport: &str,
        rel: Rel,
        bound: Rational,
    ) -> Step {
        self.check_pair(agent, truthful, misreport)?;
        let p = self.peak(truthful, agent);
        let d = format!("d_{}^({truthful})", agent + 1);
        let atom = Atom::distance(self.metric, &p, rel, bound.clone());
        let ok = implies(self.m, &self.facts(misreport), &atom)?;
        self.record(
            misreport,
            format!("{d}({}) {} {bound}", var(misreport), rel.symbol()),
            Method::Bound,
            ok,
            None,
        )?;
        self.add(truthful, atom);
        self.record(
            truthful,
            format!(
                "{d}({}) <= {d}({}) {} {bound}",
                var(truthful),
                var(misreport),
                rel.symbol()
            ),
            Method::Strategyproofness {
                agent,
                truthful: truthful.to_string(),
                misreport: misreport.to_string(),
            },
            true,
            None,
        )
    }

    /// Excludes `hypothesis` for an efficient outcome: everywhere in the
    /// region, shifting a little mass from `from` to `to` is feasible, hurts
    /// nobody to first order and strictly helps some agent. Distances are
    /// piecewise linear, so the first-order effect is the exact effect of a
    /// small enough shift.
    fn efficiency(&mut self, label: &str, hypothesis: Atom, from: usize, to: usize) -> Step {
        let mut region = self.facts(label);
        region.push(hypothesis.clone());
        let text = format!(
            "efficiency excludes {}: shift mass from {} to {}",
            hypothesis.render(&var(label)),
            alt_name(from),
            alt_name(to)
        );
        let feasible_shift = implies(
            self.m,
            &region,
            &self.coord(from, Rel::Gt, Rational::zero()),
        )?;
        let profile = self.fam.get(label).expect("known profile").clone();
        let mut nobody_loses = true;
        let mut gaining = None;
        let mut seen: Vec<&Vec<Rational>> = Vec::new();
        for (i, peak) in profile.peaks.iter().enumerate() {
            if seen.contains(&peak) {
                continue;
            }
            seen.push(peak);
            let slope = |rel| Atom::Slope {
                metric: self.metric,
                peak: peak.clone(),
                from,
                to,
                rel,
            };
            let mut worse = region.clone();
            worse.push(slope(Rel::Gt));
            if !region_infeasible(self.m, &worse)? {
                nobody_loses = false;
                break;
            }
            if gaining.is_none() {
                let mut not_better = region.clone();
                not_better.push(slope(Rel::Ge));
                if region_infeasible(self.m, &not_better)? {
                    gaining = Some(i);
                }
            }
        }
        let ok = feasible_shift && nobody_loses && gaining.is_some();
        let negated = hypothesis.negation()?;
        if ok && negated.len() == 1 {
            self.add(label, negated.into_iter().next().expect("one atom"));
        }
        let detail = match (feasible_shift, nobody_loses, gaining) {
            (false, _, _) => "the source alternative may be empty".to_string(),
            (_, false, _) => "some agent may lose".to_string(),
            (_, _, None) => "no agent gains throughout the region".to_string(),
            (_, _, Some(i)) => format!("agent {} strictly gains, nobody loses", i + 1),
        };
        self.record(
            label,
            text,
            Method::Efficiency {
                from,
                to,
                gaining_agent: gaining.unwrap_or(usize::MAX),
            },
            ok,
            Some(detail),
        )
    }

    /// Runs `body` under `hypothesis` on `label`; `body` must end in a
    /// contradiction. The negated hypothesis is then added.
    fn refute(
        &mut self,
        label: &str,
        hypothesis: Atom,
        body: impl FnOnce(&mut Self) -> Step,
    ) -> Step {
        let saved = (self.facts.clone(), self.exact.clone());
        self.add(label, hypothesis.clone());
        let text = hypothesis.render(&var(label));
        self.record(
            label,
            format!("assume {text}"),
            Method::Assumption,
            true,
            None,
        )?;
        self.scope.push("h".into());
        let closed = self.steps.len();
        body(self)?;
        let reached = self.steps[closed..]
            .last()
            .is_some_and(|s| s.method == Method::Contradiction);
        self.scope.pop();
        self.facts = saved.0;
        self.exact = saved.1;
        self.terminal = None;
        let negated = hypothesis.negation()?;
        let ok = reached && negated.len() == 1;
        if ok {
            self.add(label, negated[0].clone());
        }
        let claim = match negated.first() {
            Some(a) => a.render(&var(label)),
            None => format!("not {text}"),
        };
        self.record(label, claim, Method::Discharge, ok, None)
    }

    /// Certifies that `atoms`, all established for `label`, have no common
    /// solution.
    fn contradiction(&mut self, label: &str, atoms: &[Atom]) -> Step {
        let facts = self.facts(label);
        let mut ok = true;
        for a in atoms {
            ok &= implies(self.m, &facts, a)?;
        }
        ok &= region_infeasible(self.m, atoms)?;
        let parts: Vec<String> = atoms.iter().map(|a| a.render(&var(label))).collect();
        let claim = format!("{} is infeasible", parts.join(" and "));
        if ok {
            self.terminal = Some(claim.clone());
        }
        self.record(label, claim, Method::Contradiction, ok, None)
    }

    fn table(&mut self) -> Step {
        let entries: Vec<(String, Vec<CoordinateBound>)> = self
            .fam
            .forced_outcomes
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        for (label, row) in entries {
            let facts = self.facts(&label);
            let mut ok = true;
            let mut parts = Vec::new();
            for (j, entry) in row.iter().enumerate() {
                if let Some((rel, v)) = entry {
                    let a = self.coord(j, *rel, v.clone());
                    ok &= implies(self.m, &facts, &a)?;
                    parts.push(a.render(&var(&label)));
                }
            }
            self.record(&label, parts.join(", "), Method::Table, ok, None)?;
        }
        Ok(())
    }

    fn setup(&mut self) -> Step {
        self.scope = vec!["setup".into()];
        self.counter = 0;
        let labels: Vec<String> = self.fam.all().map(|p| p.label.clone()).collect();
        for label in &labels {
            if self
                .fam
                .get(label)
                .expect("known profile")
                .is_single_minded()
            {
                self.proportionality(label)?;
            }
        }
        for label in &labels {
            if self
                .fam
                .get(label)
                .expect("known profile")
                .is_single_minded()
            {
                continue;
            }
            for j in 3..self.m {
                let h = self.coord(j, Rel::Gt, Rational::zero());
                self.efficiency(label, h, j, B)?;
            }
        }
        Ok(())
    }

    fn enter(&mut self, name: &str) {
        self.scope = vec![name.to_string()];
        self.counter = 0;
    }
}

fn frames(metric: Metric, n: usize) -> [Frame; 2] {
    [
        Frame {
            name: "primary",
            x: 0,
            y: 2,
            agent: 0,
            p1: "1",
            p2: "2",
            p3: "3",
            p4: "4",
        },
        Frame {
            name: "mirror",
            x: 2,
            y: 0,
            agent: n - 1,
            p1: match metric {
                Metric::L1 => "6",
                Metric::LInf => "5",
            },
            p2: "2",
            p3: "3*",
            p4: "4*",
        },
    ]
}

/// Bounds on `q^(p1)` from the two manipulations between profiles 1 and 2
/// and the efficiency shift toward `b`; shared by both metrics.
fn leaning_bounds(pr: &mut Prover, f: &Frame, k: i64) -> Step {
    let (x, y, s) = (f.x, f.y, f.agent);
    let two_n = 2 * k;
    let (close, far) = match pr.metric {
        Metric::L1 => (q(2, k), q(2 * k - 2, k)),
        Metric::LInf => (q(1, k), q(k - 1, k)),
    };
    pr.sp(s, f.p1, f.p2, close)?;
    pr.sp(s, f.p2, f.p1, far)?;
    pr.claim(f.p1, pr.coord(x, Rel::Ge, q(1, two_n)))?;
    pr.claim(f.p1, pr.coord(B, Rel::Le, q(two_n - 1, two_n)))?;
    pr.claim(f.p1, pr.coord(B, Rel::Ge, q(two_n - 5, two_n)))?;
    pr.claim(f.p1, pr.coord(y, Rel::Le, q(1, k)))?;
    pr.claim(f.p1, pr.coord(x, Rel::Le, q(1, k)))?;
    pr.claim(f.p1, pr.sum(&[B, y], Rel::Ge, q(k - 1, k)))?;
    pr.claim(f.p1, pr.coord(B, Rel::Ge, q(k - 2, k)))?;
    pr.efficiency(f.p1, pr.coord(B, Rel::Lt, q(two_n - 3, two_n)), x, B)
}

fn l1_frame(pr: &mut Prover, f: &Frame, k: i64) -> Step {
    pr.enter(f.name);
    let (x, y, s) = (f.x, f.y, f.agent);
    let two_n = 2 * k;
    leaning_bounds(pr, f, k)?;
    pr.sp(s, f.p3, f.p4, q(2, k))?;
    pr.sp(s, f.p4, f.p3, q(2, k))?;
    pr.claim(f.p3, pr.coord(y, Rel::Le, q(1, k)))?;
    pr.claim(f.p3, pr.sum(&[x, B], Rel::Ge, q(k - 1, k)))?;
    pr.claim(f.p3, pr.coord(B, Rel::Le, q(k - 1, k)))?;
    pr.efficiency(f.p3, pr.coord(x, Rel::Gt, Rational::zero()), x, B)?;
    let p3 = pr.point(&[(B, q(k - 1, k)), (y, q(1, k))]);
    pr.pin(f.p3, p3)?;
    pr.sp(s, f.p3, f.p1, q(2, k))?;
    let near = pr.peak(f.p3, s);
    pr.claim(f.p1, Atom::distance(pr.metric, &near, Rel::Le, q(2, k)))?;
    let p1 = pr.point(&[(x, q(1, two_n)), (B, q(two_n - 3, two_n)), (y, q(1, k))]);
    pr.pin(f.p1, p1)
}

fn linf_frame(pr: &mut Prover, f: &Frame, k: i64) -> Step {
    pr.enter(f.name);
    let (x, y, s) = (f.x, f.y, f.agent);
    let three_quarters = q(3, 4 * k);
    leaning_bounds(pr, f, k)?;
    let hypothesis = pr.coord(y, Rel::Le, three_quarters.clone());
    pr.refute(f.p1, hypothesis, |pr| {
        pr.sp_bounded(s, f.p3, f.p1, Rel::Le, three_quarters.clone())?;
        pr.claim(f.p3, pr.coord(y, Rel::Le, three_quarters.clone()))?;
        pr.efficiency(f.p3, pr.coord(B, Rel::Lt, q(k, k + 1)), x, B)?;
        pr.sp(s, f.p4, f.p3, q(1, k))?;
        pr.claim(f.p3, pr.coord(B, Rel::Le, q(k - 1, k)))?;
        let terminal = [
            pr.coord(B, Rel::Ge, q(k, k + 1)),
            pr.coord(B, Rel::Le, q(k - 1, k)),
        ];
        pr.contradiction(f.p3, &terminal)
    })
}

fn l1_main(pr: &mut Prover, k: i64, n: usize) -> Step {
    pr.enter("final");
    let last = n - 1;
    pr.sp(0, "5", "6", q(1, k))?;
    pr.claim("5", pr.coord(2, Rel::Le, q(1, 2 * k)))?;
    pr.sp(last, "5", "1", q(1, k))?;
    pr.claim("5", pr.coord(2, Rel::Ge, q(1, k)))?;
    let terminal = [
        pr.coord(2, Rel::Le, q(1, 2 * k)),
        pr.coord(2, Rel::Ge, q(1, k)),
    ];
    pr.contradiction("5", &terminal)
}

fn linf_main(pr: &mut Prover, k: i64, n: usize) -> Step {
    pr.enter("final");
    let last = n - 1;
    let tq = q(3, 4 * k);
    pr.claim("1", pr.coord(0, Rel::Lt, tq.clone()))?;
    pr.sp_bounded(last, "6", "1", Rel::Lt, tq.clone())?;
    pr.claim("6", pr.coord(0, Rel::Lt, tq.clone()))?;
    pr.claim("5", pr.coord(2, Rel::Lt, tq.clone()))?;
    pr.sp_bounded(0, "6", "5", Rel::Lt, tq.clone())?;
    pr.claim("6", pr.coord(0, Rel::Gt, tq.clone()))?;
    let terminal = [pr.coord(0, Rel::Lt, tq.clone()), pr.coord(0, Rel::Gt, tq)];
    pr.contradiction("6", &terminal)
}

fn run(pr: &mut Prover, metric: Metric, n: usize) -> Step {
    let k = n as i64;
    pr.setup()?;
    for f in frames(metric, n) {
        match metric {
            Metric::L1 => l1_frame(pr, &f, k)?,
            Metric::LInf => linf_frame(pr, &f, k)?,
        }
    }
    pr.enter("table");
    pr.table()?;
    match metric {
        Metric::L1 => l1_main(pr, k, n),
        Metric::LInf => linf_main(pr, k, n),
    }
}

/// Verifies the impossibility argument for `n` agents and three
/// alternatives.
pub fn verify_chain(metric: Metric, n: usize) -> Result<ProofReport> {
    verify_chain_padded(metric, n, 3)
}

/// Verifies the argument with `m − 3` padding alternatives; the setup
/// phase first certifies that efficient outcomes leave them unfunded.
pub fn verify_chain_padded(metric: Metric, n: usize, m: usize) -> Result<ProofReport> {
    let fam = gen_profiles_padded(metric, n, m)?;
    verify_family(&fam)
}

/// Runs the argument on a given family. Mostly useful for checking that a
/// corrupted family is caught.
pub fn verify_family(fam: &RationalProfileFamily) -> Result<ProofReport> {
    let mut pr = Prover::new(fam);
    let outcome = run(&mut pr, fam.metric, fam.n);
    let certified = match outcome {
        Ok(()) => true,
        Err(Halt::Failed) => false,
        Err(Halt::Error(e)) => return Err(e),
    };
    Ok(ProofReport {
        metric: fam.metric,
        n: fam.n,
        m: fam.m,
        certified: certified && pr.terminal.is_some(),
        terminal: pr.terminal,
        steps: pr.steps,
    })
}
