//! Exact feasibility of linear systems by Fourier–Motzkin elimination.
//!
//! Strict and weak inequalities are tracked separately, so the verdict is
//! exact. Every derived row remembers the multipliers that produced it from
//! the input rows; an infeasible system therefore comes with a Farkas-style
//! certificate.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::rational::Rational;
use crate::error::{Error, Result};

/// Largest number of variables left after equality substitution.
pub const MAX_EXACT_VARS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
}

impl Rel {
    pub fn is_strict(self) -> bool {
        matches!(self, Rel::Lt | Rel::Gt)
    }

    /// The relation describing the complement of `a·x rel b`, when it is a
    /// single half-space.
    pub fn negated(self) -> Option<Rel> {
        match self {
            Rel::Le => Some(Rel::Gt),
            Rel::Lt => Some(Rel::Ge),
            Rel::Ge => Some(Rel::Lt),
            Rel::Gt => Some(Rel::Le),
            Rel::Eq => None,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Le => "<=",
            Rel::Lt => "<",
            Rel::Ge => ">=",
            Rel::Gt => ">",
            Rel::Eq => "=",
        }
    }
}

/// `coeffs · x  rel  rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearConstraint<T> {
    pub coeffs: Vec<T>,
    pub rel: Rel,
    pub rhs: T,
}

impl<T> LinearConstraint<T> {
    pub fn new(coeffs: Vec<T>, rel: Rel, rhs: T) -> Self {
        LinearConstraint { coeffs, rel, rhs }
    }
}

impl LinearConstraint<Rational> {
    pub fn holds_at(&self, x: &[Rational]) -> bool {
        let lhs: Rational = self.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
        match self.rel {
            Rel::Le => lhs <= self.rhs,
            Rel::Lt => lhs < self.rhs,
            Rel::Ge => lhs >= self.rhs,
            Rel::Gt => lhs > self.rhs,
            Rel::Eq => lhs == self.rhs,
        }
    }

    pub fn to_f64(&self) -> LinearConstraint<f64> {
        LinearConstraint {
            coeffs: self.coeffs.iter().map(Rational::to_f64).collect(),
            rel: self.rel,
            rhs: self.rhs.to_f64(),
        }
    }
}

/// Outcome of a feasibility query.
#[derive(Clone, Debug, PartialEq)]
pub enum Feasibility<T> {
    /// A point satisfying every constraint.
    Feasible(Vec<T>),
    /// Multipliers `y`, one per input row, with `y >= 0` on `<=`/`<` rows,
    /// `y <= 0` on `>=`/`>` rows and free on equalities, such that
    /// `Σ y_i a_i = 0` and either `Σ y_i b_i < 0`, or `Σ y_i b_i = 0` with
    /// some strict row carrying a nonzero multiplier.
    Infeasible(Vec<T>),
}

impl<T> Feasibility<T> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Kind {
    Eq,
    Lt,
    Le,
}

#[derive(Clone, Debug)]
struct Row {
    a: Vec<Rational>,
    b: Rational,
    kind: Kind,
    comb: Vec<Rational>,
}

impl Row {
    fn scaled(&self, f: &Rational) -> Row {
        Row {
            a: self.a.iter().map(|x| x * f).collect(),
            b: &self.b * f,
            kind: self.kind,
            comb: self.comb.iter().map(|x| x * f).collect(),
        }
    }

    fn plus(&self, other: &Row) -> Row {
        let kind = match (self.kind, other.kind) {
            (Kind::Lt, _) | (_, Kind::Lt) => Kind::Lt,
            (Kind::Eq, Kind::Eq) => Kind::Eq,
            _ => Kind::Le,
        };
        Row {
            a: self.a.iter().zip(&other.a).map(|(x, y)| x + y).collect(),
            b: &self.b + &other.b,
            kind,
            comb: self
                .comb
                .iter()
                .zip(&other.comb)
                .map(|(x, y)| x + y)
                .collect(),
        }
    }

    fn is_constant(&self) -> bool {
        self.a.iter().all(Rational::is_zero)
    }

    /// For a constant row: whether `0 kind b` is violated.
    fn violated(&self) -> bool {
        match self.kind {
            Kind::Le => self.b.is_negative(),
            Kind::Lt => !self.b.is_positive(),
            Kind::Eq => !self.b.is_zero(),
        }
    }

    /// Multipliers of a violated constant row, oriented so that the
    /// combined right-hand side is negative.
    fn certificate(&self) -> Vec<Rational> {
        if self.kind == Kind::Eq && self.b.is_positive() {
            self.comb.iter().map(|v| -v).collect()
        } else {
            self.comb.clone()
        }
    }

    fn lhs_without(&self, x: &[Rational], k: usize) -> Rational {
        self.a
            .iter()
            .zip(x)
            .enumerate()
            .filter(|(l, _)| *l != k)
            .map(|(_, (a, v))| a * v)
            .sum()
    }
}

enum Step {
    Substitute { var: usize, row: Row },
    Eliminate { var: usize, rows: Vec<Row> },
}

/// Decides whether the system has a solution in `nvars` real variables.
///
/// Errors with [`Error::DimensionOverflow`] if more than [`MAX_EXACT_VARS`]
/// variables remain after equality substitution.
pub fn fm_feasible(
    constraints: &[LinearConstraint<Rational>],
    nvars: usize,
) -> Result<Feasibility<Rational>> {
    let count = constraints.len();
    let mut rows = Vec::with_capacity(count);
    for (i, c) in constraints.iter().enumerate() {
        if c.coeffs.len() != nvars {
            return Err(Error::DimensionMismatch {
                expected: nvars,
                got: c.coeffs.len(),
            });
        }
        let mut comb = vec![Rational::zero(); count];
        let (a, b, kind, sign) = match c.rel {
            Rel::Le => (c.coeffs.clone(), c.rhs.clone(), Kind::Le, 1),
            Rel::Lt => (c.coeffs.clone(), c.rhs.clone(), Kind::Lt, 1),
            Rel::Eq => (c.coeffs.clone(), c.rhs.clone(), Kind::Eq, 1),
            Rel::Ge => (c.coeffs.iter().map(|x| -x).collect(), -&c.rhs, Kind::Le, -1),
            Rel::Gt => (c.coeffs.iter().map(|x| -x).collect(), -&c.rhs, Kind::Lt, -1),
        };
        comb[i] = Rational::from_int(sign);
        rows.push(Row { a, b, kind, comb });
    }

    let mut steps = Vec::new();
    let mut alive: Vec<usize> = (0..nvars).collect();

    // Equalities first: each one removes a variable outright.
    loop {
        if let Some(bad) = rows.iter().find(|r| r.is_constant() && r.violated()) {
            return Ok(Feasibility::Infeasible(bad.certificate()));
        }
        rows.retain(|r| !r.is_constant());
        let pick = rows.iter().position(|r| r.kind == Kind::Eq);
        let Some(e) = pick else { break };
        let eq = rows.swap_remove(e);
        let var = (0..nvars)
            .find(|&k| !eq.a[k].is_zero())
            .expect("non-constant row");
        for r in rows.iter_mut() {
            if !r.a[var].is_zero() {
                let f = -(&r.a[var] / &eq.a[var]);
                let kind = r.kind;
                *r = r.plus(&eq.scaled(&f));
                r.kind = kind;
                r.a[var] = Rational::zero();
            }
        }
        alive.retain(|&k| k != var);
        steps.push(Step::Substitute { var, row: eq });
    }

    let used: Vec<usize> = alive
        .iter()
        .copied()
        .filter(|&k| rows.iter().any(|r| !r.a[k].is_zero()))
        .collect();
    if used.len() > MAX_EXACT_VARS {
        return Err(Error::DimensionOverflow {
            max: MAX_EXACT_VARS,
            got: used.len(),
        });
    }

    let mut remaining = used;
    while !remaining.is_empty() {
        rows = dedupe(rows);
        if let Some(bad) = rows.iter().find(|r| r.is_constant() && r.violated()) {
            return Ok(Feasibility::Infeasible(bad.certificate()));
        }
        rows.retain(|r| !r.is_constant());
        // Eliminate the variable producing the fewest new rows.
        let (idx, var) = remaining
            .iter()
            .copied()
            .enumerate()
            .min_by_key(|&(_, k)| {
                let pos = rows.iter().filter(|r| r.a[k].is_positive()).count();
                let neg = rows.iter().filter(|r| r.a[k].is_negative()).count();
                pos * neg
            })
            .expect("nonempty");
        remaining.remove(idx);
        let mut next = Vec::new();
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for r in &rows {
            if r.a[var].is_positive() {
                pos.push(r.scaled(&r.a[var].recip()));
            } else if r.a[var].is_negative() {
                neg.push(r.scaled(&(-&r.a[var]).recip()));
            } else {
                next.push(r.clone());
            }
        }
        for p in &pos {
            for n in &neg {
                let mut s = p.plus(n);
                s.a[var] = Rational::zero();
                next.push(s);
            }
        }
        steps.push(Step::Eliminate { var, rows });
        rows = next;
    }
    if let Some(bad) = rows.iter().find(|r| r.violated()) {
        return Ok(Feasibility::Infeasible(bad.certificate()));
    }

    let mut x = vec![Rational::zero(); nvars];
    for step in steps.iter().rev() {
        match step {
            Step::Substitute { var, row } => {
                x[*var] = (&row.b - row.lhs_without(&x, *var)) / &row.a[*var];
            }
            Step::Eliminate { var, rows } => {
                x[*var] = choose_value(rows, &x, *var);
            }
        }
    }
    Ok(Feasibility::Feasible(x))
}

/// Picks a value for `x[k]` inside the interval the rows allow.
fn choose_value(rows: &[Row], x: &[Rational], k: usize) -> Rational {
    let mut lo: Option<Rational> = None;
    let mut hi: Option<Rational> = None;
    for r in rows {
        if r.a[k].is_zero() {
            continue;
        }
        let bound = (&r.b - r.lhs_without(x, k)) / &r.a[k];
        if r.a[k].is_positive() {
            hi = Some(match hi {
                Some(h) if h <= bound => h,
                _ => bound,
            });
        } else {
            lo = Some(match lo {
                Some(l) if l >= bound => l,
                _ => bound,
            });
        }
    }
    match (lo, hi) {
        (Some(l), Some(h)) => (l + h) / Rational::from_int(2),
        (Some(l), None) => l + Rational::one(),
        (None, Some(h)) => h - Rational::one(),
        (None, None) => Rational::zero(),
    }
}

/// Collapses positively parallel rows to the tightest representative.
fn dedupe(rows: Vec<Row>) -> Vec<Row> {
    let mut best: BTreeMap<Vec<Rational>, Row> = BTreeMap::new();
    let mut order = Vec::new();
    for r in rows {
        if r.is_constant() {
            if r.violated() {
                return vec![r];
            }
            continue;
        }
        let lead =
            r.a.iter()
                .find(|v| !v.is_zero())
                .expect("non-constant")
                .abs();
        let r = r.scaled(&lead.recip());
        let key = r.a.clone();
        match best.get_mut(&key) {
            Some(cur) => {
                let tighter =
                    r.b < cur.b || (r.b == cur.b && r.kind == Kind::Lt && cur.kind != Kind::Lt);
                if tighter {
                    *cur = r;
                }
            }
            None => {
                order.push(key.clone());
                best.insert(key, r);
            }
        }
    }
    order
        .into_iter()
        .map(|k| best.remove(&k).expect("present"))
        .collect()
}

/// Checks a certificate returned by [`fm_feasible`] against the input.
pub fn verify_certificate(constraints: &[LinearConstraint<Rational>], y: &[Rational]) -> bool {
    if y.len() != constraints.len() {
        return false;
    }
    let nvars = constraints.first().map_or(0, |c| c.coeffs.len());
    let mut combo = vec![Rational::zero(); nvars];
    let mut rhs = Rational::zero();
    let mut strict_used = false;
    for (c, yi) in constraints.iter().zip(y) {
        let sign_ok = match c.rel {
            Rel::Le | Rel::Lt => !yi.is_negative(),
            Rel::Ge | Rel::Gt => !yi.is_positive(),
            Rel::Eq => true,
        };
        if !sign_ok {
            return false;
        }
        if yi.is_zero() {
            continue;
        }
        strict_used |= c.rel.is_strict();
        for (s, a) in combo.iter_mut().zip(&c.coeffs) {
            *s += a * yi;
        }
        rhs += &c.rhs * yi;
    }
    combo.iter().all(Rational::is_zero) && (rhs.is_negative() || (rhs.is_zero() && strict_used))
}
