//! Dense two-phase tableau simplex with Bland's rule.

use alloc::vec;
use alloc::vec::Vec;

use super::fm::{Feasibility, LinearConstraint, Rel};

const EPS: f64 = 1e-9;

/// `maximize objective · x` subject to `constraints` and `x >= 0`.
/// Strict relations are treated as their weak counterparts.
#[derive(Clone, Debug)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub constraints: Vec<LinearConstraint<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    fn rhs(&self, r: usize) -> f64 {
        self.rows[r][self.ncols]
    }

    /// Maximizes `cost · x` over the columns allowed to enter.
    fn optimize(&mut self, cost: &[f64], allowed: &dyn Fn(usize) -> bool) -> bool {
        loop {
            let mut entering = None;
            for j in (0..self.ncols).filter(|&j| allowed(j)) {
                if self.basis.contains(&j) {
                    continue;
                }
                let reduced = cost[j]
                    - self
                        .basis
                        .iter()
                        .zip(&self.rows)
                        .map(|(&b, row)| cost[b] * row[j])
                        .sum::<f64>();
                if reduced > EPS {
                    entering = Some(j);
                    break;
                }
            }
            let Some(c) = entering else { return true };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][c];
                if a > EPS {
                    let ratio = self.rhs(r) / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < lratio - EPS
                                || (ratio <= lratio + EPS && self.basis[r] < self.basis[lr])
                            {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
    }
}

/// Solves a dense LP over nonnegative variables.
pub fn simplex_solve(problem: &LpProblem) -> LpOutcome {
    let n = problem.objective.len();
    let mut rows_in: Vec<(Vec<f64>, Rel, f64)> = Vec::new();
    for c in &problem.constraints {
        debug_assert_eq!(c.coeffs.len(), n);
        let rel = match c.rel {
            Rel::Lt => Rel::Le,
            Rel::Gt => Rel::Ge,
            r => r,
        };
        if c.rhs < 0.0 {
            let flipped = match rel {
                Rel::Le => Rel::Ge,
                Rel::Ge => Rel::Le,
                r => r,
            };
            rows_in.push((c.coeffs.iter().map(|v| -v).collect(), flipped, -c.rhs));
        } else {
            rows_in.push((c.coeffs.clone(), rel, c.rhs));
        }
    }
    let m = rows_in.len();
    let n_slack = rows_in.iter().filter(|r| r.1 != Rel::Eq).count();
    let n_art = rows_in.iter().filter(|r| r.1 != Rel::Le).count();
    let ncols = n + n_slack + n_art;
    let art_start = n + n_slack;
    let mut rows = vec![vec![0.0; ncols + 1]; m];
    let mut basis = vec![0; m];
    let (mut s, mut a) = (n, art_start);
    for (i, (coeffs, rel, rhs)) in rows_in.iter().enumerate() {
        rows[i][..n].copy_from_slice(coeffs);
        rows[i][ncols] = *rhs;
        match rel {
            Rel::Le => {
                rows[i][s] = 1.0;
                basis[i] = s;
                s += 1;
            }
            Rel::Ge => {
                rows[i][s] = -1.0;
                s += 1;
                rows[i][a] = 1.0;
                basis[i] = a;
                a += 1;
            }
            _ => {
                rows[i][a] = 1.0;
                basis[i] = a;
                a += 1;
            }
        }
    }
    let mut t = Tableau { rows, basis, ncols };

    if n_art > 0 {
        let mut cost = vec![0.0; ncols];
        for c in cost.iter_mut().skip(art_start) {
            *c = -1.0;
        }
        t.optimize(&cost, &|_| true);
        let infeas: f64 = t
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| b >= art_start)
            .map(|(r, _)| t.rhs(r))
            .sum();
        if infeas > 1e-7 {
            return LpOutcome::Infeasible;
        }
        // Drive remaining artificials out of the basis.
        let mut r = 0;
        while r < t.rows.len() {
            if t.basis[r] >= art_start {
                match (0..art_start).find(|&j| t.rows[r][j].abs() > EPS) {
                    Some(j) => t.pivot(r, j),
                    None => {
                        t.rows.remove(r);
                        t.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
    }

    let mut cost = vec![0.0; ncols];
    cost[..n].copy_from_slice(&problem.objective);
    if !t.optimize(&cost, &|j| j < art_start) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![0.0; n];
    for (r, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.rhs(r).max(0.0);
        }
    }
    let value = x.iter().zip(&problem.objective).map(|(a, b)| a * b).sum();
    LpOutcome::Optimal { x, value }
}

/// Float feasibility of a system over free variables, with exact handling
/// of strictness up to a margin of `1e-9`.
pub fn lp_feasible_float(constraints: &[LinearConstraint<f64>], nvars: usize) -> Feasibility<f64> {
    let any_strict = constraints.iter().any(|c| c.rel.is_strict());
    let width = 2 * nvars + 1;
    let t_col = 2 * nvars;
    let mut rows = Vec::new();
    for c in constraints {
        let mut coeffs = vec![0.0; width];
        for (k, a) in c.coeffs.iter().enumerate() {
            coeffs[k] = *a;
            coeffs[nvars + k] = -a;
        }
        let (coeffs, rel, rhs) = match c.rel {
            Rel::Le | Rel::Eq => (coeffs, c.rel, c.rhs),
            Rel::Ge => (coeffs.iter().map(|v| -v).collect(), Rel::Le, -c.rhs),
            Rel::Lt => {
                let mut v = coeffs;
                v[t_col] = 1.0;
                (v, Rel::Le, c.rhs)
            }
            Rel::Gt => {
                let mut v: Vec<f64> = coeffs.iter().map(|v| -v).collect();
                v[t_col] = 1.0;
                (v, Rel::Le, -c.rhs)
            }
        };
        rows.push(LinearConstraint::new(coeffs, rel, rhs));
    }
    let mut cap = vec![0.0; width];
    cap[t_col] = 1.0;
    rows.push(LinearConstraint::new(cap, Rel::Le, 1.0));
    let mut objective = vec![0.0; width];
    if any_strict {
        objective[t_col] = 1.0;
    }
    let outcome = simplex_solve(&LpProblem {
        objective,
        constraints: rows,
    });
    match outcome {
        LpOutcome::Optimal { x, value } if !any_strict || value > 1e-9 => {
            Feasibility::Feasible((0..nvars).map(|k| x[k] - x[nvars + k]).collect())
        }
        _ => Feasibility::Infeasible(float_certificate(constraints, nvars)),
    }
}

/// Searches for Farkas multipliers proving infeasibility.
fn float_certificate(constraints: &[LinearConstraint<f64>], nvars: usize) -> Vec<f64> {
    // One column per sign-constrained multiplier; equalities get two.
    let mut cols: Vec<(usize, f64)> = Vec::new();
    for (i, c) in constraints.iter().enumerate() {
        match c.rel {
            Rel::Le | Rel::Lt => cols.push((i, 1.0)),
            Rel::Ge | Rel::Gt => cols.push((i, -1.0)),
            Rel::Eq => {
                cols.push((i, 1.0));
                cols.push((i, -1.0));
            }
        }
    }
    let k = cols.len();
    let mut base = Vec::new();
    for j in 0..nvars {
        let coeffs = cols
            .iter()
            .map(|&(i, s)| s * constraints[i].coeffs[j])
            .collect();
        base.push(LinearConstraint::new(coeffs, Rel::Eq, 0.0));
    }
    base.push(LinearConstraint::new(vec![1.0; k], Rel::Le, 1.0));
    let yb: Vec<f64> = cols.iter().map(|&(i, s)| s * constraints[i].rhs).collect();
    let collect = |x: &[f64]| {
        let mut y = vec![0.0; constraints.len()];
        for (&(i, s), v) in cols.iter().zip(x) {
            y[i] += s * v;
        }
        y
    };
    let first = simplex_solve(&LpProblem {
        objective: yb.iter().map(|v| -v).collect(),
        constraints: base.clone(),
    });
    if let LpOutcome::Optimal { x, value } = &first {
        if *value > 1e-9 {
            return collect(x);
        }
    }
    let mut second = base;
    second.push(LinearConstraint::new(yb, Rel::Le, 0.0));
    let objective = cols
        .iter()
        .map(|&(i, _)| {
            if constraints[i].rel.is_strict() {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    match simplex_solve(&LpProblem {
        objective,
        constraints: second,
    }) {
        LpOutcome::Optimal { x, .. } => collect(&x),
        _ => vec![0.0; constraints.len()],
    }
}
