//! The Nash product rule for Leontief utilities.
//!
//! The optimum is computed with a log-barrier Newton method over the
//! variables `(u, q)`: maximize `Σ_i ln u_i` subject to
//! `q_j >= u_i · p_ij` and `Σ_j q_j = 1`. The result is then certified by
//! the decomposition flow.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::decomposition::{decomposition_certificate, Decomposition};
use crate::error::{Error, Result};
use crate::model::{critical_set, leontief_utility, Distribution, Profile};
use crate::numerics::linalg::solve;

pub const DEFAULT_TOL: f64 = 1e-7;

const CERT_EPS_START: f64 = 1e-8;
const CERT_EPS_MAX: f64 = 1e-4;
const MAX_NEWTON: usize = 200;
const BARRIER_GROWTH: f64 = 8.0;

/// `Σ_i ln u_i(q)`, or `-∞` when some agent gets utility zero.
pub fn nash_objective(profile: &Profile, q: &Distribution) -> f64 {
    let mut s = 0.0;
    for p in profile.peaks() {
        let u = leontief_utility(p, q);
        if u <= 0.0 {
            return f64::NEG_INFINITY;
        }
        s += libm::log(u);
    }
    s
}

#[derive(Clone, Debug)]
pub struct NashSolution {
    pub q: Distribution,
    pub utilities: Vec<f64>,
    pub decomposition: Decomposition,
    /// Criticality tolerance at which the certificate was found.
    pub certificate_eps: f64,
    pub newton_steps: usize,
}

struct Barrier<'a> {
    /// Nonzero entries `(i, j, p_ij)` over the reduced alternatives.
    terms: &'a [(usize, usize, f64)],
    n: usize,
    m: usize,
}

impl Barrier<'_> {
    fn slacks(&self, x: &[f64]) -> Option<Vec<f64>> {
        let (u, q) = x.split_at(self.n);
        if u.iter().any(|&v| v <= 0.0) {
            return None;
        }
        let s: Vec<f64> = self
            .terms
            .iter()
            .map(|&(i, j, p)| q[j] - u[i] * p)
            .collect();
        if s.iter().any(|&v| v <= 0.0) {
            return None;
        }
        Some(s)
    }

    /// Change of the barrier objective from `x` to `y`, computed from
    /// ratios so that it stays accurate when both values are large.
    fn increase(&self, t: f64, x: &[f64], sx: &[f64], y: &[f64]) -> Option<f64> {
        let sy = self.slacks(y)?;
        let du: f64 = (0..self.n).map(|i| libm::log(y[i] / x[i])).sum();
        let ds: f64 = sx.iter().zip(&sy).map(|(a, b)| libm::log(b / a)).sum();
        Some(t * du + ds)
    }

    /// Newton direction for the barrier problem at `x`, constrained to keep
    /// `Σ q` fixed, plus the squared Newton decrement.
    fn newton(&self, t: f64, x: &[f64]) -> Option<(Vec<f64>, f64)> {
        let (n, m) = (self.n, self.m);
        let dim = n + m;
        let s = self.slacks(x)?;
        let mut g = vec![0.0; dim];
        let mut h = vec![vec![0.0; dim + 1]; dim + 1];
        for i in 0..n {
            g[i] = t / x[i];
            h[i][i] = -t / (x[i] * x[i]);
        }
        for (&(i, j, p), &sv) in self.terms.iter().zip(&s) {
            let inv = 1.0 / sv;
            let inv2 = inv * inv;
            g[i] -= p * inv;
            g[n + j] += inv;
            h[i][i] -= p * p * inv2;
            h[i][n + j] += p * inv2;
            h[n + j][i] += p * inv2;
            h[n + j][n + j] -= inv2;
        }
        for j in 0..m {
            h[n + j][dim] = 1.0;
            h[dim][n + j] = 1.0;
        }
        // Symmetric diagonal scaling keeps the pivots comparable when the
        // slacks span many orders of magnitude.
        let mut d: Vec<f64> = (0..dim).map(|k| 1.0 / libm::sqrt(-h[k][k])).collect();
        let border = d[n..].iter().fold(0.0f64, |a, &b| a.max(b));
        d.push(1.0 / border);
        for (r, row) in h.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v *= d[r] * d[c];
            }
        }
        let mut rhs: Vec<f64> = (0..dim).map(|k| -g[k] * d[k]).collect();
        rhs.push(0.0);
        let sol = solve(h, rhs)?;
        let step: Vec<f64> = (0..dim).map(|k| sol[k] * d[k]).collect();
        let dec: f64 = step.iter().zip(&g).map(|(a, b)| a * b).sum();
        Some((step, dec))
    }
}

fn not_converged(msg: &str) -> Error {
    Error::NotConverged(format!("nash solver: {msg}"))
}

/// Interior-point solve on the reduced problem; returns `(u, q)`.
fn barrier_solve(profile: &Profile, cols: &[usize], tol: f64) -> Result<(Vec<f64>, usize)> {
    let n = profile.n();
    let m = cols.len();
    let mut terms = Vec::new();
    for i in 0..n {
        for (jj, &j) in cols.iter().enumerate() {
            let p = profile.peak(i)[j];
            if p > 0.0 {
                terms.push((i, jj, p));
            }
        }
    }
    let barrier = Barrier {
        terms: &terms,
        n,
        m,
    };
    let mut x = vec![0.0; n + m];
    for (jj, &j) in cols.iter().enumerate() {
        x[n + jj] = profile.column(j).iter().sum::<f64>() / n as f64;
    }
    let qsum: f64 = x[n..].iter().sum();
    for v in x[n..].iter_mut() {
        *v /= qsum;
    }
    for i in 0..n {
        let u = terms
            .iter()
            .filter(|t| t.0 == i)
            .map(|&(_, jj, p)| x[n + jj] / p)
            .fold(f64::INFINITY, f64::min);
        x[i] = 0.5 * u;
    }

    let gap_target = (tol * 1e-3).max(1e-13);
    let mut t = 1.0;
    let mut steps = 0;
    loop {
        for _ in 0..MAX_NEWTON {
            let Some((dir, dec)) = barrier.newton(t, &x) else {
                break;
            };
            if !(dec.is_finite()) {
                return Err(not_converged("non-finite Newton step"));
            }
            if dec * 0.5 <= 1e-12 {
                break;
            }
            steps += 1;
            let sx = barrier
                .slacks(&x)
                .ok_or_else(|| not_converged("left the domain"))?;
            let mut alpha = 1.0;
            let mut moved = false;
            for _ in 0..60 {
                let cand: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + alpha * d).collect();
                if let Some(gain) = barrier.increase(t, &x, &sx, &cand) {
                    if gain >= 0.25 * alpha * dec {
                        x = cand;
                        moved = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !moved {
                break;
            }
        }
        if terms.len() as f64 / t <= gap_target {
            break;
        }
        t *= BARRIER_GROWTH;
    }
    Ok((x, steps))
}

/// Maximizes the Nash product of Leontief utilities and certifies the
/// result with a decomposition.
pub fn nash_solve(profile: &Profile, tol: f64) -> Result<NashSolution> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let m = profile.m();
    let cols: Vec<usize> = (0..m).filter(|&j| profile.max_column(j) > 0.0).collect();
    let (x, newton_steps) = barrier_solve(profile, &cols, tol)?;
    let n = profile.n();
    let mut full = vec![0.0; m];
    for (jj, &j) in cols.iter().enumerate() {
        full[j] = x[n + jj].max(0.0);
    }
    let q = Distribution::normalized(full)?;
    let mut eps = CERT_EPS_START;
    let mut last = None;
    while eps <= CERT_EPS_MAX {
        match decomposition_certificate(profile, &q, eps) {
            Ok(decomposition) => {
                let utilities = profile
                    .peaks()
                    .iter()
                    .map(|p| leontief_utility(p, &q))
                    .collect();
                return Ok(NashSolution {
                    q,
                    utilities,
                    decomposition,
                    certificate_eps: eps,
                    newton_steps,
                });
            }
            Err(v) => last = Some(v),
        }
        eps *= 2.0;
    }
    let v = last.expect("at least one attempt");
    Err(not_converged(&format!(
        "no decomposition up to eps {CERT_EPS_MAX}: group {:?} gets {} < {}",
        v.group, v.critical_mass, v.required
    )))
}

/// The Nash product rule.
pub fn nash_optimize(profile: &Profile, tol: f64) -> Result<Distribution> {
    nash_solve(profile, tol).map(|s| s.q)
}

/// Entropic mirror ascent with the supergradient at each agent's first
/// critical alternative and step `c/√k`. Slow and approximate; kept for
/// comparison with [`nash_optimize`].
pub fn nash_mirror_descent(profile: &Profile, iterations: usize, c: f64) -> Result<Distribution> {
    let m = profile.m();
    let cols: Vec<bool> = (0..m).map(|j| profile.max_column(j) > 0.0).collect();
    let mut q: Vec<f64> = crate::model::mean_rule(profile).into_vec();
    let mut best = Distribution::normalized(q.clone())?;
    let mut best_val = nash_objective(profile, &best);
    for k in 1..=iterations {
        let cur = Distribution::normalized(q.clone())?;
        let mut g = vec![0.0; m];
        for p in profile.peaks() {
            let u = leontief_utility(p, &cur);
            let j = critical_set(p, &cur, 0.0)[0];
            g[j] += 1.0 / (u * p[j]).max(1e-300);
        }
        let gmax = g.iter().fold(0.0f64, |a, b| a.max(*b)).max(1e-300);
        let step = c / libm::sqrt(k as f64);
        for j in 0..m {
            if cols[j] {
                q[j] *= libm::exp(step * g[j] / gmax);
            }
        }
        let s: f64 = q.iter().sum();
        for v in q.iter_mut() {
            *v /= s;
        }
        let cand = Distribution::normalized(q.clone())?;
        let val = nash_objective(profile, &cand);
        if val > best_val {
            best_val = val;
            best = cand;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn prof(rows: &[&[f64]]) -> Profile {
        Profile::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn two_agent_profile() {
        let p = prof(&[&[0.8, 0.2, 0.0], &[0.8, 0.0, 0.2]]);
        let s = nash_solve(&p, DEFAULT_TOL).unwrap();
        let want = [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0];
        let err: f64 = s.q.iter().zip(want).map(|(a, b)| (a - b).abs()).sum();
        assert!(err < 1e-7, "{} err {err}", s.q);
        for u in &s.utilities {
            assert!((u - 5.0 / 6.0).abs() < 1e-7);
        }
        let obj = nash_objective(&p, &s.q);
        assert!((obj - 2.0 * libm::log(5.0 / 6.0)).abs() < 1e-7);
    }

    #[test]
    fn two_alternatives() {
        let s = nash_solve(&prof(&[&[0.75, 0.25], &[0.25, 0.75]]), DEFAULT_TOL).unwrap();
        assert!((s.q[0] - 0.5).abs() < 1e-7);
        assert!((s.utilities[0] - 2.0 / 3.0).abs() < 1e-7);
    }

    #[test]
    fn unanimous_and_zero_columns() {
        let s = nash_solve(&prof(&[&[0.2, 0.0, 0.8], &[0.2, 0.0, 0.8]]), DEFAULT_TOL).unwrap();
        assert_eq!(s.q[1], 0.0);
        assert!((s.q[0] - 0.2).abs() < 1e-7);
    }

    #[test]
    fn objective_sentinel() {
        let p = prof(&[&[0.5, 0.5, 0.0], &[0.0, 0.0, 1.0]]);
        let q = Distribution::new(vec![0.5, 0.5, 0.0]).unwrap();
        assert_eq!(nash_objective(&p, &q), f64::NEG_INFINITY);
        let u = prof(&[&[0.3, 0.7], &[0.3, 0.7]]);
        assert_eq!(nash_objective(&u, u.peak(0)), 0.0);
    }

    #[test]
    fn mirror_descent_is_close() {
        let p = prof(&[&[0.8, 0.2, 0.0], &[0.8, 0.0, 0.2]]);
        let md = nash_mirror_descent(&p, 20_000, 0.5).unwrap();
        let exact = nash_optimize(&p, DEFAULT_TOL).unwrap();
        assert!(md.l1_distance(&exact) < 5e-2, "{md}");
    }
}
