//! Moving-phantom mechanisms and the capped single-agent mechanism.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{Distribution, Profile};
use crate::numerics::Rational;
use crate::onedim::median_of;

/// Bisection steps used to locate the normalization time.
pub const BISECTION_STEPS: usize = 60;

/// A family of phantom positions `h_k(t)`, `k = 0..=n`, rising with `t`.
pub trait PhantomSystem: Sync {
    /// Position of phantom `k` (of `n + 1`) at time `t ∈ [0, 1]`.
    fn value(&self, n: usize, k: usize, t: f64) -> f64;
}

/// `h_k(t) = min(k·t, 1)`: the independent markets system.
#[derive(Clone, Copy, Debug, Default)]
pub struct LinearPhantoms;

impl PhantomSystem for LinearPhantoms {
    fn value(&self, _n: usize, k: usize, t: f64) -> f64 {
        (k as f64 * t).min(1.0)
    }
}

/// A phantom system given by a closure `(n, k, t) -> h_k(t)`.
pub struct FnPhantoms<F>(pub F);

impl<F: Fn(usize, usize, f64) -> f64 + Sync> PhantomSystem for FnPhantoms<F> {
    fn value(&self, n: usize, k: usize, t: f64) -> f64 {
        (self.0)(n, k, t)
    }
}

fn medians_at<S: PhantomSystem + ?Sized>(
    profile: &Profile,
    system: &S,
    t: f64,
    buf: &mut Vec<f64>,
) -> Vec<f64> {
    let n = profile.n();
    (0..profile.m())
        .map(|j| {
            buf.clear();
            buf.extend(profile.peaks().iter().map(|p| p[j]));
            buf.extend((0..=n).map(|k| system.value(n, k, t)));
            median_of(buf)
        })
        .collect()
}

fn probe_system<S: PhantomSystem + ?Sized>(system: &S, n: usize) -> Result<()> {
    const PROBES: usize = 32;
    let mut prev: Option<Vec<f64>> = None;
    for s in 0..=PROBES {
        let t = s as f64 / PROBES as f64;
        let vals: Vec<f64> = (0..=n).map(|k| system.value(n, k, t)).collect();
        if vals.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidArgument(format!(
                "phantom left [0, 1] at t = {t}"
            )));
        }
        if vals.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidArgument(format!(
                "phantoms not ordered by index at t = {t}"
            )));
        }
        if let Some(p) = &prev {
            if p.iter().zip(&vals).any(|(a, b)| a > b) {
                return Err(Error::InvalidArgument(format!(
                    "phantom decreases before t = {t}"
                )));
            }
        }
        prev = Some(vals);
    }
    Ok(())
}

/// The moving-phantom mechanism for `system`: the per-alternative medians
/// of peaks and phantoms at the earliest time their sum reaches one.
pub fn moving_phantom<S: PhantomSystem + ?Sized>(
    profile: &Profile,
    system: &S,
) -> Result<Distribution> {
    probe_system(system, profile.n())?;
    let mut buf = Vec::with_capacity(2 * profile.n() + 1);
    let total =
        |t: f64, buf: &mut Vec<f64>| medians_at(profile, system, t, buf).iter().sum::<f64>();
    let s0 = total(0.0, &mut buf);
    let s1 = total(1.0, &mut buf);
    if s0 > 1.0 + 1e-12 || s1 < 1.0 - 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "phantom system does not bracket the budget: S(0) = {s0}, S(1) = {s1}"
        )));
    }
    let t = if s0 >= 1.0 {
        0.0
    } else {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if total(mid, &mut buf) >= 1.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };
    Distribution::normalized(medians_at(profile, system, t, &mut buf))
}

/// Moving phantoms with `h_k(t) = min(k·t, 1)`.
pub fn independent_markets(profile: &Profile) -> Result<Distribution> {
    moving_phantom(profile, &LinearPhantoms)
}

fn check_cap(m: usize, cap: f64) -> Result<()> {
    if m < 3 {
        return Err(Error::TooFewAlternatives { min: 3, got: m });
    }
    if !(cap > 1.0 / m as f64 && cap <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "cap {cap} outside (1/{m}, 1]"
        )));
    }
    Ok(())
}

/// The agent's peak, except that a coordinate above `cap` is cut to `cap`
/// and the surplus is split equally among the other alternatives.
pub fn capped_nearest(peak: &Distribution, cap: f64) -> Result<Distribution> {
    let m = peak.len();
    check_cap(m, cap)?;
    let above: Vec<usize> = (0..m).filter(|&j| peak[j] > cap).collect();
    let top = match above.as_slice() {
        [] => return Ok(peak.clone()),
        [j] => *j,
        _ => {
            return Err(Error::InvalidArgument(
                "more than one coordinate above the cap".into(),
            ))
        }
    };
    let share = (peak[top] - cap) / (m - 1) as f64;
    let out: Vec<f64> = (0..m)
        .map(|j| if j == top { cap } else { peak[j] + share })
        .collect();
    if out.iter().enumerate().any(|(j, &x)| j != top && x > cap) {
        return Err(Error::InvalidArgument(
            "redistributed surplus exceeds the cap".into(),
        ));
    }
    Distribution::normalized(out)
}

/// [`capped_nearest`] in exact arithmetic.
pub fn capped_nearest_exact(peak: &[Rational], cap: &Rational) -> Result<Vec<Rational>> {
    let m = peak.len();
    check_cap(m, cap.to_f64())?;
    let above: Vec<usize> = (0..m).filter(|&j| &peak[j] > cap).collect();
    let top = match above.as_slice() {
        [] => return Ok(peak.to_vec()),
        [j] => *j,
        _ => {
            return Err(Error::InvalidArgument(
                "more than one coordinate above the cap".into(),
            ))
        }
    };
    let share = (&peak[top] - cap) / Rational::from_int(m as i64 - 1);
    let out: Vec<Rational> = (0..m)
        .map(|j| {
            if j == top {
                cap.clone()
            } else {
                &peak[j] + &share
            }
        })
        .collect();
    if out.iter().enumerate().any(|(j, x)| j != top && x > cap) {
        return Err(Error::InvalidArgument(
            "redistributed surplus exceeds the cap".into(),
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rational::q;
    use alloc::vec;

    fn prof(rows: &[&[f64]]) -> Profile {
        Profile::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn close(a: &Distribution, b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn manipulated_outputs() {
        let q0 = independent_markets(&prof(&[&[0.8, 0.2, 0.0], &[0.8, 0.0, 0.2]])).unwrap();
        assert!(close(&q0, &[0.6, 0.2, 0.2], 1e-9), "{q0}");
        let q1 = independent_markets(&prof(&[&[0.82, 0.18, 0.0], &[0.8, 0.0, 0.2]])).unwrap();
        assert!(close(&q1, &[0.62, 0.18, 0.2], 1e-9), "{q1}");
    }

    #[test]
    fn single_agent_and_unanimous() {
        let p = [0.2, 0.5, 0.3];
        assert!(close(&independent_markets(&prof(&[&p])).unwrap(), &p, 1e-9));
        assert!(close(
            &independent_markets(&prof(&[&p, &p, &p])).unwrap(),
            &p,
            1e-9
        ));
    }

    #[test]
    fn rejects_non_monotone_system() {
        let bad = FnPhantoms(|_n, k, t: f64| if k == 0 { 0.0 } else { 1.0 - t });
        assert!(moving_phantom(&prof(&[&[0.5, 0.5]]), &bad).is_err());
    }

    #[test]
    fn capped_examples() {
        let d = |v: &[f64]| Distribution::new(v.to_vec()).unwrap();
        let out = capped_nearest(&d(&[0.91, 0.08, 0.01]), 0.9).unwrap();
        assert!(close(&out, &[0.9, 0.085, 0.015], 1e-15));
        assert_eq!(
            capped_nearest(&d(&[0.5, 0.3, 0.2]), 0.9).unwrap(),
            d(&[0.5, 0.3, 0.2])
        );
        assert!(close(
            &capped_nearest(&d(&[1.0, 0.0, 0.0]), 0.9).unwrap(),
            &[0.9, 0.05, 0.05],
            1e-15
        ));
        assert!(capped_nearest(&d(&[0.5, 0.5]), 0.9).is_err());
        assert!(capped_nearest(&d(&[0.45, 0.45, 0.1]), 0.4).is_err());
        let exact = capped_nearest_exact(&[q(91, 100), q(8, 100), q(1, 100)], &q(9, 10)).unwrap();
        assert_eq!(exact, vec![q(9, 10), q(17, 200), q(3, 200)]);
    }
}
