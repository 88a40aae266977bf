//! The exact profiles used by the two impossibility arguments.
//!
//! Agent 0 and agent `n − 1` carry the special peaks; agents `1..n−1` all
//! report `e_b`. Alternatives are `a = 0`, `b = 1`, `c = 2`, followed by
//! padding alternatives that every agent assigns zero.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::Metric;
use crate::error::{Error, Result};
use crate::model::{Distribution, Profile};
use crate::numerics::rational::q;
use crate::numerics::{Rational, Rel, MAX_EXACT_VARS};

/// A profile with exact rational peaks.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalProfile {
    pub label: String,
    pub peaks: Vec<Vec<Rational>>,
}

impl RationalProfile {
    pub fn n(&self) -> usize {
        self.peaks.len()
    }

    pub fn m(&self) -> usize {
        self.peaks[0].len()
    }

    pub fn peak(&self, i: usize) -> &[Rational] {
        &self.peaks[i]
    }

    pub fn to_profile(&self) -> Result<Profile> {
        let rows = self
            .peaks
            .iter()
            .map(|p| p.iter().map(Rational::to_f64).collect())
            .collect();
        Profile::from_rows(rows)
    }

    pub fn is_single_minded(&self) -> bool {
        self.peaks
            .iter()
            .all(|p| p.iter().any(|x| *x == Rational::one()))
    }

    /// The mean of the peaks, which proportionality forces on single-minded
    /// profiles.
    pub fn mean(&self) -> Vec<Rational> {
        let n = Rational::from_int(self.n() as i64);
        (0..self.m())
            .map(|j| self.peaks.iter().map(|p| &p[j]).sum::<Rational>() / &n)
            .collect()
    }

    /// Whether the two profiles differ only in the row of `agent`.
    pub fn differs_only_at(&self, other: &RationalProfile, agent: usize) -> bool {
        self.n() == other.n()
            && (0..self.n()).all(|i| i == agent || self.peaks[i] == other.peaks[i])
    }
}

/// Per-coordinate knowledge about an outcome; `None` leaves it open.
pub type CoordinateBound = Option<(Rel, Rational)>;

#[derive(Clone, Debug, PartialEq)]
pub struct RationalProfileFamily {
    pub metric: Metric,
    pub n: usize,
    pub m: usize,
    /// Profiles `1` to `6`, in order.
    pub profiles: Vec<RationalProfile>,
    /// Profiles `3*` and `4*`: profiles 3 and 4 with the roles of `a` and
    /// `c` (and of agents 0 and `n − 1`) exchanged.
    pub auxiliary: Vec<RationalProfile>,
    /// The outcome tables printed with the profiles.
    pub forced_outcomes: BTreeMap<String, Vec<CoordinateBound>>,
}

impl RationalProfileFamily {
    pub fn get(&self, label: &str) -> Option<&RationalProfile> {
        self.profiles
            .iter()
            .chain(&self.auxiliary)
            .find(|p| p.label == label)
    }

    pub fn all(&self) -> impl Iterator<Item = &RationalProfile> {
        self.profiles.iter().chain(&self.auxiliary)
    }
}

fn pad(v: &[Rational], m: usize) -> Vec<Rational> {
    let mut out = v.to_vec();
    out.resize(m, Rational::zero());
    out
}

/// The six profiles (plus the two mirrored auxiliaries) over three
/// alternatives.
pub fn gen_profiles(metric: Metric, n: usize) -> Result<RationalProfileFamily> {
    gen_profiles_padded(metric, n, 3)
}

/// As [`gen_profiles`], padded with `m − 3` alternatives nobody funds.
pub fn gen_profiles_padded(metric: Metric, n: usize, m: usize) -> Result<RationalProfileFamily> {
    if n < 3 {
        return Err(Error::InvalidArgument(alloc::format!(
            "the construction needs n >= 3, got {n}"
        )));
    }
    if m < 3 {
        return Err(Error::TooFewAlternatives { min: 3, got: m });
    }
    if m - 1 > MAX_EXACT_VARS {
        return Err(Error::DimensionOverflow {
            max: MAX_EXACT_VARS + 1,
            got: m,
        });
    }
    let k = n as i64;
    let two_n = 2 * k;
    let ea = pad(&[q(1, 1), q(0, 1), q(0, 1)], m);
    let eb = pad(&[q(0, 1), q(1, 1), q(0, 1)], m);
    let ec = pad(&[q(0, 1), q(0, 1), q(1, 1)], m);
    let lean_a = pad(&[q(3, two_n), q(two_n - 3, two_n), q(0, 1)], m);
    let lean_c = pad(&[q(0, 1), q(two_n - 3, two_n), q(3, two_n)], m);
    let near_a = pad(&[q(1, k + 1), q(k, k + 1), q(0, 1)], m);
    let near_c = pad(&[q(0, 1), q(k, k + 1), q(1, k + 1)], m);

    let build = |label: &str, first: &Vec<Rational>, last: &Vec<Rational>| {
        let mut peaks = vec![first.clone()];
        peaks.extend((1..n - 1).map(|_| eb.clone()));
        peaks.push(last.clone());
        RationalProfile {
            label: label.to_string(),
            peaks,
        }
    };
    let (five, six) = match metric {
        Metric::L1 => (build("5", &lean_a, &lean_c), build("6", &ea, &lean_c)),
        Metric::LInf => (build("5", &ea, &lean_c), build("6", &lean_a, &lean_c)),
    };
    let profiles = vec![
        build("1", &lean_a, &ec),
        build("2", &ea, &ec),
        build("3", &near_a, &ec),
        build("4", &eb, &ec),
        five,
        six,
    ];
    let auxiliary = vec![build("3*", &ea, &near_c), build("4*", &ea, &eb)];

    let exact = |v: [Rational; 3]| -> Vec<CoordinateBound> {
        let mut out: Vec<CoordinateBound> = v.into_iter().map(|x| Some((Rel::Eq, x))).collect();
        out.resize(m, Some((Rel::Eq, Rational::zero())));
        out
    };
    let bounds = |v: [(Rel, Rational); 3]| -> Vec<CoordinateBound> {
        let mut out: Vec<CoordinateBound> = v.into_iter().map(Some).collect();
        out.resize(m, None);
        out
    };
    let mut forced = BTreeMap::new();
    forced.insert(
        "1".to_string(),
        bounds([
            (Rel::Ge, q(1, two_n)),
            (Rel::Ge, q(two_n - 3, two_n)),
            (Rel::Le, q(1, k)),
        ]),
    );
    forced.insert("2".to_string(), exact([q(1, k), q(k - 2, k), q(1, k)]));
    forced.insert("4".to_string(), exact([q(0, 1), q(k - 1, k), q(1, k)]));
    match metric {
        Metric::L1 => {
            forced.insert("3".to_string(), exact([q(0, 1), q(k - 1, k), q(1, k)]));
            forced.insert(
                "6".to_string(),
                exact([q(1, k), q(two_n - 3, two_n), q(1, two_n)]),
            );
        }
        Metric::LInf => {
            forced.insert(
                "5".to_string(),
                bounds([
                    (Rel::Le, q(1, k)),
                    (Rel::Ge, q(two_n - 3, two_n)),
                    (Rel::Ge, q(1, two_n)),
                ]),
            );
        }
    }
    Ok(RationalProfileFamily {
        metric,
        n,
        m,
        profiles,
        auxiliary,
        forced_outcomes: forced,
    })
}

/// Converts an exact outcome to a float distribution.
pub fn to_distribution(v: &[Rational]) -> Result<Distribution> {
    Distribution::new(v.iter().map(Rational::to_f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_agent_profile_one() {
        let fam = gen_profiles(Metric::L1, 3).unwrap();
        let p1 = fam.get("1").unwrap();
        assert_eq!(p1.peaks[0], vec![q(1, 2), q(1, 2), q(0, 1)]);
        assert_eq!(p1.peaks[1], vec![q(0, 1), q(1, 1), q(0, 1)]);
        assert_eq!(p1.peaks[2], vec![q(0, 1), q(0, 1), q(1, 1)]);
        assert_eq!(
            fam.get("2").unwrap().mean(),
            vec![q(1, 3), q(1, 3), q(1, 3)]
        );
    }

    #[test]
    fn forced_outcome_for_five_agents() {
        let fam = gen_profiles(Metric::L1, 5).unwrap();
        let p2 = fam.get("2").unwrap();
        assert!(p2.is_single_minded());
        assert_eq!(p2.mean(), vec![q(1, 5), q(3, 5), q(1, 5)]);
    }

    #[test]
    fn rows_sum_to_one_exactly() {
        for metric in [Metric::L1, Metric::LInf] {
            for n in 3..=10 {
                for m in [3, 5] {
                    let fam = gen_profiles_padded(metric, n, m).unwrap();
                    assert_eq!(fam.all().count(), 8);
                    for p in fam.all() {
                        assert_eq!(p.n(), n);
                        for row in &p.peaks {
                            assert_eq!(row.len(), m);
                            assert_eq!(row.iter().sum::<Rational>(), Rational::one());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_two_agents() {
        assert!(gen_profiles(Metric::L1, 2).is_err());
        assert!(gen_profiles_padded(Metric::LInf, 3, 2).is_err());
    }
}
