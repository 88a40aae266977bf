//! Distributions, profiles and the utility models agents use to compare
//! distributions.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::Index;
use core::str::FromStr;

use crate::error::{Error, Result};

/// Tolerance for simplex membership (entries summing to one).
pub const EPS_SUM: f64 = 1e-9;
/// Default tolerance when deciding which ratios tie for the minimum.
pub const EPS_RATIO: f64 = 1e-9;

/// A point of the standard simplex: a division of a unit budget among `m`
/// alternatives.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution(Vec<f64>);

impl Distribution {
    /// Validates `entries` with the default [`EPS_SUM`] tolerance.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(entries, EPS_SUM)
    }

    /// Accepts entries that are nonnegative (up to `-eps`, clamped to zero)
    /// and sum to one within `eps`; the accepted vector is renormalized.
    pub fn with_tolerance(mut entries: Vec<f64>, eps: f64) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::TooFewAlternatives { min: 1, got: 0 });
        }
        for (index, x) in entries.iter_mut().enumerate() {
            if !x.is_finite() {
                return Err(Error::NonFinite { index });
            }
            if *x < 0.0 {
                if *x < -eps {
                    return Err(Error::NegativeEntry { index, value: *x });
                }
                *x = 0.0;
            }
        }
        let sum: f64 = entries.iter().sum();
        if (sum - 1.0).abs() > eps {
            return Err(Error::NotNormalized { sum });
        }
        if sum != 1.0 {
            for x in entries.iter_mut() {
                *x /= sum;
            }
        }
        Ok(Distribution(entries))
    }

    /// Scales a nonnegative vector with positive sum onto the simplex.
    pub fn normalized(entries: Vec<f64>) -> Result<Self> {
        let sum: f64 = entries.iter().sum();
        if sum.is_nan() || sum <= 0.0 || !sum.is_finite() {
            return Err(Error::NotNormalized { sum });
        }
        Self::with_tolerance(entries.into_iter().map(|x| x / sum).collect(), 1e-6)
    }

    pub fn vertex(m: usize, j: usize) -> Self {
        let mut v = alloc::vec![0.0; m];
        v[j] = 1.0;
        Distribution(v)
    }

    pub fn uniform(m: usize) -> Self {
        Distribution(alloc::vec![1.0 / m as f64; m])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> core::slice::Iter<'_, f64> {
        self.0.iter()
    }

    /// Indices with strictly positive mass.
    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&j| self.0[j] > 0.0).collect()
    }

    /// Total mass on a set of alternatives, `q(T)`.
    pub fn mass(&self, set: &[usize]) -> f64 {
        set.iter().map(|&j| self.0[j]).sum()
    }

    pub fn l1_distance(&self, other: &Distribution) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }

    /// `lambda * self + (1 - lambda) * other`.
    pub fn mix(&self, lambda: f64, other: &Distribution) -> Distribution {
        let v = self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
            .collect();
        Distribution(v)
    }

    /// Entry `j` of the result is entry `perm[j]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Distribution {
        Distribution(perm.iter().map(|&k| self.0[k]).collect())
    }

    pub fn is_vertex(&self) -> bool {
        self.0.iter().any(|&x| (x - 1.0).abs() <= EPS_SUM)
    }
}

impl Index<usize> for Distribution {
    type Output = f64;
    fn index(&self, j: usize) -> &f64 {
        &self.0[j]
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (j, x) in self.0.iter().enumerate() {
            if j > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x:.6}")?;
        }
        write!(f, ")")
    }
}

/// The reported peaks of `n` agents over `m` alternatives.
#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    peaks: Vec<Distribution>,
}

impl Profile {
    pub fn new(peaks: Vec<Distribution>) -> Result<Self> {
        let first = peaks.first().ok_or(Error::EmptyProfile)?;
        let m = first.len();
        if m < 2 {
            return Err(Error::TooFewAlternatives { min: 2, got: m });
        }
        if let Some(bad) = peaks.iter().find(|p| p.len() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: bad.len(),
            });
        }
        Ok(Profile { peaks })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let peaks = rows
            .into_iter()
            .map(Distribution::new)
            .collect::<Result<Vec<_>>>()?;
        Profile::new(peaks)
    }

    pub fn n(&self) -> usize {
        self.peaks.len()
    }

    pub fn m(&self) -> usize {
        self.peaks[0].len()
    }

    pub fn peak(&self, i: usize) -> &Distribution {
        &self.peaks[i]
    }

    pub fn peaks(&self) -> &[Distribution] {
        &self.peaks
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.peaks.iter().map(|p| p[j]).collect()
    }

    /// The profile in which agent `i` reports `report` instead.
    pub fn with_peak(&self, i: usize, report: Distribution) -> Result<Profile> {
        if report.len() != self.m() {
            return Err(Error::DimensionMismatch {
                expected: self.m(),
                got: report.len(),
            });
        }
        let mut peaks = self.peaks.clone();
        peaks[i] = report;
        Ok(Profile { peaks })
    }

    pub fn without_agent(&self, i: usize) -> Result<Profile> {
        let peaks: Vec<_> = self
            .peaks
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != i)
            .map(|(_, p)| p.clone())
            .collect();
        Profile::new(peaks)
    }

    /// Concatenates the agents of two profiles over the same alternatives.
    pub fn union(&self, other: &Profile) -> Result<Profile> {
        let mut peaks = self.peaks.clone();
        peaks.extend(other.peaks.iter().cloned());
        Profile::new(peaks)
    }

    /// Agent `i` of the result is agent `perm[i]` of `self`.
    pub fn permute_agents(&self, perm: &[usize]) -> Profile {
        Profile {
            peaks: perm.iter().map(|&k| self.peaks[k].clone()).collect(),
        }
    }

    /// Alternative `j` of the result is alternative `perm[j]` of `self`.
    pub fn permute_alternatives(&self, perm: &[usize]) -> Profile {
        Profile {
            peaks: self.peaks.iter().map(|p| p.permuted(perm)).collect(),
        }
    }

    pub fn max_column(&self, j: usize) -> f64 {
        self.peaks
            .iter()
            .map(|p| p[j])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_column(&self, j: usize) -> f64 {
        self.peaks
            .iter()
            .map(|p| p[j])
            .fold(f64::INFINITY, f64::min)
    }
}

/// How a peak induces preferences over distributions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UtilityModel {
    L1,
    L2,
    LInf,
    Leontief,
    LeximinLeontief,
}

impl UtilityModel {
    pub const ALL: [UtilityModel; 5] = [
        UtilityModel::L1,
        UtilityModel::L2,
        UtilityModel::LInf,
        UtilityModel::Leontief,
        UtilityModel::LeximinLeontief,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            UtilityModel::L1 => "l1",
            UtilityModel::L2 => "l2",
            UtilityModel::LInf => "linf",
            UtilityModel::Leontief => "leontief",
            UtilityModel::LeximinLeontief => "leximin-leontief",
        }
    }

    pub fn is_metric(self) -> bool {
        matches!(
            self,
            UtilityModel::L1 | UtilityModel::L2 | UtilityModel::LInf
        )
    }
}

impl fmt::Display for UtilityModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for UtilityModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        UtilityModel::ALL
            .into_iter()
            .find(|m| m.tag().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownModel(s.to_string()))
    }
}

fn check_dims(peak: &Distribution, q: &Distribution) -> Result<()> {
    if peak.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: peak.len(),
            got: q.len(),
        });
    }
    Ok(())
}

/// Distance `‖p - q‖` under a metric model (ℓ1, ℓ2 or ℓ∞).
pub fn distance(model: UtilityModel, peak: &Distribution, q: &Distribution) -> Result<f64> {
    check_dims(peak, q)?;
    let diffs = peak.iter().zip(q.iter()).map(|(a, b)| (a - b).abs());
    match model {
        UtilityModel::L1 => Ok(diffs.sum()),
        UtilityModel::L2 => Ok(libm::sqrt(diffs.map(|d| d * d).sum())),
        UtilityModel::LInf => Ok(diffs.fold(0.0, f64::max)),
        other => Err(Error::InvalidArgument(format!(
            "{other} is not a metric model"
        ))),
    }
}

/// `min_{j : p_j > 0} q_j / p_j`.
pub fn leontief_utility(peak: &Distribution, q: &Distribution) -> f64 {
    peak.iter()
        .zip(q.iter())
        .filter(|(p, _)| **p > 0.0)
        .map(|(p, x)| x / p)
        .fold(f64::INFINITY, f64::min)
}

/// Utility of `q` for an agent with the given peak.
///
/// Metric models return `-‖p - q‖` (so 0 at the peak); Leontief returns the
/// smallest ratio `q_j / p_j` over the peak's support (so 1 at the peak).
/// Leximin-Leontief has no scalar utility and is rejected.
pub fn utility(model: UtilityModel, peak: &Distribution, q: &Distribution) -> Result<f64> {
    check_dims(peak, q)?;
    match model {
        UtilityModel::Leontief => Ok(leontief_utility(peak, q)),
        UtilityModel::LeximinLeontief => Err(Error::NoScalarUtility("leximin-leontief")),
        metric => Ok(-distance(metric, peak, q)?),
    }
}

/// Alternatives attaining the minimum ratio up to `eps`:
/// `{ j in supp(p) : q_j / p_j <= min + eps }`. Indices are zero-based.
pub fn critical_set(peak: &Distribution, q: &Distribution, eps: f64) -> Vec<usize> {
    let min = leontief_utility(peak, q);
    (0..peak.len())
        .filter(|&j| peak[j] > 0.0 && q[j] / peak[j] <= min + eps)
        .collect()
}

/// The ratios `q_j / p_j` over the peak's support, sorted ascending, each
/// tagged with its alternative.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioVector {
    entries: Vec<(f64, usize)>,
}

impl RatioVector {
    pub fn new(peak: &Distribution, q: &Distribution) -> Result<Self> {
        check_dims(peak, q)?;
        let mut entries: Vec<(f64, usize)> = (0..peak.len())
            .filter(|&j| peak[j] > 0.0)
            .map(|j| (q[j] / peak[j], j))
            .collect();
        if entries.is_empty() {
            return Err(Error::InvalidArgument("peak has empty support".into()));
        }
        entries.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        Ok(RatioVector { entries })
    }

    pub fn entries(&self) -> &[(f64, usize)] {
        &self.entries
    }

    pub fn ratios(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.0)
    }

    /// The smallest ratio, i.e. the Leontief utility.
    pub fn min(&self) -> f64 {
        self.entries[0].0
    }

    /// Lexicographic comparison of the sorted ratios; entries within `tol`
    /// of each other count as equal.
    pub fn compare(&self, other: &RatioVector, tol: f64) -> Ordering {
        for (a, b) in self.ratios().zip(other.ratios()) {
            if a > b + tol {
                return Ordering::Greater;
            }
            if b > a + tol {
                return Ordering::Less;
            }
        }
        // A missing entry behaves like +inf.
        other.entries.len().cmp(&self.entries.len())
    }
}

/// Leximin-Leontief comparison of `q1` and `q2` for an agent with `peak`:
/// `Greater` means the agent strictly prefers `q1`.
pub fn leximin_compare(
    peak: &Distribution,
    q1: &Distribution,
    q2: &Distribution,
) -> Result<Ordering> {
    leximin_compare_tol(peak, q1, q2, 0.0)
}

pub fn leximin_compare_tol(
    peak: &Distribution,
    q1: &Distribution,
    q2: &Distribution,
    tol: f64,
) -> Result<Ordering> {
    let a = RatioVector::new(peak, q1)?;
    let b = RatioVector::new(peak, q2)?;
    Ok(a.compare(&b, tol))
}

/// Coordinate-wise mean of the peaks.
pub fn mean_rule(profile: &Profile) -> Distribution {
    let n = profile.n() as f64;
    let v = (0..profile.m())
        .map(|j| profile.column(j).iter().sum::<f64>() / n)
        .collect();
    Distribution(v)
}

/// True iff every peak is a vertex of the simplex.
pub fn is_single_minded(profile: &Profile) -> bool {
    profile.peaks().iter().all(Distribution::is_vertex)
}

/// The alternative each single-minded agent supports, if the profile is
/// single-minded.
pub fn single_minded_choices(profile: &Profile) -> Option<Vec<usize>> {
    profile
        .peaks()
        .iter()
        .map(|p| (0..p.len()).find(|&j| (p[j] - 1.0).abs() <= EPS_SUM))
        .collect()
}
