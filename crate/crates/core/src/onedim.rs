//! Rules for two alternatives. An outcome `(1 - x, x)` is identified with
//! the scalar `x`, the share of the second alternative.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{Distribution, Profile};
use crate::numerics::Rational;

/// Fixed phantom positions `α_0 <= α_1 <= … <= α_k` in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhantomVector(Vec<f64>);

impl PhantomVector {
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        if let Some(bad) = alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(Error::InvalidArgument(format!(
                "phantom {bad} outside [0, 1]"
            )));
        }
        if alphas.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidArgument(
                "phantoms must be nondecreasing".into(),
            ));
        }
        Ok(PhantomVector(alphas))
    }

    /// `α_k = k / n` for `k = 0..=n`.
    pub fn uniform(n: usize) -> Self {
        PhantomVector((0..=n).map(|k| k as f64 / n as f64).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Middle element of an odd-length list (the lower middle otherwise).
pub fn median_of(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    values[(values.len() - 1) / 2]
}

fn check_counts(n: usize, k: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::EmptyProfile);
    }
    if k != n + 1 && !(n >= 1 && k == n - 1) {
        return Err(Error::InvalidArgument(format!(
            "{n} peaks need {} or {} phantoms, got {k}",
            n + 1,
            n.saturating_sub(1)
        )));
    }
    Ok(())
}

/// Median of the peaks together with the phantoms. Accepts `n + 1`
/// phantoms, or `n - 1` for the efficient variant.
pub fn generalized_median(peaks: &[f64], phantoms: &PhantomVector) -> Result<f64> {
    check_counts(peaks.len(), phantoms.len())?;
    if let Some(bad) = peaks.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidArgument(format!("peak {bad} outside [0, 1]")));
    }
    let mut all: Vec<f64> = peaks.iter().chain(phantoms.as_slice()).copied().collect();
    Ok(median_of(&mut all))
}

/// Exact version of [`generalized_median`].
pub fn generalized_median_exact(peaks: &[Rational], phantoms: &[Rational]) -> Result<Rational> {
    check_counts(peaks.len(), phantoms.len())?;
    let mut all: Vec<Rational> = peaks.iter().chain(phantoms).cloned().collect();
    all.sort();
    Ok(all[(all.len() - 1) / 2].clone())
}

/// The generalized median with phantoms at `k / n`.
pub fn uniform_phantom(peaks: &[f64]) -> Result<f64> {
    if peaks.is_empty() {
        return Err(Error::EmptyProfile);
    }
    generalized_median(peaks, &PhantomVector::uniform(peaks.len()))
}

/// `max_G min(α_G, min_{i ∈ G} p_i)`, with agent subsets as bit masks
/// (bit `i` set when agent `i` is in `G`).
pub fn maxmin_rule(peaks: &[f64], alpha: &BTreeMap<u32, f64>) -> Result<f64> {
    let n = peaks.len();
    if n > 20 {
        return Err(Error::InvalidArgument(
            "maxmin rule supports at most 20 agents".into(),
        ));
    }
    let mut best = f64::NEG_INFINITY;
    for mask in 0u32..(1 << n) {
        let a = *alpha
            .get(&mask)
            .ok_or_else(|| Error::InvalidArgument(format!("missing alpha for subset {mask:#b}")))?;
        let inner = (0..n)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| peaks[i])
            .fold(a, f64::min);
        best = best.max(inner);
    }
    Ok(best)
}

/// Subset weights `α_G = α_{|G|}` that make [`maxmin_rule`] agree with the
/// anonymous generalized median on `phantoms` (`n + 1` entries).
pub fn symmetric_alpha_map(phantoms: &PhantomVector) -> BTreeMap<u32, f64> {
    let n = phantoms.len() - 1;
    (0u32..(1 << n))
        .map(|mask| (mask, phantoms.as_slice()[mask.count_ones() as usize]))
        .collect()
}

pub fn to_scalar(q: &Distribution) -> Result<f64> {
    if q.len() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: q.len(),
        });
    }
    Ok(q[1])
}

pub fn from_scalar(x: f64) -> Distribution {
    Distribution::new(alloc::vec![1.0 - x, x]).expect("scalar in [0, 1]")
}

/// The profile's peaks as scalars; requires `m = 2`.
pub fn scalar_peaks(profile: &Profile) -> Result<Vec<f64>> {
    if profile.m() != 2 {
        return Err(Error::Incompatible {
            mechanism: "uniform-phantom".into(),
            reason: format!("needs exactly 2 alternatives, profile has {}", profile.m()),
        });
    }
    Ok(profile.column(1))
}

/// The uniform phantom rule applied to a two-alternative profile.
pub fn uniform_phantom_profile(profile: &Profile) -> Result<Distribution> {
    let x = uniform_phantom(&scalar_peaks(profile)?)?;
    Ok(from_scalar(x))
}
