//! The rule minimizing the total ℓ1 distance to the peaks.

use alloc::vec::Vec;

use crate::error::Result;
use crate::model::{Distribution, Profile};

#[derive(Clone, Debug, PartialEq)]
pub struct UtilitarianSolution {
    pub q: Distribution,
    /// `Σ_i ‖p_i - q‖_1`.
    pub total_distance: f64,
    /// True when the optimum is not unique and the returned point was chosen
    /// by the lexicographic tie-break.
    pub tied: bool,
}

/// Greedy water-filling over the pieces of the separable objective.
///
/// Coordinate `j` contributes `Σ_i |p_ij - q_j|`, whose slope between the
/// `k`-th and `(k+1)`-th smallest column value is `2k - n`. Mass is added
/// to pieces in order of increasing slope. At the marginal slope, later
/// alternatives are filled first, which yields the lexicographically
/// smallest optimum.
pub fn utilitarian_l1_detailed(profile: &Profile) -> Result<UtilitarianSolution> {
    let n = profile.n();
    let m = profile.m();
    // (slope, column, start, length)
    let mut pieces: Vec<(i64, usize, f64, f64)> = Vec::new();
    for j in 0..m {
        let mut v = profile.column(j);
        v.sort_by(f64::total_cmp);
        let mut prev = 0.0;
        for (k, &x) in v.iter().enumerate() {
            if x > prev {
                pieces.push((2 * k as i64 - n as i64, j, prev, x - prev));
            }
            prev = prev.max(x);
        }
        if prev < 1.0 {
            pieces.push((n as i64, j, prev, 1.0 - prev));
        }
    }
    pieces.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
    let mut q = alloc::vec![0.0; m];
    let mut remaining = 1.0f64;
    let mut tied = false;
    let mut idx = 0;
    while idx < pieces.len() && remaining > 0.0 {
        let slope = pieces[idx].0;
        let end = pieces[idx..]
            .iter()
            .position(|p| p.0 != slope)
            .map_or(pieces.len(), |o| idx + o);
        let group = &pieces[idx..end];
        let capacity: f64 = group.iter().map(|p| p.3).sum();
        if capacity > remaining + 1e-12 && group.len() > 1 && remaining > 1e-12 {
            tied = true;
        }
        for &(_, j, start, len) in group {
            let take = len.min(remaining);
            if take > 0.0 {
                q[j] = start + take;
                remaining -= take;
            }
        }
        idx = end;
    }
    let q = Distribution::normalized(q)?;
    let total_distance = profile.peaks().iter().map(|p| p.l1_distance(&q)).sum();
    Ok(UtilitarianSolution {
        q,
        total_distance,
        tied,
    })
}

pub fn utilitarian_l1(profile: &Profile) -> Result<Distribution> {
    utilitarian_l1_detailed(profile).map(|s| s.q)
}
