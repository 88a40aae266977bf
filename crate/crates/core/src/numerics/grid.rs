//! Exhaustive search over the lattice `{a / K : a ∈ ℕ^m, Σ a = K}`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Default cap on the number of lattice points a single search may visit.
pub const DEFAULT_POINT_BUDGET: u128 = 50_000_000;

/// Number of lattice points, `C(K + m - 1, m - 1)`.
pub fn lattice_size(m: usize, k: usize) -> u128 {
    let mut acc: u128 = 1;
    for i in 1..m as u128 {
        acc = acc.saturating_mul(k as u128 + i) / i;
    }
    acc
}

/// Iterates the lattice in lexicographic order of the integer vectors
/// (first coordinate slowest), yielding points of the simplex.
pub struct SimplexGrid {
    counts: Vec<usize>,
    k: usize,
    done: bool,
}

pub fn simplex_grid(m: usize, k: usize) -> SimplexGrid {
    assert!(m >= 1 && k >= 1);
    let mut counts = vec![0; m];
    counts[m - 1] = k;
    SimplexGrid {
        counts,
        k,
        done: false,
    }
}

impl SimplexGrid {
    fn advance(&mut self) {
        let m = self.counts.len();
        // The last coordinate holds the remainder; find the rightmost free
        // coordinate that can still grow.
        let mut i = m.wrapping_sub(2);
        loop {
            if i >= m {
                self.done = true;
                return;
            }
            let used: usize = self.counts[..=i].iter().sum();
            if used < self.k {
                self.counts[i] += 1;
                for c in &mut self.counts[i + 1..m - 1] {
                    *c = 0;
                }
                let used: usize = self.counts[..m - 1].iter().sum();
                self.counts[m - 1] = self.k - used;
                return;
            }
            i = i.wrapping_sub(1);
        }
    }
}

impl Iterator for SimplexGrid {
    type Item = Vec<f64>;
    fn next(&mut self) -> Option<Vec<f64>> {
        if self.done {
            return None;
        }
        let k = self.k as f64;
        let point = self.counts.iter().map(|&c| c as f64 / k).collect();
        if self.counts.len() == 1 {
            self.done = true;
        } else {
            self.advance();
        }
        Some(point)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridArgmax {
    pub point: Vec<f64>,
    pub value: f64,
    pub visited: u128,
}

/// Maximizes `objective` over the lattice of resolution `1/k`.
///
/// Values within a relative `1e-12` of the incumbent do not replace it, so
/// the lexicographically first of (near-)tied points wins.
pub fn grid_argmax<F>(objective: F, m: usize, k: usize, budget: u128) -> Result<GridArgmax>
where
    F: Fn(&[f64]) -> f64,
{
    if m < 1 || k < 1 {
        return Err(Error::InvalidArgument(
            "grid needs m >= 1 and K >= 1".into(),
        ));
    }
    let points = lattice_size(m, k);
    if points > budget {
        return Err(Error::GridBudget { points, budget });
    }
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut visited = 0u128;
    for p in simplex_grid(m, k) {
        visited += 1;
        let v = objective(&p);
        let better = match &best {
            None => true,
            Some((_, b)) => {
                if b.is_finite() {
                    v > b + 1e-12 * b.abs().max(1.0)
                } else {
                    v > *b
                }
            }
        };
        if better {
            best = Some((p, v));
        }
    }
    let (point, value) = best.expect("lattice is nonempty");
    Ok(GridArgmax {
        point,
        value,
        visited,
    })
}
