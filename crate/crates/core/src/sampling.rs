//! Seeded random instances.

use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{Distribution, Profile};

/// The generator used by every randomized routine in the crate.
pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A uniform draw from the simplex (flat Dirichlet).
pub fn random_distribution<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Distribution {
    let w: Vec<f64> = (0..m)
        .map(|_| {
            let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            -libm::log(u)
        })
        .collect();
    let s: f64 = w.iter().sum();
    Distribution::normalized(w.into_iter().map(|x| x / s).collect()).expect("positive weights")
}

/// Like [`random_distribution`] but each coordinate is zeroed with
/// probability `zero_prob` (at least one coordinate survives), so peaks
/// with partial support appear regularly.
pub fn random_sparse_distribution<R: Rng + ?Sized>(
    rng: &mut R,
    m: usize,
    zero_prob: f64,
) -> Distribution {
    let mut w: Vec<f64> = random_distribution(rng, m).into_vec();
    let keep = rng.gen_range(0..m);
    for (j, x) in w.iter_mut().enumerate() {
        if j != keep && rng.gen_bool(zero_prob) {
            *x = 0.0;
        }
    }
    Distribution::normalized(w).expect("one coordinate kept")
}

pub fn random_profile<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize) -> Profile {
    let peaks = (0..n)
        .map(|_| random_sparse_distribution(rng, m, 0.2))
        .collect();
    Profile::new(peaks).expect("n >= 1, m >= 2")
}

/// A single-minded profile with agent `i` supporting `choices[i]`.
pub fn single_minded_profile(m: usize, choices: &[usize]) -> Profile {
    Profile::new(
        choices
            .iter()
            .map(|&j| Distribution::vertex(m, j))
            .collect(),
    )
    .expect("valid vertices")
}

/// Every single-minded profile with `n` agents over `m` alternatives, in
/// lexicographic order of the choice vectors.
pub fn all_single_minded(n: usize, m: usize) -> impl Iterator<Item = Profile> {
    let total = (m as u64).pow(n as u32);
    (0..total).map(move |mut code| {
        let mut choices = alloc::vec![0; n];
        for c in choices.iter_mut().rev() {
            *c = (code % m as u64) as usize;
            code /= m as u64;
        }
        single_minded_profile(m, &choices)
    })
}
