//! Budget aggregation: dividing a unit budget among alternatives from the
//! ideal distributions ("peaks") reported by a set of agents.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only pure
//! computation:
//!
//! * [`model`]: distributions, profiles and the utility models
//!   (ℓ1, ℓ2, ℓ∞, Leontief, Leximin-Leontief).
//! * [`onedim`]: generalized medians and the uniform phantom rule for two
//!   alternatives.
//! * [`phantoms`]: moving-phantom mechanisms (independent markets) and the
//!   capped single-agent mechanism.
//! * [`welfare`]: the Nash product rule with its decomposition certificate
//!   and the ℓ1-utilitarian rule.
//! * [`axioms`]: deciders and search-based audits for efficiency, fairness
//!   and incentive properties.
//! * [`impossibility`]: exact rational verification of the
//!   efficiency/strategyproofness/proportionality impossibility chains for
//!   ℓ1 and ℓ∞ preferences.
//! * [`numerics`]: rationals, max-flow, Fourier–Motzkin, a dense simplex
//!   solver and the brute-force grid oracle.
//!
//! IO, file formats and the command-line tool live in the `portionforge`
//! crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod axioms;
pub mod error;
pub mod impossibility;
pub mod mechanism;
pub mod model;
pub mod numerics;
pub mod onedim;
pub mod phantoms;
pub mod sampling;
pub mod welfare;

pub use error::{Error, Result};
pub use mechanism::Mechanism;
pub use model::{Distribution, Profile, UtilityModel};
