//! A common interface over the aggregation rules.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;

use crate::error::{Error, Result};
use crate::model::{mean_rule, Distribution, Profile};
use crate::onedim::uniform_phantom_profile;
use crate::phantoms::{capped_nearest, independent_markets};
use crate::welfare::{nash_optimize, utilitarian_l1, utilitarian_l1_detailed, DEFAULT_TOL};

/// A rule mapping a profile to a distribution.
pub trait Mechanism: Sync {
    fn name(&self) -> &str;

    fn aggregate(&self, profile: &Profile) -> Result<Distribution>;

    /// Whether the output on `profile` was picked among several optima.
    fn has_tie(&self, _profile: &Profile) -> bool {
        false
    }
}

impl<M: Mechanism + ?Sized> Mechanism for &M {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn aggregate(&self, profile: &Profile) -> Result<Distribution> {
        (**self).aggregate(profile)
    }
    fn has_tie(&self, profile: &Profile) -> bool {
        (**self).has_tie(profile)
    }
}

impl<M: Mechanism + ?Sized> Mechanism for Box<M> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn aggregate(&self, profile: &Profile) -> Result<Distribution> {
        (**self).aggregate(profile)
    }
    fn has_tie(&self, profile: &Profile) -> bool {
        (**self).has_tie(profile)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Mean;

impl Mechanism for Mean {
    fn name(&self) -> &str {
        "mean"
    }
    fn aggregate(&self, profile: &Profile) -> Result<Distribution> {
        Ok(mean_rule(profile))
    }
}

/// Uniform phantom rule; two alternatives only.
#[derive(Clone, Copy, Debug, Default)]
pub struct UniformPhantom;

impl Mechanism for UniformPhantom {
    fn name(&self) -> &str {
        "uniform-phantom"
    }
    fn aggregate(&self, profile: &Profile) -> Result<Distribution> {
        uniform_phantom_profile(profile)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct IndependentMarkets;

impl Mechanism for IndependentMarkets {
    fn name(&self) -> &str {
        "independent-markets"
    }
    fn aggregate(&self, profile: &Profile) -> Result<Distribution> {
        independent_markets(profile)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Nash {
    pub tol: f64,
}

impl Default for Nash {
    fn default() -> Self {
        Nash { tol: DEFAULT_TOL }
    }
}

impl Mechanism for Nash {
    fn name(&self) -> &str {
        "nash"
    }
    fn aggregate(&self, profile: &Profile) -> Result<Distribution> {
        nash_optimize(profile, self.tol)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct UtilitarianL1;

impl Mechanism for UtilitarianL1 {
    fn name(&self) -> &str {
        "utilitarian-l1"
    }
    fn aggregate(&self, profile: &Profile) -> Result<Distribution> {
        utilitarian_l1(profile)
    }
    fn has_tie(&self, profile: &Profile) -> bool {
        utilitarian_l1_detailed(profile).is_ok_and(|s| s.tied)
    }
}

/// The capped mechanism for a single agent.
#[derive(Clone, Copy, Debug)]
pub struct CappedNearest {
    pub cap: f64,
}

impl Default for CappedNearest {
    fn default() -> Self {
        CappedNearest { cap: 0.9 }
    }
}

impl Mechanism for CappedNearest {
    fn name(&self) -> &str {
        "capped-nearest"
    }
    fn aggregate(&self, profile: &Profile) -> Result<Distribution> {
        if profile.n() != 1 {
            return Err(Error::Incompatible {
                mechanism: self.name().into(),
                reason: format!("defined for a single agent, profile has {}", profile.n()),
            });
        }
        if profile.m() < 3 {
            return Err(Error::Incompatible {
                mechanism: self.name().into(),
                reason: format!("needs at least 3 alternatives, profile has {}", profile.m()),
            });
        }
        capped_nearest(profile.peak(0), self.cap)
    }
}

/// Wraps a closure as a mechanism.
pub struct FnMechanism<F> {
    name: String,
    f: F,
}

impl<F> FnMechanism<F>
where
    F: Fn(&Profile) -> Result<Distribution> + Sync,
{
    pub fn new(name: impl Into<String>, f: F) -> Self {
        FnMechanism {
            name: name.into(),
            f,
        }
    }
}

impl<F> Mechanism for FnMechanism<F>
where
    F: Fn(&Profile) -> Result<Distribution> + Sync,
{
    fn name(&self) -> &str {
        &self.name
    }
    fn aggregate(&self, profile: &Profile) -> Result<Distribution> {
        (self.f)(profile)
    }
}

/// Names accepted by [`by_name`].
pub const MECHANISM_NAMES: [&str; 6] = [
    "nash",
    "uniform-phantom",
    "independent-markets",
    "utilitarian-l1",
    "mean",
    "capped-nearest",
];

/// Looks up a built-in mechanism; `cap` configures `capped-nearest`.
pub fn by_name(name: &str, cap: f64) -> Result<Box<dyn Mechanism>> {
    Ok(match name {
        "nash" => Box::new(Nash::default()),
        "uniform-phantom" => Box::new(UniformPhantom),
        "independent-markets" => Box::new(IndependentMarkets),
        "utilitarian-l1" => Box::new(UtilitarianL1),
        "mean" => Box::new(Mean),
        "capped-nearest" => Box::new(CappedNearest { cap }),
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown mechanism `{other}`"
            )))
        }
    })
}
