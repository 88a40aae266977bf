//! Exact reconstruction of the incompatibility of efficiency,
//! strategyproofness and proportionality under ℓ1 and ℓ∞ preferences.

pub mod chain;
pub mod family;
pub mod gauntlet;
pub mod region;

use core::str::FromStr;

use crate::error::Error;
use crate::model::UtilityModel;

pub use chain::{
    verify_chain, verify_chain_padded, verify_family, Method, ProofReport, ProofStep, StepStatus,
};
pub use family::{
    gen_profiles, gen_profiles_padded, CoordinateBound, RationalProfile, RationalProfileFamily,
};
pub use gauntlet::{
    mechanism_gauntlet, mechanism_gauntlet_padded, GauntletOutcome, GAUNTLET_MARGIN,
};
pub use region::{implies, region_infeasible, region_point, Atom};

/// The two preference models with a certified impossibility.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Metric {
    L1,
    LInf,
}

impl Metric {
    pub fn tag(self) -> &'static str {
        match self {
            Metric::L1 => "l1",
            Metric::LInf => "linf",
        }
    }

    pub fn utility_model(self) -> UtilityModel {
        match self {
            Metric::L1 => UtilityModel::L1,
            Metric::LInf => UtilityModel::LInf,
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(Metric::L1),
            "linf" | "l-inf" => Ok(Metric::LInf),
            other => Err(Error::UnknownModel(other.into())),
        }
    }
}

impl TryFrom<UtilityModel> for Metric {
    type Error = Error;

    fn try_from(model: UtilityModel) -> Result<Self, Error> {
        match model {
            UtilityModel::L1 => Ok(Metric::L1),
            UtilityModel::LInf => Ok(Metric::LInf),
            other => Err(Error::UnknownModel(other.tag().into())),
        }
    }
}
