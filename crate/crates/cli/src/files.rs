//! The JSON profile format.

use std::fs;
use std::path::Path;

use portionforge_core::{Distribution, Profile, UtilityModel};
use serde::{Deserialize, Serialize};

use crate::{CliError, CliResult};

/// `{"m": 3, "model": "leontief", "agents": [[0.5, 0.5, 0.0], ...]}`.
///
/// Rows must be nonnegative and sum to one within `1e-9`; they are
/// renormalized when converted to a [`Profile`]. Floats are written in
/// shortest round-trip form, so writing and reading reproduces the rows
/// bit for bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileFile {
    pub m: usize,
    pub model: String,
    pub agents: Vec<Vec<f64>>,
}

impl ProfileFile {
    pub fn from_profile(profile: &Profile, model: UtilityModel) -> Self {
        ProfileFile {
            m: profile.m(),
            model: model.tag().into(),
            agents: profile
                .peaks()
                .iter()
                .map(|p| p.as_slice().to_vec())
                .collect(),
        }
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let file: ProfileFile = serde_json::from_str(text)
            .map_err(|e| CliError::Usage(format!("malformed profile: {e}")))?;
        file.validate()?;
        Ok(file)
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile files serialize")
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        fs::write(path, self.to_json() + "\n").map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn model(&self) -> CliResult<UtilityModel> {
        self.model
            .parse()
            .map_err(|e: portionforge_core::Error| CliError::Usage(e.to_string()))
    }

    pub fn profile(&self) -> CliResult<Profile> {
        let peaks = self
            .agents
            .iter()
            .enumerate()
            .map(|(i, row)| {
                Distribution::new(row.clone())
                    .map_err(|e| CliError::Usage(format!("agent {i}: {e}")))
            })
            .collect::<CliResult<Vec<_>>>()?;
        Ok(Profile::new(peaks)?)
    }

    fn validate(&self) -> CliResult<()> {
        self.model()?;
        if self.agents.is_empty() {
            return Err(CliError::Usage("a profile needs at least one agent".into()));
        }
        if let Some((i, row)) = self
            .agents
            .iter()
            .enumerate()
            .find(|(_, r)| r.len() != self.m)
        {
            return Err(CliError::Usage(format!(
                "agent {i} has {} entries, expected m = {}",
                row.len(),
                self.m
            )));
        }
        self.profile().map(|_| ())
    }
}
