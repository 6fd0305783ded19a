//! Run configuration: a flat JSON object whose keys mirror the command-line flags.

use std::path::{Path, PathBuf};

use nodal_census::census::{GridParams, Observable};
use nodal_census::ensemble::{EnsembleFamily, EnsembleKind, Psi, PsiDescriptor};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Predict,
    Simulate,
    Goe,
    Barrier,
    Validate,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Predict => "predict",
            Self::Simulate => "simulate",
            Self::Goe => "goe",
            Self::Barrier => "barrier",
            Self::Validate => "validate",
        }
    }
}

/// Every key is optional in a file; flags fill or override them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<EnsembleKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_list: Option<Vec<usize>>,
    /// Rescaling exponent of a prescribed family.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Limit profile of a prescribed family.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi: Option<PsiDescriptor>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    /// GOE Monte-Carlo samples.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observable: Option<Observable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slice_experiment: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_factor: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_resolution: Option<usize>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub goe_n: Option<usize>,
    #[serde(rename = "B", skip_serializing_if = "Option::is_none")]
    pub goe_b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary_samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quick: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Per-trial CSV output.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    /// JSON report output; stdout always receives a copy.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($field:ident),*) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field; } )*
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("invalid config: {e}")))
    }

    #[cfg(test)]
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Values set in `top` replace those in `self`.
    pub fn overlay(mut self, top: RunConfig) -> Self {
        overlay!(self, top; command, kind, n, d, d_list, lambda, psi, seed, trials, samples, observable,
            slice_experiment, grid_factor, grid_resolution, goe_n, goe_b, band, radius, boundary_samples,
            quick, threads, csv, json);
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    /// `d_list` when present, else `[d]`.
    pub fn degrees(&self) -> Result<Vec<usize>, CliError> {
        match (&self.d_list, self.d) {
            (Some(list), _) if list.is_empty() => Err(CliError::Usage("d_list must be nonempty".into())),
            (Some(list), _) => Ok(list.clone()),
            (None, Some(d)) => Ok(vec![d]),
            (None, None) => Err(CliError::Usage("a degree is required (--d or --d-list)".into())),
        }
    }

    pub fn sphere_dim(&self) -> Result<u32, CliError> {
        self.n.ok_or_else(|| CliError::Usage("sphere dimension --n is required".into()))
    }

    pub fn family(&self) -> Result<EnsembleFamily, CliError> {
        let kind = self.kind.ok_or_else(|| CliError::Usage("ensemble --kind is required".into()))?;
        Ok(match kind {
            EnsembleKind::Kostlan => EnsembleFamily::Kostlan,
            EnsembleKind::Rfs => EnsembleFamily::Rfs,
            EnsembleKind::Harmonic => EnsembleFamily::Harmonic,
            EnsembleKind::Prescribed => {
                let desc = self
                    .psi
                    .as_ref()
                    .ok_or_else(|| CliError::Usage("a prescribed ensemble needs a psi descriptor".into()))?;
                let lambda = self
                    .lambda
                    .ok_or_else(|| CliError::Usage("a prescribed ensemble needs --lambda".into()))?;
                EnsembleFamily::Prescribed { psi: Psi::from_descriptor(desc)?, lambda }
            }
        })
    }

    pub fn grid(&self) -> GridParams {
        let default = GridParams::default();
        GridParams { factor: self.grid_factor.unwrap_or(default.factor), resolution: self.grid_resolution }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_identity() {
        let text = r#"{
            "command": "simulate", "kind": "prescribed", "n": 2, "d_list": [8, 12],
            "lambda": 1.0, "psi": {"type": "indicator", "params": {"lo": 0.0, "hi": 1.0}},
            "seed": 9, "trials": 40, "observable": "nodal_components", "grid_factor": 10,
            "N": 3, "B": 0.5, "band": [0.7, 1.0], "quick": true, "csv": "out.csv"
        }"#;
        let a = RunConfig::from_json(text).unwrap();
        let b = RunConfig::from_json(&a.to_json()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(RunConfig::from_json("{}").unwrap(), RunConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_json(r#"{"degree": 3}"#).is_err());
    }

    #[test]
    fn overlay_prefers_the_top_layer() {
        let base = RunConfig { d: Some(5), seed: Some(1), trials: Some(10), ..Default::default() };
        let top = RunConfig { seed: Some(2), ..Default::default() };
        let merged = base.overlay(top);
        assert_eq!((merged.d, merged.seed(), merged.trials), (Some(5), 2, Some(10)));
        assert_eq!(RunConfig::default().seed(), 0);
    }

    #[test]
    fn degree_and_family_resolution() {
        let c = RunConfig { d: Some(4), d_list: Some(vec![]), ..Default::default() };
        assert!(c.degrees().is_err());
        let c = RunConfig { d: Some(4), ..Default::default() };
        assert_eq!(c.degrees().unwrap(), vec![4]);
        let c = RunConfig { kind: Some(EnsembleKind::Prescribed), ..Default::default() };
        assert!(c.family().is_err());
    }
}
