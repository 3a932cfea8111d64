//! Experiment configuration: one JSON document, overridden field by field
//! from the command line.
//!
//! Precedence, lowest first: built-in defaults, the `--config` file, command
//! line flags. The merged configuration is written to every output directory
//! in canonical form, and its SHA-256 is the config hash of the manifests.

use std::path::{Path, PathBuf};

use dlattice::amen::Transport;
use dlattice::geometry::{SpaceKind, MAX_HYPERBOLIC_WINDOW};
use dlattice::pointproc::ProcessKind;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Experiments known to `run`.
pub const EXPERIMENTS: [&str; 10] =
    ["speed", "degree", "cellvol", "tail", "d1d2", "percolation", "folner", "mtp", "isoperimetric", "ballgrowth"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Experiment driven by `run`; one of [`EXPERIMENTS`].
    pub experiment: Option<String>,
    pub space: SpaceKind,
    pub process: ProcessKind,
    pub window_radius: f64,
    pub replicas: u64,
    pub seed: u64,
    /// Walk checkpoints; walks run to the largest one.
    pub steps: Vec<usize>,
    /// Coarse intensities for `d1d2`, `percolation` and `folner`.
    pub delta_grid: Vec<f64>,
    /// Radii for `tail` and graph radii for `ballgrowth`.
    pub r_grid: Vec<f64>,
    /// Containment factors for `ballgrowth`.
    pub t_grid: Vec<f64>,
    /// Transport for `mtp`; all registry transports when absent.
    pub transport: Option<String>,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: None,
            space: SpaceKind::HyperbolicPoincareDisk,
            process: ProcessKind::PalmPoisson { lambda: 1.0 },
            window_radius: 8.0,
            replicas: 100,
            seed: 0,
            steps: vec![2000],
            delta_grid: vec![0.1, 0.03, 0.01, 0.003],
            r_grid: vec![2.0, 3.0, 4.0],
            t_grid: vec![0.5, 1.0, 1.5, 2.0, 2.5, 3.0],
            transport: None,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::config(format!("malformed config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Pretty JSON in declaration order with a trailing newline; parsing it
    /// back and re-serializing gives the same bytes.
    pub fn canonical_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    /// Lowercase hex SHA-256 of [`Self::canonical_json`].
    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical_json().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Intensity of a Poisson process config.
    pub fn lambda(&self) -> Result<f64, CliError> {
        self.process.intensity().ok_or_else(|| {
            CliError::config(format!("process.kind must be poisson or palm_poisson, got {}", self.process.name()))
        })
    }

    pub fn transports(&self) -> Result<Vec<Transport>, CliError> {
        match &self.transport {
            None => Ok(Transport::ALL.to_vec()),
            Some(name) => {
                name.parse::<Transport>().map(|t| vec![t]).map_err(|e| CliError::config(format!("transport: {e}")))
            }
        }
    }

    /// Field-level checks shared by every subcommand. Errors name the field.
    pub fn validate(&self) -> Result<(), CliError> {
        match self.process {
            ProcessKind::Poisson { lambda } | ProcessKind::PalmPoisson { lambda } => {
                if !(lambda > 0.0 && lambda.is_finite()) {
                    return Err(CliError::config(format!("process.lambda must be positive and finite, got {lambda}")));
                }
            }
            ProcessKind::KacGaf { degree } => {
                if degree < 1 {
                    return Err(CliError::config("process.degree must be at least 1, got 0"));
                }
                if !self.space.is_hyperbolic() {
                    return Err(CliError::config("process.kind kac_gaf requires space hyperbolic"));
                }
            }
        }
        if !(self.window_radius > 0.0 && self.window_radius.is_finite()) {
            return Err(CliError::config(format!(
                "window_radius must be positive and finite, got {}",
                self.window_radius
            )));
        }
        if self.space.is_hyperbolic() && self.window_radius > MAX_HYPERBOLIC_WINDOW {
            return Err(CliError::config(format!(
                "window_radius {} exceeds the hyperbolic cap {MAX_HYPERBOLIC_WINDOW}",
                self.window_radius
            )));
        }
        if self.replicas == 0 {
            return Err(CliError::config("replicas must be at least 1"));
        }
        if self.steps.is_empty() || self.steps.contains(&0) {
            return Err(CliError::config("steps must be a nonempty list of positive step counts"));
        }
        for (field, grid) in [("delta_grid", &self.delta_grid), ("r_grid", &self.r_grid), ("t_grid", &self.t_grid)] {
            if grid.is_empty() || grid.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
                return Err(CliError::config(format!("{field} must be a nonempty list of positive numbers")));
            }
        }
        self.transports()?;
        if let Some(name) = &self.experiment {
            if !EXPERIMENTS.contains(&name.as_str()) {
                return Err(CliError::config(format!(
                    "experiment: unknown experiment {name:?}; expected one of {}",
                    EXPERIMENTS.join(", ")
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_byte_identically() {
        let c = ExperimentConfig::default();
        let text = c.canonical_json();
        let back = ExperimentConfig::from_json(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.canonical_json(), text);
        assert_eq!(back.hash(), c.hash());
        assert_eq!(c.hash().len(), 64);
    }

    #[test]
    fn partial_documents_fill_defaults() {
        let c = ExperimentConfig::from_json(r#"{"space": "euclidean", "replicas": 7}"#).unwrap();
        assert_eq!(c.space, SpaceKind::EuclideanPlane);
        assert_eq!(c.replicas, 7);
        assert_eq!(c.window_radius, ExperimentConfig::default().window_radius);
    }

    #[test]
    fn unknown_fields_are_config_errors() {
        let err = ExperimentConfig::from_json(r#"{"windw_radius": 3}"#).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn nonpositive_intensity_names_the_field() {
        let c = ExperimentConfig { process: ProcessKind::Poisson { lambda: -1.0 }, ..Default::default() };
        let err = c.validate().unwrap_err();
        assert!(err.to_string().contains("process.lambda"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn hyperbolic_window_cap_is_enforced() {
        let c = ExperimentConfig { window_radius: 13.0, ..Default::default() };
        assert!(c.validate().unwrap_err().to_string().contains("window_radius"));
    }
}
