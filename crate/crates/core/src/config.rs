//! JSON experiment files.
//!
//! ```json
//! {
//!   "label": "SupSyS d=10",
//!   "run": {
//!     "objective": "rastrigin",
//!     "dim": 10,
//!     "meta": { "variant": "SupSyS", "alpha_mu": 0.01, "alpha_sigma": 0.005 },
//!     "baseline": { "kind": "decaying", "gamma": 0.1 },
//!     "mu0_range": 3.2,
//!     "sigma0": 2.0,
//!     "max_evaluations": 40000,
//!     "target_reward": -10.0,
//!     "base_seed": 1,
//!     "run_count": 50
//!   },
//!   "grid": { "alpha_mu": [0.001, 0.01], "alpha_sigma": [0.001, 0.01],
//!             "metric": "median_evals_to_target", "runs_per_cell": 20 }
//! }
//! ```
//!
//! Unknown keys are rejected and errors carry the dotted path of the
//! offending key.

use serde::{Deserialize, Serialize};

use crate::error::{PgpeError, Result};
use crate::harness::{GridSpec, RunConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub run: RunConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
}

impl ExperimentFile {
    pub fn new(run: RunConfig) -> Self {
        Self {
            label: None,
            run,
            grid: None,
        }
    }

    /// Parses and validates an experiment document.
    pub fn parse(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: ExperimentFile = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            PgpeError::Config {
                key: if path == "." || path == "?" { "<document>".into() } else { path },
                message: e.into_inner().to_string(),
            }
        })?;
        file.validate()?;
        Ok(file)
    }

    pub fn validate(&self) -> Result<()> {
        self.run.validate().map_err(|e| match e {
            PgpeError::Config { key, message } => PgpeError::Config {
                key: format!("run.{key}"),
                message,
            },
            other => other,
        })?;
        if let Some(grid) = &self.grid {
            grid.validate()?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("experiment files always serialize");
        text.push('\n');
        text
    }

    /// Display label, defaulting to the variant name.
    pub fn label(&self) -> String {
        self.label
            .clone()
            .unwrap_or_else(|| self.run.meta.variant.name().to_string())
    }
}
