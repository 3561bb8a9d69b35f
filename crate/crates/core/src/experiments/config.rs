use num_complex::Complex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::sampling::{EnsembleSpec, ExactValue};
use crate::scalar::{Scalar, C64};

/// Run configuration, read from JSON with unknown keys rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub ensemble: EnsembleSpec,
    pub n_values: Vec<usize>,
    pub s_max: usize,
    pub trials_lhs: usize,
    pub trials_rhs: usize,
    /// `N`, the Laurent order used for `w_0`.
    pub laurent_order: usize,
    /// Defaults to `3(C+1)(p+2)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_eval: Option<ExactValue>,
    #[serde(default = "default_sigmas")]
    pub tolerance_sigmas: f64,
}

fn default_sigmas() -> f64 {
    3.0
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.ensemble.validate()?;
        if self.n_values.is_empty() || self.n_values.contains(&0) {
            return Err(Error::Config("n_values must be nonempty and positive".into()));
        }
        if self.trials_lhs == 0 || self.trials_rhs == 0 {
            return Err(Error::Config("trial counts must be positive".into()));
        }
        if self.laurent_order < self.s_max + 1 {
            return Err(Error::Config(format!(
                "laurent_order {} must be at least s_max + 1 = {}",
                self.laurent_order,
                self.s_max + 1
            )));
        }
        if !(self.tolerance_sigmas.is_finite() && self.tolerance_sigmas >= 0.0) {
            return Err(Error::Config("tolerance_sigmas must be a nonnegative number".into()));
        }
        Ok(())
    }

    /// Largest configured matrix size.
    pub fn n_max(&self) -> usize {
        *self.n_values.iter().max().unwrap()
    }

    /// `|z_eval|` must clear `2(C+1)(p+2)`; checked by the pointwise experiments.
    pub fn z_eval(&self) -> Result<C64> {
        let h = self.ensemble.norm_bound();
        let z = match &self.z_eval {
            Some(v) => C64::from_exact(&v.0).expect("complex rationals convert"),
            None => Complex::new(3.0 * h, 0.0),
        };
        if z.norm() < 2.0 * h {
            return Err(Error::Config(format!(
                "|z_eval| = {} is below 2(C+1)(p+2) = {}",
                z.norm(),
                2.0 * h
            )));
        }
        Ok(z)
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&canonical).iter().map(|b| format!("{b:02x}")).collect()
    }
}
