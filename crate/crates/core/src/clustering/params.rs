use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterParams {
    pub k: usize,
    /// Penalty for each cannot-link pair sharing a cluster.
    pub w_c: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Stop once no centroid moves farther than this (Euclidean).
    pub tol: f64,
    /// L2-normalize embeddings before clustering.
    #[serde(default)]
    pub normalize: bool,
}

impl Default for ClusterParams {
    fn default() -> Self {
        ClusterParams {
            k: 150,
            w_c: 0.01,
            max_iter: 100,
            seed: 0,
            tol: 1e-6,
            normalize: false,
        }
    }
}

impl ClusterParams {
    /// Best configuration reported for the immigration corpus.
    pub fn immigration() -> Self {
        ClusterParams {
            k: 150,
            w_c: 0.01,
            ..Default::default()
        }
    }

    /// Best configuration reported for the gun-control corpus.
    pub fn gun_control() -> Self {
        ClusterParams {
            k: 200,
            w_c: 0.1,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidParams("k must be at least 1".into()));
        }
        if !(self.w_c >= 0.0 && self.w_c.is_finite()) {
            return Err(Error::InvalidParams(format!("w_c must be finite and non-negative, got {}", self.w_c)));
        }
        if self.max_iter < 1 {
            return Err(Error::InvalidParams("max_iter must be at least 1".into()));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::InvalidParams(format!("tol must be non-negative, got {}", self.tol)));
        }
        Ok(())
    }
}
