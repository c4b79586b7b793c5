use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{JcrError, Result};
use crate::harness::clopper_pearson;

/// Confidence level of the reported Clopper–Pearson intervals.
pub const CP_CONFIDENCE: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub method: String,
    pub trials: u64,
    pub hits: u64,
    pub rate: f64,
    pub cp_lo: f64,
    pub cp_hi: f64,
    pub alpha: f64,
    pub seed: u64,
    pub config_digest: String,
}

impl CoverageReport {
    pub fn new(method: &str, trials: u64, hits: u64, alpha: f64, seed: u64, config_digest: &str) -> Result<Self> {
        if hits > trials {
            return Err(JcrError::invalid(format!("{hits} hits in {trials} trials")));
        }
        let (cp_lo, cp_hi) = clopper_pearson(hits, trials, CP_CONFIDENCE)?;
        Ok(Self {
            method: method.to_string(),
            trials,
            hits,
            rate: hits as f64 / trials as f64,
            cp_lo,
            cp_hi,
            alpha,
            seed,
            config_digest: config_digest.to_string(),
        })
    }

    /// Monte-Carlo standard error of the rate.
    pub fn std_error(&self) -> f64 {
        (self.rate * (1.0 - self.rate) / self.trials as f64).sqrt()
    }

    pub fn contains(&self, level: f64) -> bool {
        self.cp_lo <= level && level <= self.cp_hi
    }

    pub fn summary(&self) -> String {
        format!(
            "{}: {}/{} covered, rate {:.4}, 95% CP [{:.4}, {:.4}]",
            self.method, self.hits, self.trials, self.rate, self.cp_lo, self.cp_hi
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// SHA-256 of the canonical JSON serialization, hex encoded.
pub fn digest<T: Serialize + ?Sized>(config: &T) -> String {
    let text = serde_json::to_string(config).expect("config serializes");
    hex::encode(Sha256::digest(text.as_bytes()))
}
