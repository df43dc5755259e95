use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::network::RewireRule;

/// Model constants for one run.
///
/// Defaults are the baseline alliance network: 50 individuals with three
/// outgoing links each, 20% of status shared per step, and a 50% chance of
/// rewiring the least valuable link each step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    /// Number of individuals.
    pub n: usize,
    /// Outgoing links held by every individual.
    pub lambda: usize,
    /// Fraction of an individual's status pooled into its links each step.
    pub r: f64,
    /// Inequality: fraction of a link's status assigned to its target.
    pub q: f64,
    /// Per-step probability that an individual rewires its least valued link.
    pub w: f64,
    pub steps: u64,
    pub seed: u64,
    /// Who counts as already linked when choosing a new target.
    pub rewire_rule: RewireRule,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            n: 50,
            lambda: 3,
            r: 0.2,
            q: 0.5,
            w: 0.5,
            steps: 100_000,
            seed: 0,
            rewire_rule: RewireRule::EitherDirection,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.n < 2 {
            return Err(ModelError::InvalidParams(format!(
                "n must be at least 2 (got {})",
                self.n
            )));
        }
        if self.lambda == 0 || self.lambda > self.n - 1 {
            return Err(ModelError::InvalidParams(format!(
                "lambda must satisfy 1 <= lambda <= n - 1 = {} (got {})",
                self.n - 1,
                self.lambda
            )));
        }
        // u32 degree counters.
        if self.n > u32::MAX as usize {
            return Err(ModelError::InvalidParams(format!(
                "n too large ({})",
                self.n
            )));
        }
        for (name, value) in [("r", self.r), ("q", self.q), ("w", self.w)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ModelError::InvalidParams(format!(
                    "{name} must lie in [0, 1] (got {value})"
                )));
            }
        }
        Ok(())
    }
}
