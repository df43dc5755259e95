//! Seeded parameter grids with independent replicates.
//!
//! Rows are laid out as the Cartesian product of the axes in declaration
//! order (first axis slowest), with replicates innermost. Row `k` runs with
//! seed `splitmix64(master_seed ^ k)`, so results never depend on how many
//! workers ran the grid or in which order rows finished.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{self, classify_phase, MetricsConfig, PhaseLabel, RunMetrics};
use crate::params::ModelParams;
use crate::rng::derive_run_seed;
use crate::simulate::simulate;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("axis {axis}: value {value} is out of range ({reason})")]
    InvalidRange {
        axis: Param,
        value: f64,
        reason: &'static str,
    },
    #[error("replicates must be at least 1")]
    NoReplicates,
    #[error("axis {0} is declared twice")]
    DuplicateAxis(Param),
    #[error("axis {0} has no values")]
    EmptyAxis(Param),
    #[error("grid too large")]
    TooLarge,
    #[error("invalid metrics configuration: {0}")]
    Metrics(String),
    #[error("failed to start worker pool: {0}")]
    Pool(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Param {
    N,
    Lambda,
    R,
    Q,
    W,
    Steps,
}

impl Param {
    pub fn name(&self) -> &'static str {
        match self {
            Param::N => "n",
            Param::Lambda => "lambda",
            Param::R => "r",
            Param::Q => "q",
            Param::W => "w",
            Param::Steps => "steps",
        }
    }

    fn check(&self, value: f64) -> Result<(), &'static str> {
        let integral = value.is_finite() && value.fract() == 0.0;
        match self {
            Param::R | Param::Q | Param::W if !(0.0..=1.0).contains(&value) => {
                Err("must lie in [0, 1]")
            }
            Param::N if !(integral && value >= 2.0) => Err("must be an integer >= 2"),
            Param::Lambda if !(integral && value >= 1.0) => Err("must be an integer >= 1"),
            Param::Steps if !(integral && value >= 0.0) => Err("must be a non-negative integer"),
            _ => Ok(()),
        }
    }

    fn apply(&self, params: &mut ModelParams, value: f64) {
        match self {
            Param::N => params.n = value as usize,
            Param::Lambda => params.lambda = value as usize,
            Param::R => params.r = value,
            Param::Q => params.q = value,
            Param::W => params.w = value,
            Param::Steps => params.steps = value as u64,
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Param {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            Param::N,
            Param::Lambda,
            Param::R,
            Param::Q,
            Param::W,
            Param::Steps,
        ]
        .into_iter()
        .find(|p| p.name() == s)
        .ok_or_else(|| format!("unknown sweep parameter {s:?}"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub param: Param,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub base: ModelParams,
    pub axes: Vec<Axis>,
    pub replicates: usize,
    pub master_seed: u64,
    pub metrics: MetricsConfig,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            base: ModelParams::default(),
            axes: Vec::new(),
            replicates: 1,
            master_seed: 0,
            metrics: MetricsConfig::default(),
        }
    }
}

impl SweepConfig {
    /// Number of rows the grid expands to.
    pub fn row_count(&self) -> Result<usize, SweepError> {
        self.axes
            .iter()
            .try_fold(self.replicates, |acc, a| acc.checked_mul(a.values.len()))
            .ok_or(SweepError::TooLarge)
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        if self.replicates == 0 {
            return Err(SweepError::NoReplicates);
        }
        self.metrics
            .validate()
            .map_err(|e| SweepError::Metrics(e.to_string()))?;
        for (k, axis) in self.axes.iter().enumerate() {
            if self.axes[..k].iter().any(|a| a.param == axis.param) {
                return Err(SweepError::DuplicateAxis(axis.param));
            }
            if axis.values.is_empty() {
                return Err(SweepError::EmptyAxis(axis.param));
            }
            for &value in &axis.values {
                axis.param
                    .check(value)
                    .map_err(|reason| SweepError::InvalidRange {
                        axis: axis.param,
                        value,
                        reason,
                    })?;
            }
        }
        self.row_count().map(|_| ())
    }
}

/// One row of an expanded grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridRow {
    pub index: usize,
    /// Index of the parameter point, shared by its replicates.
    pub point: usize,
    pub replicate: usize,
    /// Resolved parameters; `params.seed` is the row's run seed.
    pub params: ModelParams,
}

impl GridRow {
    pub fn seed(&self) -> u64 {
        self.params.seed
    }
}

/// Expands the grid in lexicographic axis order with replicates innermost.
pub fn expand_grid(config: &SweepConfig) -> Result<Vec<GridRow>, SweepError> {
    config.validate()?;
    let total = config.row_count()?;
    let mut rows = Vec::with_capacity(total);
    for index in 0..total {
        let point = index / config.replicates;
        let replicate = index % config.replicates;
        let mut params = config.base;
        let mut rest = point;
        for axis in config.axes.iter().rev() {
            let k = rest % axis.values.len();
            rest /= axis.values.len();
            axis.param.apply(&mut params, axis.values[k]);
        }
        params.seed = derive_run_seed(config.master_seed, index as u64);
        rows.push(GridRow {
            index,
            point,
            replicate,
            params,
        });
    }
    Ok(rows)
}

/// Per-run summary stored in a sweep row.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub new_leaders: usize,
    pub mean_tenure: f64,
    pub median_tenure: f64,
    /// Fractions of steps with 0, 1, 2 and 3 or more above threshold.
    pub count_fractions: [f64; 4],
    pub exponent: Option<f64>,
    pub phase: PhaseLabel,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub row: GridRow,
    pub outcome: Result<RunOutcome, String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// Rows grouped by parameter point, in point order.
    pub fn points(&self) -> Vec<Vec<&SweepRow>> {
        let mut groups: Vec<Vec<&SweepRow>> = Vec::new();
        for row in &self.rows {
            if groups.len() <= row.row.point {
                groups.resize_with(row.row.point + 1, Vec::new);
            }
            groups[row.row.point].push(row);
        }
        groups
    }
}

/// Runs one parameter set through the simulator and the streaming metrics.
pub fn run_one(params: &ModelParams, cfg: &MetricsConfig) -> Result<RunOutcome, String> {
    params.validate().map_err(|e| e.to_string())?;
    let mut observer = RunMetrics::new(params.n, params.steps, *cfg);
    simulate(params, &mut [&mut observer]).map_err(|e| e.to_string())?;
    let (summary, histogram) = observer.finish();
    let (lo, hi) = metrics::default_fit_range(&histogram, params.lambda);
    let exponent = metrics::fit_power_law(&histogram, lo, hi)
        .ok()
        .map(|fit| fit.exponent);
    Ok(RunOutcome {
        new_leaders: summary.new_leaders,
        mean_tenure: summary.mean_tenure(),
        median_tenure: summary.median_tenure(),
        count_fractions: summary.count_fractions4(),
        exponent,
        phase: classify_phase(&summary, cfg),
    })
}

/// Runs every row on `workers` threads. Invalid rows are reported in place.
pub fn run_sweep(config: &SweepConfig, workers: usize) -> Result<SweepResult, SweepError> {
    let grid = expand_grid(config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| SweepError::Pool(e.to_string()))?;
    let rows = pool.install(|| {
        grid.par_iter()
            .map(|row| SweepRow {
                row: *row,
                outcome: run_one(&row.params, &config.metrics),
            })
            .collect()
    });
    Ok(SweepResult { rows })
}
