use powervac::metrics::{
    self, classify_phase, DegreeHistogram, MetricsConfig, PhaseLabel, PowerLawFit, RunSummary,
};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub exponent: f64,
    pub r_squared: f64,
    pub x_min: usize,
    pub x_max: usize,
    pub bins: usize,
}

impl From<PowerLawFit> for FitReport {
    fn from(f: PowerLawFit) -> Self {
        Self {
            exponent: f.exponent,
            r_squared: f.r_squared,
            x_min: f.x_min,
            x_max: f.x_max,
            bins: f.bins,
        }
    }
}

/// Scalar metrics of one run, as written to `summary.json` by `run` and
/// `analysis.json` by `analyze`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub steps: u64,
    pub count_distribution: Vec<u64>,
    /// Fractions of steps with 0, 1, 2 and 3 or more above threshold.
    pub count_fractions: [f64; 4],
    pub new_leaders: usize,
    pub window_new_leaders: usize,
    pub episodes: usize,
    pub distinct_leaders: usize,
    pub mean_tenure: f64,
    pub median_tenure: f64,
    pub replacement_lags: usize,
    pub median_lag: Option<f64>,
    pub max_drift: f64,
    pub phase: PhaseLabel,
    pub histogram_samples: u64,
    pub fit: Option<FitReport>,
    pub fit_error: Option<String>,
}

impl MetricsReport {
    /// `fit_range` overrides the default range derived from `lambda`.
    pub fn build(
        summary: &RunSummary,
        hist: &DegreeHistogram,
        lambda: usize,
        fit_range: Option<(usize, usize)>,
        cfg: &MetricsConfig,
    ) -> Self {
        let (lo, hi) = fit_range.unwrap_or_else(|| metrics::default_fit_range(hist, lambda));
        let fit = metrics::fit_power_law(hist, lo, hi);
        let mut count_distribution = summary.count_distribution.clone();
        while count_distribution.len() > 1 && count_distribution.last() == Some(&0) {
            count_distribution.pop();
        }
        Self {
            steps: summary.steps,
            count_distribution,
            count_fractions: summary.count_fractions4(),
            new_leaders: summary.new_leaders,
            window_new_leaders: summary.window_new_leaders,
            episodes: summary.episodes.len(),
            distinct_leaders: summary.distinct_leaders(),
            mean_tenure: summary.mean_tenure(),
            median_tenure: summary.median_tenure(),
            replacement_lags: summary.replacement_lags.len(),
            median_lag: (!summary.replacement_lags.is_empty()).then(|| summary.median_lag()),
            max_drift: summary.max_drift,
            phase: classify_phase(summary, cfg),
            histogram_samples: hist.sample_count(),
            fit: fit.as_ref().ok().map(|f| FitReport::from(*f)),
            fit_error: fit.err().map(|e| e.to_string()),
        }
    }
}
