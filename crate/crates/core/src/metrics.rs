//! Observables of a run: leaders, threshold counts, tenure episodes,
//! turnover, in-degree histograms, power-law fits and phase labels.
//!
//! Individual ids are 0-based.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::MetricsError;
use crate::network::{NetworkState, RewireEvent};
use crate::simulate::Observer;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    /// Status level an individual must strictly exceed to count as a leader.
    pub threshold: f64,
    /// A leader is new when absent from the last `leader_memory` distinct
    /// leaders (the outgoing one included).
    pub leader_memory: usize,
    /// Episodes with a shorter tenure are dropped.
    pub episode_min_steps: u64,
    pub histogram_sample_period: u64,
    /// Below this fraction of steps with anyone above threshold a run has no leader.
    pub p_lead: f64,
    /// Trailing fraction of the run used for phase classification.
    pub stability_window: f64,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            threshold: 3.0,
            leader_memory: 2,
            episode_min_steps: 0,
            histogram_sample_period: 1,
            p_lead: 0.5,
            stability_window: 0.8,
        }
    }
}

impl MetricsConfig {
    pub fn validate(&self) -> Result<(), MetricsError> {
        let bad = |msg: String| Err(MetricsError::InvalidConfig(msg));
        if !(self.threshold > 1.0 && self.threshold.is_finite()) {
            return bad(format!("threshold must exceed 1 (got {})", self.threshold));
        }
        if self.leader_memory < 1 {
            return bad("leader_memory must be at least 1".into());
        }
        if self.histogram_sample_period < 1 {
            return bad("histogram_sample_period must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.p_lead) {
            return bad(format!("p_lead must lie in [0, 1] (got {})", self.p_lead));
        }
        if !(self.stability_window > 0.0 && self.stability_window <= 1.0) {
            return bad(format!(
                "stability_window must lie in (0, 1] (got {})",
                self.stability_window
            ));
        }
        Ok(())
    }
}

/// Highest-status individual, lowest id on ties.
pub fn leader_of(statuses: &[f64]) -> (usize, f64) {
    let mut best = (0, statuses[0]);
    for (i, &s) in statuses.iter().enumerate().skip(1) {
        if s > best.1 {
            best = (i, s);
        }
    }
    best
}

/// Individuals with status strictly above `threshold`.
pub fn count_above(statuses: &[f64], threshold: f64) -> usize {
    statuses.iter().filter(|&&s| s > threshold).count()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRecord {
    pub step: u64,
    pub leader: usize,
    pub leader_status: f64,
    pub count_above: usize,
    pub total_status: f64,
}

impl StepRecord {
    pub fn from_statuses(step: u64, statuses: &[f64], threshold: f64) -> Self {
        let (leader, leader_status) = leader_of(statuses);
        Self {
            step,
            leader,
            leader_status,
            count_above: count_above(statuses, threshold),
            total_status: statuses.iter().sum(),
        }
    }
}

/// One stretch above threshold by an individual that held top status
/// during it.
///
/// `above_to` is exclusive: the first step at or below threshold, or one past
/// the last observed step when the run ended first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LeaderEpisode {
    pub individual: usize,
    pub rise_step: u64,
    pub above_from: u64,
    pub above_to: u64,
    pub tenure_above: u64,
}

/// Streaming episode detection over per-step statuses.
#[derive(Clone, Debug)]
pub struct EpisodeDetector {
    threshold: f64,
    min_steps: u64,
    above_since: Vec<Option<u64>>,
    rise: Vec<Option<u64>>,
    last_step: Option<u64>,
    episodes: Vec<LeaderEpisode>,
}

impl EpisodeDetector {
    pub fn new(n: usize, threshold: f64, min_steps: u64) -> Self {
        Self {
            threshold,
            min_steps,
            above_since: vec![None; n],
            rise: vec![None; n],
            last_step: None,
            episodes: Vec::new(),
        }
    }

    /// Feeds one step; returns how many episodes closed at it.
    pub fn observe(&mut self, step: u64, statuses: &[f64]) -> usize {
        let before = self.episodes.len();
        let (leader, _) = leader_of(statuses);
        for (i, &s) in statuses.iter().enumerate() {
            if s > self.threshold {
                if self.above_since[i].is_none() {
                    self.above_since[i] = Some(step);
                }
                if i == leader && self.rise[i].is_none() {
                    self.rise[i] = Some(step);
                }
            } else if let Some(from) = self.above_since[i].take() {
                self.close(i, from, step);
            }
        }
        self.last_step = Some(step);
        self.episodes.len() - before
    }

    fn close(&mut self, individual: usize, above_from: u64, above_to: u64) {
        if let Some(rise_step) = self.rise[individual].take() {
            let tenure_above = above_to - rise_step.max(above_from);
            if tenure_above >= self.min_steps {
                self.episodes.push(LeaderEpisode {
                    individual,
                    rise_step,
                    above_from,
                    above_to,
                    tenure_above,
                });
            }
        }
    }

    pub fn closed(&self) -> &[LeaderEpisode] {
        &self.episodes
    }

    /// Closes open stretches at one past the last observed step and returns
    /// all episodes ordered by rise step.
    pub fn finish(mut self) -> Vec<LeaderEpisode> {
        if let Some(last) = self.last_step {
            for i in 0..self.above_since.len() {
                if let Some(from) = self.above_since[i].take() {
                    self.close(i, from, last + 1);
                }
            }
        }
        self.episodes.sort_by_key(|e| (e.rise_step, e.individual));
        self.episodes
    }
}

/// Episodes from a sequence of `(step, statuses)` snapshots at consecutive steps.
pub fn detect_episodes<'a, I>(snapshots: I, cfg: &MetricsConfig) -> Vec<LeaderEpisode>
where
    I: IntoIterator<Item = (u64, &'a [f64])>,
{
    let mut detector: Option<EpisodeDetector> = None;
    for (step, statuses) in snapshots {
        detector
            .get_or_insert_with(|| {
                EpisodeDetector::new(statuses.len(), cfg.threshold, cfg.episode_min_steps)
            })
            .observe(step, statuses);
    }
    detector.map(EpisodeDetector::finish).unwrap_or_default()
}

/// Counts leadership changes that bring in a leader absent from the last
/// `memory` distinct leaders. The first leader counts as new.
pub fn new_leader_count(leaders: &[usize], memory: usize) -> usize {
    let mut tracker = NewLeaderTracker::new(memory);
    for &l in leaders {
        tracker.push(l);
    }
    tracker.count()
}

#[derive(Clone, Debug)]
pub struct NewLeaderTracker {
    memory: usize,
    recent: VecDeque<usize>,
    count: usize,
}

impl NewLeaderTracker {
    pub fn new(memory: usize) -> Self {
        Self {
            memory: memory.max(1),
            recent: VecDeque::with_capacity(memory + 1),
            count: 0,
        }
    }

    /// Feeds the current leader; returns true when it is a new leader.
    pub fn push(&mut self, leader: usize) -> bool {
        if self.recent.front() == Some(&leader) {
            return false;
        }
        let is_new = !self.recent.contains(&leader);
        if is_new {
            self.count += 1;
        }
        self.recent.retain(|&l| l != leader);
        self.recent.push_front(leader);
        self.recent.truncate(self.memory);
        is_new
    }

    pub fn count(&self) -> usize {
        self.count
    }
}

/// Frequencies of in-degree (incoming links) accumulated over sampled steps.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DegreeHistogram {
    counts: Vec<u64>,
    sample_count: u64,
}

impl DegreeHistogram {
    pub fn new() -> Self {
        Self::default()
    }

    /// Rebuilds a histogram from `(in_degree, frequency)` pairs.
    pub fn from_counts(pairs: impl IntoIterator<Item = (usize, u64)>, sample_count: u64) -> Self {
        let mut h = Self {
            counts: Vec::new(),
            sample_count,
        };
        for (x, f) in pairs {
            if h.counts.len() <= x {
                h.counts.resize(x + 1, 0);
            }
            h.counts[x] += f;
        }
        h
    }

    pub fn add_sample(&mut self, in_degrees: impl IntoIterator<Item = usize>) {
        for d in in_degrees {
            if self.counts.len() <= d {
                self.counts.resize(d + 1, 0);
            }
            self.counts[d] += 1;
        }
        self.sample_count += 1;
    }

    pub fn sample_count(&self) -> u64 {
        self.sample_count
    }

    pub fn frequency(&self, x: usize) -> u64 {
        self.counts.get(x).copied().unwrap_or(0)
    }

    /// Non-empty bins in ascending order of in-degree.
    pub fn bins(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &f)| f > 0)
            .map(|(x, &f)| (x, f))
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.bins().last().map(|(x, _)| x)
    }
}

/// Accumulates the in-degree histogram of each state.
pub fn degree_histogram<'a>(states: impl IntoIterator<Item = &'a NetworkState>) -> DegreeHistogram {
    let mut h = DegreeHistogram::new();
    for s in states {
        h.add_sample(s.in_degrees());
    }
    h
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerLawFit {
    /// Slope of log frequency against log in-degree.
    pub exponent: f64,
    pub r_squared: f64,
    pub x_min: usize,
    pub x_max: usize,
    pub bins: usize,
}

/// Least squares line through `(ln x, ln frequency)` for the non-empty bins
/// with `x_min <= x <= x_max` (zero in-degree is never usable).
pub fn fit_power_law(
    hist: &DegreeHistogram,
    x_min: usize,
    x_max: usize,
) -> Result<PowerLawFit, MetricsError> {
    let points: Vec<(f64, f64)> = hist
        .bins()
        .filter(|&(x, _)| x >= x_min.max(1) && x <= x_max)
        .map(|(x, f)| ((x as f64).ln(), (f as f64).ln()))
        .collect();
    if points.len() < 3 {
        return Err(MetricsError::InsufficientData {
            found: points.len(),
        });
    }
    let m = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(PowerLawFit {
        exponent: slope,
        r_squared,
        x_min,
        x_max,
        bins: points.len(),
    })
}

/// Default fit range: from `lambda` (the mean in-degree) up to the last bin
/// before the first run of three or more empty bins, which separates the
/// decaying tail from a leader hump.
pub fn default_fit_range(hist: &DegreeHistogram, lambda: usize) -> (usize, usize) {
    let x_min = lambda.max(1);
    let mut x_max = x_min;
    let mut empty_run = 0;
    let top = hist.max_degree().unwrap_or(0);
    for x in x_min..=top {
        if hist.frequency(x) > 0 {
            x_max = x;
            empty_run = 0;
        } else {
            empty_run += 1;
            if empty_run >= 3 {
                break;
            }
        }
    }
    (x_min, x_max)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PhaseLabel {
    NoLeader,
    TransientSingle,
    StableSingle,
    TransientDouble,
    StableDouble,
}

impl PhaseLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            PhaseLabel::NoLeader => "NO_LEADER",
            PhaseLabel::TransientSingle => "TRANSIENT_SINGLE",
            PhaseLabel::StableSingle => "STABLE_SINGLE",
            PhaseLabel::TransientDouble => "TRANSIENT_DOUBLE",
            PhaseLabel::StableDouble => "STABLE_DOUBLE",
        }
    }
}

impl fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PhaseLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            PhaseLabel::NoLeader,
            PhaseLabel::TransientSingle,
            PhaseLabel::StableSingle,
            PhaseLabel::TransientDouble,
            PhaseLabel::StableDouble,
        ]
        .into_iter()
        .find(|p| p.as_str() == s)
        .ok_or_else(|| format!("unknown phase label {s:?}"))
    }
}

/// Steps from each episode's end until someone is above threshold again.
///
/// `records` must hold consecutive steps. An episode end with nobody above
/// threshold afterwards yields no lag. Fewer than two episodes give nothing.
pub fn replacement_lags(episodes: &[LeaderEpisode], records: &[StepRecord]) -> Vec<u64> {
    if episodes.len() < 2 || records.is_empty() {
        return Vec::new();
    }
    let first = records[0].step;
    let mut ends: Vec<u64> = episodes.iter().map(|e| e.above_to).collect();
    ends.sort_unstable();
    ends.into_iter()
        .filter_map(|end| {
            let start = end.checked_sub(first)? as usize;
            records
                .get(start..)?
                .iter()
                .find(|r| r.count_above > 0)
                .map(|r| r.step - end)
        })
        .collect()
}

pub fn mean(values: &[u64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().map(|&v| v as f64).sum::<f64>() / values.len() as f64
}

/// Median with the midpoint convention for even lengths; 0 when empty.
pub fn median(values: &[u64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_unstable();
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid] as f64
    } else {
        (v[mid - 1] as f64 + v[mid] as f64) / 2.0
    }
}

/// Everything the phase classifier and the sweep need from one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub steps: u64,
    /// `count_distribution[k]` = steps with exactly `k` individuals above threshold.
    pub count_distribution: Vec<u64>,
    /// Same, restricted to the trailing stability window.
    pub window_count_distribution: Vec<u64>,
    /// New leaders over the whole run.
    pub new_leaders: usize,
    /// New leaders counted afresh within the stability window.
    pub window_new_leaders: usize,
    pub episodes: Vec<LeaderEpisode>,
    pub replacement_lags: Vec<u64>,
    pub max_drift: f64,
}

impl RunSummary {
    pub fn tenures(&self) -> Vec<u64> {
        self.episodes.iter().map(|e| e.tenure_above).collect()
    }

    pub fn mean_tenure(&self) -> f64 {
        mean(&self.tenures())
    }

    pub fn median_tenure(&self) -> f64 {
        median(&self.tenures())
    }

    pub fn median_lag(&self) -> f64 {
        median(&self.replacement_lags)
    }

    /// Fraction of steps with exactly `k` individuals above threshold.
    pub fn count_fraction(&self, k: usize) -> f64 {
        fraction(&self.count_distribution, k)
    }

    /// Fractions for 0, 1, 2 and 3 or more above threshold.
    pub fn count_fractions4(&self) -> [f64; 4] {
        let total: u64 = self.count_distribution.iter().sum();
        if total == 0 {
            return [0.0; 4];
        }
        let mut out = [0.0; 4];
        for (k, &c) in self.count_distribution.iter().enumerate() {
            out[k.min(3)] += c as f64;
        }
        out.map(|c| c / total as f64)
    }

    pub fn distinct_leaders(&self) -> usize {
        let mut ids: Vec<usize> = self.episodes.iter().map(|e| e.individual).collect();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    }

    /// Most frequent non-zero count above threshold in the stability window.
    pub fn window_modal_count(&self) -> usize {
        modal_nonzero(&self.window_count_distribution)
    }
}

/// Rebuilds a [`RunSummary`] from stored step records and episodes.
///
/// Distributions are taken over whatever steps `records` holds. Replacement
/// lags need consecutive steps and are left empty otherwise.
pub fn summarize_records(
    records: &[StepRecord],
    episodes: Vec<LeaderEpisode>,
    n: usize,
    total_steps: u64,
    cfg: &MetricsConfig,
) -> RunSummary {
    let window_len = (cfg.stability_window * total_steps as f64).floor() as u64;
    let window_start = total_steps - window_len.min(total_steps);
    let mut count_distribution = vec![0u64; n + 1];
    let mut window_count_distribution = vec![0u64; n + 1];
    let mut leaders = NewLeaderTracker::new(cfg.leader_memory);
    let mut window_leaders = NewLeaderTracker::new(cfg.leader_memory);
    let mut max_drift = 0.0f64;
    for rec in records {
        let k = rec.count_above.min(n);
        count_distribution[k] += 1;
        let in_window = rec.step > window_start;
        if in_window {
            window_count_distribution[k] += 1;
        }
        if rec.count_above > 0 && rec.leader_status > cfg.threshold {
            leaders.push(rec.leader);
            if in_window {
                window_leaders.push(rec.leader);
            }
        }
        max_drift = max_drift.max((rec.total_status - n as f64).abs());
    }
    let consecutive = records.windows(2).all(|w| w[1].step == w[0].step + 1);
    let replacement_lags = if consecutive {
        replacement_lags(&episodes, records)
    } else {
        Vec::new()
    };
    RunSummary {
        steps: records.len() as u64,
        count_distribution,
        window_count_distribution,
        new_leaders: leaders.count(),
        window_new_leaders: window_leaders.count(),
        episodes,
        replacement_lags,
        max_drift,
    }
}

fn fraction(dist: &[u64], k: usize) -> f64 {
    let total: u64 = dist.iter().sum();
    if total == 0 {
        0.0
    } else {
        dist.get(k).copied().unwrap_or(0) as f64 / total as f64
    }
}

fn modal_nonzero(dist: &[u64]) -> usize {
    dist.iter()
        .enumerate()
        .skip(1)
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(k, _)| k)
        .unwrap_or(0)
}

/// Phase of a finished run, judged on the trailing stability window.
///
/// No leader when fewer than `p_lead` of the window's steps have anyone above
/// threshold. Otherwise the modal non-zero count picks single or double, and
/// the run is stable when the window brings in no more new leaders than that
/// modal count.
pub fn classify_phase(summary: &RunSummary, cfg: &MetricsConfig) -> PhaseLabel {
    let dist = &summary.window_count_distribution;
    let total: u64 = dist.iter().sum();
    let led: u64 = dist.iter().skip(1).sum();
    if total == 0 || (led as f64) < cfg.p_lead * total as f64 {
        return PhaseLabel::NoLeader;
    }
    let modal = modal_nonzero(dist);
    let stable = summary.window_new_leaders <= modal;
    match (modal >= 2, stable) {
        (false, false) => PhaseLabel::TransientSingle,
        (false, true) => PhaseLabel::StableSingle,
        (true, false) => PhaseLabel::TransientDouble,
        (true, true) => PhaseLabel::StableDouble,
    }
}

/// Streaming observer computing a [`RunSummary`] and in-degree histogram
/// without storing per-step data.
#[derive(Clone, Debug)]
pub struct RunMetrics {
    cfg: MetricsConfig,
    n: usize,
    window_start: u64,
    steps_seen: u64,
    count_distribution: Vec<u64>,
    window_count_distribution: Vec<u64>,
    leaders: NewLeaderTracker,
    window_leaders: NewLeaderTracker,
    episodes: EpisodeDetector,
    pending_lags: Vec<u64>,
    lags: Vec<u64>,
    histogram: DegreeHistogram,
    max_drift: f64,
}

impl RunMetrics {
    /// `total_steps` fixes where the stability window starts.
    pub fn new(n: usize, total_steps: u64, cfg: MetricsConfig) -> Self {
        let window_len = (cfg.stability_window * total_steps as f64).floor() as u64;
        Self {
            cfg,
            n,
            window_start: total_steps - window_len.min(total_steps),
            steps_seen: 0,
            count_distribution: vec![0; n + 1],
            window_count_distribution: vec![0; n + 1],
            leaders: NewLeaderTracker::new(cfg.leader_memory),
            window_leaders: NewLeaderTracker::new(cfg.leader_memory),
            episodes: EpisodeDetector::new(n, cfg.threshold, cfg.episode_min_steps),
            pending_lags: Vec::new(),
            lags: Vec::new(),
            histogram: DegreeHistogram::new(),
            max_drift: 0.0,
        }
    }

    pub fn record(&mut self, step: u64, state: &NetworkState) {
        let statuses = state.statuses();
        let rec = StepRecord::from_statuses(step, statuses, self.cfg.threshold);
        self.steps_seen += 1;
        self.max_drift = self.max_drift.max((rec.total_status - self.n as f64).abs());

        self.count_distribution[rec.count_above] += 1;
        let in_window = step > self.window_start;
        if in_window {
            self.window_count_distribution[rec.count_above] += 1;
        }
        if rec.count_above > 0 && rec.leader_status > self.cfg.threshold {
            self.leaders.push(rec.leader);
            if in_window {
                self.window_leaders.push(rec.leader);
            }
        }

        let closed = self.episodes.observe(step, statuses);
        if closed > 0 {
            self.pending_lags.extend(std::iter::repeat_n(step, closed));
        }
        if rec.count_above > 0 {
            self.lags
                .extend(self.pending_lags.drain(..).map(|end| step - end));
        }

        if step.is_multiple_of(self.cfg.histogram_sample_period) {
            self.histogram.add_sample(state.in_degrees());
        }
    }

    pub fn histogram(&self) -> &DegreeHistogram {
        &self.histogram
    }

    pub fn finish(self) -> (RunSummary, DegreeHistogram) {
        let episodes = self.episodes.finish();
        let mut lags = self.lags;
        if episodes.len() < 2 {
            lags.clear();
        }
        let summary = RunSummary {
            steps: self.steps_seen,
            count_distribution: self.count_distribution,
            window_count_distribution: self.window_count_distribution,
            new_leaders: self.leaders.count(),
            window_new_leaders: self.window_leaders.count(),
            episodes,
            replacement_lags: lags,
            max_drift: self.max_drift,
        };
        (summary, self.histogram)
    }
}

impl Observer for RunMetrics {
    fn observe(&mut self, step: u64, state: &NetworkState, _events: &[RewireEvent]) {
        self.record(step, state);
    }
}
