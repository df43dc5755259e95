//! Command-line surface: `run`, `sweep` and `analyze`.
//!
//! Exit codes: 0 on success, 2 for usage and configuration errors, 1 for
//! failures while simulating or writing outputs.

pub mod config;
pub mod manifest;
pub mod output;
pub mod report;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use powervac::metrics::{summarize_records, StepRecord};
use powervac::sweep::run_sweep;
use powervac::{MetricsConfig, NetworkState, Observer, RewireEvent, RunMetrics};
use thiserror::Error;

use config::{emit_config, parse_config, Config, RunConfig};
use manifest::{RunManifest, SCHEMA_VERSION};
use output::{fmt_real, IoError, TIMESERIES_HEADER};
use report::MetricsReport;

pub const TIMESERIES_FILE: &str = "timeseries.csv";
pub const EPISODES_FILE: &str = "episodes.csv";
pub const HISTOGRAM_FILE: &str = "histogram.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const ANALYSIS_FILE: &str = "analysis.json";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const STATUSES_FILE: &str = "statuses.csv";
pub const LINKS_FILE: &str = "links.csv";

#[derive(Parser, Debug)]
#[command(
    name = "powervac",
    version,
    about = "Alliance-network leadership simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one run and write its timeseries, episodes and histogram.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        steps: Option<u64>,
        /// Steps between timeseries rows.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        record_stride: u64,
        /// Also write full status and link snapshots every K steps.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        dump_status_stride: Option<u64>,
    },
    /// Run every point of a parameter grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        workers: u64,
    },
    /// Recompute metrics from the CSV files of a previous run.
    Analyze {
        #[arg(long = "in")]
        input: PathBuf,
        /// Power-law fit range over in-degree, as `MIN:MAX`.
        #[arg(long, value_parser = parse_fit_range)]
        fit_range: Option<(usize, usize)>,
    },
}

fn parse_fit_range(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(':').ok_or("expected MIN:MAX")?;
    let a: usize = a.trim().parse().map_err(|e| format!("bad MIN: {e}"))?;
    let b: usize = b.trim().parse().map_err(|e| format!("bad MAX: {e}"))?;
    if a > b {
        return Err("MIN must not exceed MAX".into());
    }
    Ok((a, b))
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run {
            config,
            out,
            seed,
            steps,
            record_stride,
            dump_status_stride,
        } => {
            let mut run = match load_config(&config)? {
                Config::Run(run) => run,
                Config::Sweep(_) => {
                    return Err(CliError::Usage(format!(
                        "{}: sweep configs go to the `sweep` command",
                        config.display()
                    )))
                }
            };
            if let Some(seed) = seed {
                run.params.seed = seed;
            }
            if let Some(steps) = steps {
                run.params.steps = steps;
            }
            let report = run_command(&run, &out, record_stride, dump_status_stride)?;
            print_report(&report);
            Ok(())
        }
        Command::Sweep {
            config,
            out,
            workers,
        } => {
            let sweep = load_config(&config)?.into_sweep();
            sweep_command(&sweep, &out, workers as usize)
        }
        Command::Analyze { input, fit_range } => {
            let report = analyze_command(&input, fit_range)?;
            print_report(&report);
            Ok(())
        }
    }
}

fn load_config(path: &Path) -> Result<Config, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("{}: {e}", dir.display())))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    std::fs::write(path, text + "\n")
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

fn print_report(r: &MetricsReport) {
    println!("phase            {}", r.phase);
    println!(
        "above threshold  0: {:.4}  1: {:.4}  2: {:.4}  3+: {:.4}",
        r.count_fractions[0], r.count_fractions[1], r.count_fractions[2], r.count_fractions[3]
    );
    println!("new leaders      {}", r.new_leaders);
    println!(
        "episodes         {} ({} individuals)",
        r.episodes, r.distinct_leaders
    );
    println!(
        "tenure           mean {:.1}  median {:.1}",
        r.mean_tenure, r.median_tenure
    );
    if let Some(lag) = r.median_lag {
        println!(
            "replacement lag  median {lag:.1} over {}",
            r.replacement_lags
        );
    }
    match (&r.fit, &r.fit_error) {
        (Some(f), _) => println!(
            "power-law fit    exponent {:.3}  R^2 {:.4}  range {}..={}",
            f.exponent, f.r_squared, f.x_min, f.x_max
        ),
        (None, Some(e)) => println!("power-law fit    {e}"),
        _ => {}
    }
}

/// Streams timeseries rows straight to disk.
struct TimeseriesWriter {
    out: BufWriter<File>,
    path: PathBuf,
    stride: u64,
    threshold: f64,
    error: Option<std::io::Error>,
}

impl TimeseriesWriter {
    fn create(path: &Path, stride: u64, threshold: f64) -> Result<Self, CliError> {
        let file = File::create(path)
            .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
        let mut w = Self {
            out: BufWriter::new(file),
            path: path.to_path_buf(),
            stride,
            threshold,
            error: None,
        };
        w.write_line(TIMESERIES_HEADER);
        Ok(w)
    }

    fn write_line(&mut self, line: &str) {
        if self.error.is_none() {
            if let Err(e) = self
                .out
                .write_all(line.as_bytes())
                .and_then(|_| self.out.write_all(b"\n"))
            {
                self.error = Some(e);
            }
        }
    }

    fn finish(mut self) -> Result<(), CliError> {
        let flushed = self.out.flush();
        match self.error.take().map(Err).unwrap_or(flushed) {
            Ok(()) => Ok(()),
            Err(e) => Err(CliError::Runtime(format!("{}: {e}", self.path.display()))),
        }
    }
}

impl Observer for TimeseriesWriter {
    fn observe(&mut self, step: u64, state: &NetworkState, _events: &[RewireEvent]) {
        if step.is_multiple_of(self.stride) {
            let r = StepRecord::from_statuses(step, state.statuses(), self.threshold);
            let line = format!(
                "{},{},{},{},{}",
                r.step,
                r.leader,
                fmt_real(r.leader_status),
                r.count_above,
                fmt_real(r.total_status)
            );
            self.write_line(&line);
        }
    }
}

#[derive(Default)]
struct SnapshotRecorder {
    stride: u64,
    statuses: Vec<(u64, Vec<f64>)>,
    links: Vec<(u64, Vec<(usize, usize)>)>,
}

impl Observer for SnapshotRecorder {
    fn observe(&mut self, step: u64, state: &NetworkState, _events: &[RewireEvent]) {
        if step.is_multiple_of(self.stride) {
            self.statuses.push((step, state.statuses().to_vec()));
            self.links.push((step, state.links().collect()));
        }
    }
}

/// Simulates `run`, writing all outputs and the manifest into `out`.
pub fn run_command(
    run: &RunConfig,
    out: &Path,
    record_stride: u64,
    dump_status_stride: Option<u64>,
) -> Result<MetricsReport, CliError> {
    let params = run.params;
    params
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let cfg: MetricsConfig = run.metrics;
    create_dir(out)?;
    let started = Instant::now();

    let mut metrics = RunMetrics::new(params.n, params.steps, cfg);
    let mut timeseries =
        TimeseriesWriter::create(&out.join(TIMESERIES_FILE), record_stride, cfg.threshold)?;
    let mut snapshots = SnapshotRecorder {
        stride: dump_status_stride.unwrap_or(u64::MAX),
        ..Default::default()
    };
    {
        let mut observers: Vec<&mut dyn Observer> = vec![&mut metrics, &mut timeseries];
        if dump_status_stride.is_some() {
            observers.push(&mut snapshots);
        }
        powervac::simulate(&params, &mut observers)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    timeseries.finish()?;

    let (summary, histogram) = metrics.finish();
    output::emit_episodes(&summary.episodes, &out.join(EPISODES_FILE))?;
    output::emit_histogram(&histogram, &out.join(HISTOGRAM_FILE))?;
    let report = MetricsReport::build(&summary, &histogram, params.lambda, None, &cfg);
    write_json(&out.join(SUMMARY_FILE), &report)?;

    let mut files = vec![TIMESERIES_FILE, EPISODES_FILE, HISTOGRAM_FILE, SUMMARY_FILE];
    if dump_status_stride.is_some() {
        output::emit_statuses(&snapshots.statuses, params.n, &out.join(STATUSES_FILE))?;
        output::emit_links(&snapshots.links, &out.join(LINKS_FILE))?;
        files.extend([STATUSES_FILE, LINKS_FILE]);
    }
    let resolved = RunConfig {
        params,
        metrics: cfg,
    };
    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        command: "run".into(),
        config: serde_json::from_str(&emit_config(&Config::Run(resolved))).expect("valid json"),
        seed: params.seed,
        record_stride: Some(record_stride),
        artifacts: RunManifest::artifacts_for(out, &files)?,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    manifest.write(out)?;
    Ok(report)
}

pub fn sweep_command(
    sweep: &powervac::sweep::SweepConfig,
    out: &Path,
    workers: usize,
) -> Result<(), CliError> {
    let rows = sweep
        .row_count()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    eprintln!("sweep: {rows} runs on {workers} worker(s)");
    create_dir(out)?;
    let started = Instant::now();
    let result = run_sweep(sweep, workers).map_err(|e| CliError::Usage(e.to_string()))?;
    output::emit_sweep(&result, &out.join(SWEEP_FILE))?;
    let failed = result.rows.iter().filter(|r| r.outcome.is_err()).count();
    if failed > 0 {
        eprintln!("sweep: {failed} of {rows} rows failed; see the error column");
    }
    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        command: "sweep".into(),
        config: serde_json::to_value(sweep).expect("serializable"),
        seed: sweep.master_seed,
        record_stride: None,
        artifacts: RunManifest::artifacts_for(out, &[SWEEP_FILE])?,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    manifest.write(out)?;
    Ok(())
}

/// Recomputes metrics from a run directory and writes `analysis.json`.
pub fn analyze_command(
    dir: &Path,
    fit_range: Option<(usize, usize)>,
) -> Result<MetricsReport, CliError> {
    let manifest = RunManifest::read(dir)?;
    if manifest.command != "run" {
        return Err(CliError::Usage(format!(
            "{}: analyze expects the output of `run`, found `{}`",
            dir.display(),
            manifest.command
        )));
    }
    let stale = manifest.verify(dir)?;
    if !stale.is_empty() {
        eprintln!("warning: files changed since the run: {}", stale.join(", "));
    }
    let run: RunConfig = serde_json::from_value(manifest.config.clone()).map_err(|e| {
        CliError::Runtime(format!("{}: bad config in manifest: {e}", dir.display()))
    })?;
    let (params, cfg) = (run.params, run.metrics);

    let records = output::read_timeseries(&dir.join(TIMESERIES_FILE))?;
    let episodes = output::read_episodes(&dir.join(EPISODES_FILE))?;
    let histogram = output::read_histogram(&dir.join(HISTOGRAM_FILE), params.n)?;
    let summary = summarize_records(&records, episodes, params.n, params.steps, &cfg);
    let report = MetricsReport::build(&summary, &histogram, params.lambda, fit_range, &cfg);
    write_json(&dir.join(ANALYSIS_FILE), &report)?;
    Ok(report)
}
