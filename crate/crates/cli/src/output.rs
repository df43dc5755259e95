//! CSV files written by `run` and `sweep` and read back by `analyze`.
//!
//! All files use LF line endings. Reals carry 17 significant digits, which
//! round-trips every `f64`.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use powervac::metrics::{DegreeHistogram, LeaderEpisode, StepRecord};
use powervac::sweep::SweepResult;
use serde::Deserialize;
use thiserror::Error;

pub const TIMESERIES_HEADER: &str = "step,leader_id,leader_status,count_above,total_status";
pub const EPISODES_HEADER: &str = "individual,rise_step,above_from,above_to,tenure_above";
pub const HISTOGRAM_HEADER: &str = "in_degree,frequency";
pub const SWEEP_HEADER: &str = "index,point,replicate,n,lambda,r,q,w,steps,seed,new_leaders,mean_tenure,median_tenure,frac_0,frac_1,frac_2,frac_3plus,exponent,phase,error";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl IoError {
    fn io(path: &Path, source: io::Error) -> Self {
        IoError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn format(path: &Path, message: impl ToString) -> Self {
        IoError::Format {
            path: path.to_path_buf(),
            message: message.to_string(),
        }
    }
}

/// `x` with 17 significant digits in positional notation (scientific for
/// very large or small magnitudes).
pub fn fmt_real(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 {
            "0.0000000000000000".into()
        } else {
            x.to_string()
        };
    }
    let exponent = x.abs().log10().floor() as i32;
    if !(-5..=15).contains(&exponent) {
        return format!("{x:.16e}");
    }
    let decimals = (16 - exponent).max(0) as usize;
    format!("{x:.decimals$}")
}

fn write_file(
    path: &Path,
    header: &str,
    rows: impl Iterator<Item = String>,
) -> Result<(), IoError> {
    let file = File::create(path).map_err(|e| IoError::io(path, e))?;
    let mut out = BufWriter::new(file);
    let write = || -> io::Result<()> {
        out.write_all(header.as_bytes())?;
        out.write_all(b"\n")?;
        for row in rows {
            out.write_all(row.as_bytes())?;
            out.write_all(b"\n")?;
        }
        out.flush()
    };
    write().map_err(|e| IoError::io(path, e))
}

pub fn emit_timeseries(records: &[StepRecord], path: &Path) -> Result<(), IoError> {
    write_file(
        path,
        TIMESERIES_HEADER,
        records.iter().map(|r| {
            format!(
                "{},{},{},{},{}",
                r.step,
                r.leader,
                fmt_real(r.leader_status),
                r.count_above,
                fmt_real(r.total_status)
            )
        }),
    )
}

pub fn emit_episodes(episodes: &[LeaderEpisode], path: &Path) -> Result<(), IoError> {
    write_file(
        path,
        EPISODES_HEADER,
        episodes.iter().map(|e| {
            format!(
                "{},{},{},{},{}",
                e.individual, e.rise_step, e.above_from, e.above_to, e.tenure_above
            )
        }),
    )
}

/// Non-empty bins, ascending by in-degree.
pub fn emit_histogram(hist: &DegreeHistogram, path: &Path) -> Result<(), IoError> {
    write_file(
        path,
        HISTOGRAM_HEADER,
        hist.bins().map(|(x, f)| format!("{x},{f}")),
    )
}

pub fn emit_sweep(result: &SweepResult, path: &Path) -> Result<(), IoError> {
    write_file(
        path,
        SWEEP_HEADER,
        result.rows.iter().map(|row| {
            let p = &row.row.params;
            let head = format!(
                "{},{},{},{},{},{},{},{},{},{}",
                row.row.index,
                row.row.point,
                row.row.replicate,
                p.n,
                p.lambda,
                fmt_real(p.r),
                fmt_real(p.q),
                fmt_real(p.w),
                p.steps,
                p.seed
            );
            match &row.outcome {
                Ok(o) => format!(
                    "{head},{},{},{},{},{},{},{},{},{},",
                    o.new_leaders,
                    fmt_real(o.mean_tenure),
                    fmt_real(o.median_tenure),
                    fmt_real(o.count_fractions[0]),
                    fmt_real(o.count_fractions[1]),
                    fmt_real(o.count_fractions[2]),
                    fmt_real(o.count_fractions[3]),
                    o.exponent.map(fmt_real).unwrap_or_default(),
                    o.phase
                ),
                Err(e) => format!("{head},,,,,,,,,,{}", csv_escape(e)),
            }
        }),
    )
}

/// Wide per-step status snapshot rows: `step,s_0,...,s_{n-1}`.
pub fn emit_statuses(snapshots: &[(u64, Vec<f64>)], n: usize, path: &Path) -> Result<(), IoError> {
    let header = std::iter::once("step".to_string())
        .chain((0..n).map(|i| format!("s_{i}")))
        .collect::<Vec<_>>()
        .join(",");
    write_file(
        path,
        &header,
        snapshots.iter().map(|(step, s)| {
            std::iter::once(step.to_string())
                .chain(s.iter().map(|&x| fmt_real(x)))
                .collect::<Vec<_>>()
                .join(",")
        }),
    )
}

/// Link lists at the snapshot steps: `step,source,target`.
pub fn emit_links(snapshots: &[(u64, Vec<(usize, usize)>)], path: &Path) -> Result<(), IoError> {
    write_file(
        path,
        "step,source,target",
        snapshots
            .iter()
            .flat_map(|(step, links)| links.iter().map(move |(a, b)| format!("{step},{a},{b}"))),
    )
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path, header: &str) -> Result<Vec<T>, IoError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| IoError::format(path, e))?;
    let found = reader
        .headers()
        .map_err(|e| IoError::format(path, e))?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if found != header {
        return Err(IoError::format(
            path,
            format!("expected header `{header}`, found `{found}`"),
        ));
    }
    reader
        .deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|e| IoError::format(path, e))
}

#[derive(Deserialize)]
struct TimeseriesRow {
    step: u64,
    leader_id: usize,
    leader_status: f64,
    count_above: usize,
    total_status: f64,
}

pub fn read_timeseries(path: &Path) -> Result<Vec<StepRecord>, IoError> {
    Ok(read_rows::<TimeseriesRow>(path, TIMESERIES_HEADER)?
        .into_iter()
        .map(|r| StepRecord {
            step: r.step,
            leader: r.leader_id,
            leader_status: r.leader_status,
            count_above: r.count_above,
            total_status: r.total_status,
        })
        .collect())
}

#[derive(Deserialize)]
struct EpisodeRow {
    individual: usize,
    rise_step: u64,
    above_from: u64,
    above_to: u64,
    tenure_above: u64,
}

pub fn read_episodes(path: &Path) -> Result<Vec<LeaderEpisode>, IoError> {
    Ok(read_rows::<EpisodeRow>(path, EPISODES_HEADER)?
        .into_iter()
        .map(|r| LeaderEpisode {
            individual: r.individual,
            rise_step: r.rise_step,
            above_from: r.above_from,
            above_to: r.above_to,
            tenure_above: r.tenure_above,
        })
        .collect())
}

/// Histogram bins; the sample count is recovered as total mass over `n`.
pub fn read_histogram(path: &Path, n: usize) -> Result<DegreeHistogram, IoError> {
    let rows: Vec<(usize, u64)> = read_rows(path, HISTOGRAM_HEADER)?;
    let total: u64 = rows.iter().map(|r| r.1).sum();
    Ok(DegreeHistogram::from_counts(rows, total / n.max(1) as u64))
}
