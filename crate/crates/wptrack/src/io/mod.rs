//! File formats, run configuration and evaluation metrics.
//!
//! All traces are CSV with a header row; timestamps are seconds as
//! floats relative to stream start, floats are serialized with 9
//! significant digits, and a `.gz` suffix on any path transparently
//! enables gzip. Trajectories are JSON with the scene, a configuration
//! hash for provenance, the state list and a metrics block.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::csi::{CsiFrame, DopplerCfg, N_ANT, N_SUB};
use crate::fusion::{FusionConfig, Trajectory};
use crate::geometry::Point2;
use crate::insole::{Foot, InsoleCfg, PressureFrame, N_SENSORS};
use crate::sim::{GroundTruth, ScenarioConfig, SceneConfig};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: parse error: {msg}")]
    Parse { path: String, line: usize, msg: String },
    #[error("{path}: schema error: {msg}")]
    Schema { path: String, msg: String },
    #[error("trajectory and ground truth share no time support")]
    NoOverlap,
    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    TomlParse {
        path: String,
        #[source]
        source: toml::de::Error,
    },
}

fn io_err(path: &Path, source: std::io::Error) -> IoError {
    IoError::Io { path: path.display().to_string(), source }
}

fn open_reader(path: &Path) -> Result<Box<dyn BufRead>, IoError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    if path.extension().is_some_and(|e| e == "gz") {
        Ok(Box::new(BufReader::new(GzDecoder::new(file))))
    } else {
        Ok(Box::new(BufReader::new(file)))
    }
}

fn open_writer(path: &Path) -> Result<Box<dyn Write>, IoError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    if path.extension().is_some_and(|e| e == "gz") {
        Ok(Box::new(BufWriter::new(GzEncoder::new(file, flate2::Compression::fast()))))
    } else {
        Ok(Box::new(BufWriter::new(file)))
    }
}

/// 9-significant-digit float formatting used by every trace writer.
fn fmt_f64(v: f64) -> String {
    format!("{:.8e}", v)
}

fn parse_f64(path: &Path, line: usize, field: &str, s: &str) -> Result<f64, IoError> {
    s.trim().parse::<f64>().map_err(|e| IoError::Parse {
        path: path.display().to_string(),
        line,
        msg: format!("{}: '{}': {}", field, s, e),
    })
}

// ---------------------------------------------------------------------
// CSI traces

/// Write a CSI stream: `ts_s` then 180 columns, antenna-major, one
/// `_re`/`_im` pair per (antenna, subcarrier).
pub fn write_csi(path: &Path, frames: &[CsiFrame]) -> Result<(), IoError> {
    let mut w = open_writer(path)?;
    let mut header = String::from("ts_s");
    for a in 1..=N_ANT {
        for s in 1..=N_SUB {
            header.push_str(&format!(",a{a}s{s}_re,a{a}s{s}_im"));
        }
    }
    writeln!(w, "{header}").map_err(|e| io_err(path, e))?;
    let mut row = String::new();
    for f in frames {
        row.clear();
        row.push_str(&fmt_f64(f.timestamp));
        for a in 0..N_ANT {
            for s in 0..N_SUB {
                row.push(',');
                row.push_str(&fmt_f64(f.h[a][s].re));
                row.push(',');
                row.push_str(&fmt_f64(f.h[a][s].im));
            }
        }
        writeln!(w, "{row}").map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn read_csi(path: &Path) -> Result<Vec<CsiFrame>, IoError> {
    let reader = open_reader(path)?;
    let mut frames = Vec::new();
    let expected = 1 + 2 * N_ANT * N_SUB;
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if idx == 0 {
            let n = line.split(',').count();
            if n != expected {
                return Err(IoError::Schema {
                    path: path.display().to_string(),
                    msg: format!("expected {} columns, found {}", expected, n),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != expected {
            return Err(IoError::Schema {
                path: path.display().to_string(),
                msg: format!("row {}: expected {} columns, found {}", idx + 1, expected, fields.len()),
            });
        }
        let mut frame = CsiFrame::new(parse_f64(path, idx + 1, "ts_s", fields[0])?);
        let mut k = 1;
        for a in 0..N_ANT {
            for s in 0..N_SUB {
                let re = parse_f64(path, idx + 1, "re", fields[k])?;
                let im = parse_f64(path, idx + 1, "im", fields[k + 1])?;
                frame.h[a][s] = Complex64::new(re, im);
                k += 2;
            }
        }
        frames.push(frame);
    }
    Ok(frames)
}

// ---------------------------------------------------------------------
// Pressure traces

/// Write a pressure stream: `ts_s, foot, p01..p45`, row-major with
/// row 1 = toe.
pub fn write_pressure(path: &Path, frames: &[PressureFrame<f64>]) -> Result<(), IoError> {
    let mut w = open_writer(path)?;
    let mut header = String::from("# row-major 9x5 grid, row 1 = toe\nts_s,foot");
    for i in 1..=N_SENSORS {
        header.push_str(&format!(",p{:02}", i));
    }
    writeln!(w, "{header}").map_err(|e| io_err(path, e))?;
    for f in frames {
        let mut row = format!("{},{}", fmt_f64(f.timestamp), f.foot);
        for p in f.p.iter() {
            row.push(',');
            row.push_str(&fmt_f64(*p));
        }
        writeln!(w, "{row}").map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn read_pressure(path: &Path) -> Result<Vec<PressureFrame<f64>>, IoError> {
    let reader = open_reader(path)?;
    let mut frames = Vec::new();
    let expected = 2 + N_SENSORS;
    let mut saw_header = false;
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        if !saw_header {
            saw_header = true;
            let n = line.split(',').count();
            if n != expected {
                return Err(IoError::Schema {
                    path: path.display().to_string(),
                    msg: format!("expected {} columns, found {}", expected, n),
                });
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != expected {
            return Err(IoError::Schema {
                path: path.display().to_string(),
                msg: format!("row {}: expected {} columns, found {}", idx + 1, expected, fields.len()),
            });
        }
        let timestamp = parse_f64(path, idx + 1, "ts_s", fields[0])?;
        let foot = match fields[1].trim() {
            "L" => Foot::Left,
            "R" => Foot::Right,
            other => {
                return Err(IoError::Parse {
                    path: path.display().to_string(),
                    line: idx + 1,
                    msg: format!("foot: '{}' is not L or R", other),
                })
            }
        };
        let mut p = [0.0; N_SENSORS];
        for (i, v) in p.iter_mut().enumerate() {
            *v = parse_f64(path, idx + 1, "p", fields[2 + i])?;
            if *v < 0.0 {
                return Err(IoError::Schema {
                    path: path.display().to_string(),
                    msg: format!("row {}: negative pressure {}", idx + 1, v),
                });
            }
        }
        frames.push(PressureFrame { timestamp, foot, p });
    }
    Ok(frames)
}

// ---------------------------------------------------------------------
// Ground truth

/// Reference positions over time, the comparison target for evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct GtTrack {
    pub times: Vec<f64>,
    pub positions: Vec<Point2<f64>>,
}

impl GtTrack {
    pub fn position_at(&self, t: f64) -> Point2<f64> {
        match self.times.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(i) => self.positions[i],
            Err(0) => self.positions[0],
            Err(i) if i >= self.times.len() => *self.positions.last().unwrap(),
            Err(i) => {
                let w = (t - self.times[i - 1]) / (self.times[i] - self.times[i - 1]);
                let (a, b) = (self.positions[i - 1], self.positions[i]);
                Point2::new(a.x * (1.0 - w) + b.x * w, a.y * (1.0 - w) + b.y * w)
            }
        }
    }
}

impl From<&GroundTruth> for GtTrack {
    fn from(gt: &GroundTruth) -> Self {
        Self { times: gt.times.clone(), positions: gt.positions.clone() }
    }
}

pub fn write_ground_truth(path: &Path, gt: &GtTrack) -> Result<(), IoError> {
    let mut w = open_writer(path)?;
    writeln!(w, "ts_s,x_m,y_m").map_err(|e| io_err(path, e))?;
    for (t, p) in gt.times.iter().zip(gt.positions.iter()) {
        writeln!(w, "{},{},{}", fmt_f64(*t), fmt_f64(p.x), fmt_f64(p.y))
            .map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn read_ground_truth(path: &Path) -> Result<GtTrack, IoError> {
    let reader = open_reader(path)?;
    let mut track = GtTrack { times: Vec::new(), positions: Vec::new() };
    let mut saw_header = false;
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        if !saw_header {
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(IoError::Schema {
                path: path.display().to_string(),
                msg: format!("row {}: expected 3 columns, found {}", idx + 1, fields.len()),
            });
        }
        let t = parse_f64(path, idx + 1, "ts_s", fields[0])?;
        if let Some(&last) = track.times.last() {
            if t <= last {
                return Err(IoError::Schema {
                    path: path.display().to_string(),
                    msg: format!("row {}: non-monotone timestamp {} after {}", idx + 1, t, last),
                });
            }
        }
        track.times.push(t);
        track.positions.push(Point2::new(
            parse_f64(path, idx + 1, "x_m", fields[1])?,
            parse_f64(path, idx + 1, "y_m", fields[2])?,
        ));
    }
    Ok(track)
}

// ---------------------------------------------------------------------
// Trajectories

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryState {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub phi: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct TrajectoryMetrics {
    pub steps: usize,
    pub mean_residual: f64,
    pub max_residual: f64,
}

/// On-disk trajectory document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryFile {
    pub scene: SceneConfig,
    pub config_hash: String,
    pub states: Vec<TrajectoryState>,
    pub metrics: TrajectoryMetrics,
}

impl TrajectoryFile {
    pub fn from_trajectory(
        traj: &Trajectory<f64>,
        scene: SceneConfig,
        config_hash: String,
    ) -> Self {
        let states: Vec<TrajectoryState> = traj
            .points
            .iter()
            .map(|p| TrajectoryState {
                t: p.t,
                x: p.state.x,
                y: p.state.y,
                phi: p.state.phi,
                residual: p.residual,
            })
            .collect();
        let residuals: Vec<f64> = states.iter().skip(1).map(|s| s.residual).collect();
        let metrics = TrajectoryMetrics {
            steps: residuals.len(),
            mean_residual: if residuals.is_empty() {
                0.0
            } else {
                residuals.iter().sum::<f64>() / residuals.len() as f64
            },
            max_residual: residuals.iter().cloned().fold(0.0, f64::max),
        };
        Self { scene, config_hash, states, metrics }
    }
}

pub fn write_trajectory(path: &Path, traj: &TrajectoryFile) -> Result<(), IoError> {
    let mut w = open_writer(path)?;
    serde_json::to_writer_pretty(&mut w, traj)
        .map_err(|e| IoError::Json { path: path.display().to_string(), source: e })?;
    w.flush().map_err(|e| io_err(path, e))
}

pub fn read_trajectory(path: &Path) -> Result<TrajectoryFile, IoError> {
    let mut reader = open_reader(path)?;
    let mut text = String::new();
    reader.read_to_string(&mut text).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| IoError::Json { path: path.display().to_string(), source: e })
}

// ---------------------------------------------------------------------
// Evaluation

/// Position errors of an estimated trajectory against ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    /// Error of the first (initial) state, meters.
    pub initial_error_m: f64,
    /// Error of every subsequent per-step state, meters.
    pub step_errors_m: Vec<f64>,
    pub mean_m: f64,
    /// Unbiased standard deviation; null with fewer than 2 samples.
    pub std_m: Option<f64>,
    pub min_m: f64,
    pub max_m: f64,
}

/// Compare each estimated state against the ground-truth position
/// linearly interpolated at its timestamp.
pub fn evaluate(traj: &TrajectoryFile, gt: &GtTrack) -> Result<ErrorReport, IoError> {
    if traj.states.is_empty() || gt.times.is_empty() {
        return Err(IoError::NoOverlap);
    }
    let (gt_lo, gt_hi) = (gt.times[0], *gt.times.last().unwrap());
    let tol = 1e-6;
    let overlap = traj
        .states
        .iter()
        .any(|s| s.t >= gt_lo - tol && s.t <= gt_hi + tol);
    if !overlap {
        return Err(IoError::NoOverlap);
    }
    let errors: Vec<f64> = traj
        .states
        .iter()
        .map(|s| gt.position_at(s.t).dist(Point2::new(s.x, s.y)))
        .collect();
    let n = errors.len();
    let mean = errors.iter().sum::<f64>() / n as f64;
    let std = if n >= 2 {
        let var = errors.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (n - 1) as f64;
        Some(var.sqrt())
    } else {
        None
    };
    Ok(ErrorReport {
        initial_error_m: errors[0],
        step_errors_m: errors[1..].to_vec(),
        mean_m: mean,
        std_m: std,
        min_m: errors.iter().cloned().fold(f64::INFINITY, f64::min),
        max_m: errors.iter().cloned().fold(0.0, f64::max),
    })
}

pub fn write_report(path: &Path, report: &ErrorReport) -> Result<(), IoError> {
    let mut w = open_writer(path)?;
    serde_json::to_writer_pretty(&mut w, report)
        .map_err(|e| IoError::Json { path: path.display().to_string(), source: e })?;
    w.flush().map_err(|e| io_err(path, e))
}

// ---------------------------------------------------------------------
// Run configuration

/// Every tunable of the processing chain and the simulator in one
/// document. Unknown keys are rejected; all fields have defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub doppler: DopplerCfg,
    pub insole: InsoleCfg<f64>,
    pub fusion: FusionConfig<f64>,
    pub pipeline: PipelineCfg,
}

/// Orchestration-level knobs that belong to no single module.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineCfg {
    /// Dead time after the sync gesture before step detection starts.
    pub post_gesture_guard_s: f64,
    /// Use the per-step arrival-angle estimate in the objective.
    pub use_aoa: bool,
}

impl Default for PipelineCfg {
    fn default() -> Self {
        Self { post_gesture_guard_s: 0.5, use_aoa: true }
    }
}

pub fn read_run_config(path: &Path) -> Result<RunConfig, IoError> {
    let mut reader = open_reader(path)?;
    let mut text = String::new();
    reader.read_to_string(&mut text).map_err(|e| io_err(path, e))?;
    toml::from_str(&text)
        .map_err(|e| IoError::TomlParse { path: path.display().to_string(), source: e })
}

/// Hex SHA-256 of the canonical serialized configuration, embedded in
/// trajectory files for provenance.
pub fn config_hash(cfg: &RunConfig) -> String {
    let text = toml::to_string(cfg).expect("config always serializes");
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{:02x}", b)).collect()
}
