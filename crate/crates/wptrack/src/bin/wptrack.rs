//! Command-line frontend: simulate scenarios, track recorded streams,
//! evaluate trajectories against ground truth, run batch sweeps, and
//! export plot data.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 no feasible
//! state / track lost (blind spot).

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use wptrack::fusion::FusionError;
use wptrack::io::{
    self, GtTrack, IoError, TrajectoryFile,
};
use wptrack::pipeline::{run_seed, track_streams, PipelineError, RunError, TrackingConfig};
use wptrack::sim::{run_scenario, SimError};

#[derive(Parser)]
#[command(name = "wptrack", version, about = "Wi-Fi CSI + pressure-insole indoor tracking")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate CSI, pressure and ground-truth traces for a scenario.
    Simulate {
        /// Run configuration (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
    },
    /// Track a target from recorded CSI and insole streams.
    Track {
        /// CSI trace (CSV, optionally .gz).
        #[arg(long)]
        csi: PathBuf,
        /// Left insole pressure trace.
        #[arg(long)]
        pressure_left: PathBuf,
        /// Right insole pressure trace.
        #[arg(long)]
        pressure_right: PathBuf,
        /// Run configuration (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Trajectory output (JSON).
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare a trajectory against a ground-truth track.
    Evaluate {
        /// Trajectory file (JSON).
        #[arg(long)]
        trajectory: PathBuf,
        /// Ground-truth track (CSV).
        #[arg(long)]
        ground_truth: PathBuf,
        /// Error report output (JSON).
        #[arg(long)]
        out: PathBuf,
    },
    /// Batch: randomized straight-walk scenarios, one report per seed
    /// plus an aggregate.
    Sweep {
        /// Run configuration (TOML); the scenario section is the base
        /// for the per-seed randomization.
        #[arg(long)]
        config: PathBuf,
        /// Number of seeds (0..N).
        #[arg(long, default_value_t = 50)]
        seeds: u64,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
    },
    /// Export a trajectory (optionally with ground-truth errors) as CSV.
    PlotData {
        /// Trajectory file (JSON).
        #[arg(long)]
        trajectory: PathBuf,
        /// Optional ground-truth track for error columns.
        #[arg(long)]
        ground_truth: Option<PathBuf>,
        /// CSV output path.
        #[arg(long)]
        out: PathBuf,
    },
}

enum AppError {
    /// Unreadable, unparsable or inconsistent data: exit 2.
    Data(String),
    /// Blind spot / lost track: exit 3.
    Infeasible(String),
}

impl AppError {
    fn code(&self) -> i32 {
        match self {
            AppError::Data(_) => 2,
            AppError::Infeasible(_) => 3,
        }
    }
    fn message(&self) -> &str {
        match self {
            AppError::Data(m) | AppError::Infeasible(m) => m,
        }
    }
}

impl From<IoError> for AppError {
    fn from(e: IoError) -> Self {
        AppError::Data(e.to_string())
    }
}

impl From<SimError> for AppError {
    fn from(e: SimError) -> Self {
        AppError::Data(e.to_string())
    }
}

impl From<PipelineError> for AppError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Fusion(FusionError::NoFeasibleState(_))
            | PipelineError::Fusion(FusionError::TrackLost { .. }) => {
                AppError::Infeasible(e.to_string())
            }
            other => AppError::Data(other.to_string()),
        }
    }
}

impl From<RunError> for AppError {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Pipeline(p) => p.into(),
            RunError::Sim(s) => s.into(),
            RunError::Io(i) => i.into(),
        }
    }
}

fn ensure_dir(dir: &Path) -> Result<(), AppError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| AppError::Data(format!("cannot create {}: {e}", dir.display())))
}

fn simulate(config: &Path, out: &Path) -> Result<(), AppError> {
    let cfg = io::read_run_config(config)?;
    let bundle = run_scenario(&cfg.scenario)?;
    ensure_dir(out)?;
    io::write_csi(&out.join("csi.csv.gz"), &bundle.csi)?;
    io::write_pressure(&out.join("pressure_left.csv"), &bundle.pressure_left)?;
    io::write_pressure(&out.join("pressure_right.csv"), &bundle.pressure_right)?;
    io::write_ground_truth(&out.join("ground_truth.csv"), &GtTrack::from(&bundle.ground_truth))?;
    // Resolved configuration for provenance.
    let resolved = toml::to_string_pretty(&cfg)
        .map_err(|e| AppError::Data(format!("cannot serialize config: {e}")))?;
    std::fs::write(out.join("config.toml"), resolved)
        .map_err(|e| AppError::Data(format!("cannot write config.toml: {e}")))?;
    Ok(())
}

fn track(
    csi: &Path,
    left: &Path,
    right: &Path,
    config: &Path,
    out: &Path,
) -> Result<(), AppError> {
    let cfg = io::read_run_config(config)?;
    let csi = io::read_csi(csi)?;
    let pl = io::read_pressure(left)?;
    let pr = io::read_pressure(right)?;
    let scene = cfg.scenario.scene.build().map_err(SimError::from)?;
    let tcfg = TrackingConfig {
        doppler: cfg.doppler,
        insole: cfg.insole,
        fusion: cfg.fusion,
        pipeline: cfg.pipeline.clone(),
        stride: cfg.scenario.stride,
    };
    let result = track_streams(&csi, &pl, &pr, &scene, &tcfg)?;
    let traj = TrajectoryFile::from_trajectory(
        &result.trajectory,
        cfg.scenario.scene.clone(),
        io::config_hash(&cfg),
    );
    io::write_trajectory(out, &traj)?;
    Ok(())
}

fn evaluate(trajectory: &Path, ground_truth: &Path, out: &Path) -> Result<(), AppError> {
    let traj = io::read_trajectory(trajectory)?;
    let gt = io::read_ground_truth(ground_truth)?;
    let report = io::evaluate(&traj, &gt)?;
    io::write_report(out, &report)?;
    Ok(())
}

/// Aggregate over a sweep: summary of the per-scenario initial errors
/// and of the per-scenario mean errors. Means are the exact arithmetic
/// means of the per-scenario values.
#[derive(Debug, Serialize, Deserialize)]
struct SweepAggregate {
    seeds: u64,
    initial_mean_m: f64,
    initial_std_m: Option<f64>,
    initial_min_m: f64,
    initial_max_m: f64,
    per_scenario_mean_of_means_m: f64,
}

fn summarize(values: &[f64]) -> (f64, Option<f64>, f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        Some(
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt(),
        )
    } else {
        None
    };
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (mean, std, min, max)
}

fn sweep(config: &Path, seeds: u64, out: &Path) -> Result<(), AppError> {
    if seeds == 0 {
        return Err(AppError::Data("sweep needs at least one seed".into()));
    }
    let cfg = io::read_run_config(config)?;
    ensure_dir(out)?;
    let results: Vec<_> = (0..seeds)
        .into_par_iter()
        .map(|s| run_seed(&cfg, s))
        .collect();
    // Merge deterministically in seed order.
    let mut initial = Vec::with_capacity(results.len());
    let mut means = Vec::with_capacity(results.len());
    for r in results {
        let outcome = r?;
        io::write_report(
            &out.join(format!("report_seed{:03}.json", outcome.seed)),
            &outcome.report,
        )?;
        initial.push(outcome.report.initial_error_m);
        means.push(outcome.report.mean_m);
    }
    let (i_mean, i_std, i_min, i_max) = summarize(&initial);
    let aggregate = SweepAggregate {
        seeds,
        initial_mean_m: i_mean,
        initial_std_m: i_std,
        initial_min_m: i_min,
        initial_max_m: i_max,
        per_scenario_mean_of_means_m: means.iter().sum::<f64>() / means.len() as f64,
    };
    let json = serde_json::to_string_pretty(&aggregate)
        .map_err(|e| AppError::Data(format!("cannot serialize aggregate: {e}")))?;
    std::fs::write(out.join("aggregate.json"), json)
        .map_err(|e| AppError::Data(format!("cannot write aggregate.json: {e}")))?;
    Ok(())
}

fn plot_data(trajectory: &Path, ground_truth: Option<&Path>, out: &Path) -> Result<(), AppError> {
    let traj = io::read_trajectory(trajectory)?;
    let gt = ground_truth.map(io::read_ground_truth).transpose()?;
    let mut body = String::new();
    if gt.is_some() {
        body.push_str("t_s,x_m,y_m,phi_rad,residual,gt_x_m,gt_y_m,error_m\n");
    } else {
        body.push_str("t_s,x_m,y_m,phi_rad,residual\n");
    }
    for s in &traj.states {
        body.push_str(&format!("{},{},{},{},{}", s.t, s.x, s.y, s.phi, s.residual));
        if let Some(gt) = &gt {
            let p = gt.position_at(s.t);
            let err = ((s.x - p.x).powi(2) + (s.y - p.y).powi(2)).sqrt();
            body.push_str(&format!(",{},{},{}", p.x, p.y, err));
        }
        body.push('\n');
    }
    std::fs::write(out, body)
        .map_err(|e| AppError::Data(format!("cannot write {}: {e}", out.display())))?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.cmd {
        Cmd::Simulate { config, out } => simulate(&config, &out),
        Cmd::Track { csi, pressure_left, pressure_right, config, out } => {
            track(&csi, &pressure_left, &pressure_right, &config, &out)
        }
        Cmd::Evaluate { trajectory, ground_truth, out } => {
            evaluate(&trajectory, &ground_truth, &out)
        }
        Cmd::Sweep { config, seeds, out } => sweep(&config, seeds, &out),
        Cmd::PlotData { trajectory, ground_truth, out } => {
            plot_data(&trajectory, ground_truth.as_deref(), &out)
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version print to stdout and exit 0; real usage
            // errors exit 1.
            let is_usage = e.use_stderr();
            let _ = e.print();
            std::process::exit(if is_usage { 1 } else { 0 });
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {}", e.message());
        std::process::exit(e.code());
    }
}
