//! End-to-end orchestration: raw CSI and pressure streams in, fused
//! per-step measurements and a tracked trajectory out.

use thiserror::Error;

use crate::csi::{
    denoise_stream_amplitude, estimate_doppler_velocity, estimate_step_aoa,
    integrate_path_change, CsiError, CsiFrame, DopplerCfg, DopplerSeries,
};
use crate::fusion::{
    estimate_initial_state, track, FusionConfig, FusionError, StepMeasurement, Trajectory,
};
use crate::geometry::Scene;
use crate::insole::{
    align_streams, attach_stride, detect_first_moving_foot, detect_sync_feature, segment_steps,
    shift_stream, InsoleCfg, InsoleError, PressureFrame, SensorLayout,
};
use crate::io::PipelineCfg;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Csi(#[from] CsiError),
    #[error(transparent)]
    Insole(#[from] InsoleError),
    #[error(transparent)]
    Fusion(#[from] FusionError),
}

/// All processing-chain tunables in one place.
#[derive(Debug, Clone, Default)]
pub struct TrackingConfig {
    pub doppler: DopplerCfg,
    pub insole: InsoleCfg<f64>,
    pub fusion: FusionConfig<f64>,
    pub pipeline: PipelineCfg,
    /// Per-user stride constant in meters.
    pub stride: f64,
}

impl TrackingConfig {
    pub fn with_stride(stride: f64) -> Self {
        Self { stride, ..Default::default() }
    }
}

/// Savitzky-Golay window/order used for CSI amplitude denoising.
const SG_WINDOW: usize = 11;
const SG_ORDER: usize = 2;

/// Fuse the sensor streams into per-step measurement tuples.
///
/// Alignment, gait segmentation, Doppler integration and per-step AoA
/// all happen here; `left`/`right` carry their own clocks and the right
/// stream is shifted onto the left one via the sync gesture.
pub fn extract_measurements(
    csi: &[CsiFrame],
    left: &[PressureFrame<f64>],
    right: &[PressureFrame<f64>],
    scene: &Scene<f64>,
    cfg: &TrackingConfig,
) -> Result<Vec<StepMeasurement<f64>>, PipelineError> {
    let layout = SensorLayout::default();

    // Put both insoles on the left stream's clock.
    let offset = align_streams(left, right, &layout, &cfg.insole)?;
    let mut right = right.to_vec();
    shift_stream(&mut right, offset);

    // Gait segmentation after the sync gesture plus a guard that skips
    // the gesture's own pressure transitions.
    let t_feat = detect_sync_feature(left, &layout, &cfg.insole)?;
    let from_time = t_feat + cfg.insole.sync_hold + cfg.pipeline.post_gesture_guard_s;
    let first_mover = detect_first_moving_foot(left, &right, from_time, &cfg.insole)?;
    let mut steps = segment_steps(left, &right, from_time, &cfg.insole)?;
    // Drop any leading segment that contradicts the detected first mover
    // (spurious edge before the walk).
    while steps.first().is_some_and(|s| s.foot != first_mover) {
        steps.remove(0);
    }
    if steps.is_empty() {
        return Err(InsoleError::NoStepsFound.into());
    }
    let steps = attach_stride(&steps, cfg.stride)?;

    // Doppler velocity from the denoised CSI stream.
    let denoised = denoise_stream_amplitude(csi, SG_WINDOW, SG_ORDER)?;
    let lambda = scene.wavelength();
    let series = estimate_doppler_velocity(&denoised, &cfg.doppler, lambda)?;

    let mut out = Vec::with_capacity(steps.len());
    for step in steps {
        let delta_l = integrate_path_change(&series, step.t_start, step.t_end)?;
        let v_ratio = (delta_l / step.duration / step.speed).clamp(-2.0, 2.0);
        let confidence = series.confidence_fraction(step.t_start, step.t_end);
        let alpha_r = if cfg.pipeline.use_aoa {
            let window = frames_in(&denoised, step.t_start, step.t_end);
            estimate_step_aoa(
                window,
                lambda,
                scene.antenna_spacing(),
                cfg.doppler.v_max,
                cfg.doppler.dc_cut_hz,
            )?
        } else {
            None
        };
        out.push(StepMeasurement { step, delta_l, v_ratio, alpha_r, confidence });
    }
    Ok(out)
}

fn frames_in(frames: &[CsiFrame], t0: f64, t1: f64) -> &[CsiFrame] {
    let lo = frames.partition_point(|f| f.timestamp < t0);
    let hi = frames.partition_point(|f| f.timestamp <= t1);
    &frames[lo..hi]
}

/// Output of a full tracking run.
pub struct TrackingResult {
    pub trajectory: Trajectory<f64>,
    pub measurements: Vec<StepMeasurement<f64>>,
    /// Doppler series, kept for diagnostics.
    pub doppler: DopplerSeries,
}

/// Full chain: extract measurements, estimate the initial state over
/// the leading window, then track step by step.
pub fn track_streams(
    csi: &[CsiFrame],
    left: &[PressureFrame<f64>],
    right: &[PressureFrame<f64>],
    scene: &Scene<f64>,
    cfg: &TrackingConfig,
) -> Result<TrackingResult, PipelineError> {
    let measurements = extract_measurements(csi, left, right, scene, cfg)?;
    let (initial, _) = estimate_initial_state(&measurements, scene, &cfg.fusion)?;
    let trajectory = track(initial, &measurements, scene, &cfg.fusion)?;
    let denoised = denoise_stream_amplitude(csi, SG_WINDOW, SG_ORDER)?;
    let doppler = estimate_doppler_velocity(&denoised, &cfg.doppler, scene.wavelength())?;
    Ok(TrackingResult { trajectory, measurements, doppler })
}

/// One sweep seed: the randomized scenario and its evaluation.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub seed: u64,
    pub scenario: crate::sim::ScenarioConfig,
    pub report: crate::io::ErrorReport,
}

/// Errors from a full simulate-track-evaluate round.
#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Sim(#[from] crate::sim::SimError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Io(#[from] crate::io::IoError),
}

/// Simulate one randomized straight-walk seed under the run config,
/// track it, and evaluate against its own ground truth.
pub fn run_seed(cfg: &crate::io::RunConfig, seed: u64) -> Result<SweepOutcome, RunError> {
    let scenario = crate::sim::randomized_straight_walk(&cfg.scenario, seed)?;
    let bundle = crate::sim::run_scenario(&scenario)?;
    let scene = scenario.scene.build().map_err(crate::sim::SimError::from)?;
    let tcfg = TrackingConfig {
        doppler: cfg.doppler,
        insole: cfg.insole,
        fusion: cfg.fusion,
        pipeline: cfg.pipeline.clone(),
        stride: scenario.stride,
    };
    let result = track_streams(
        &bundle.csi,
        &bundle.pressure_left,
        &bundle.pressure_right,
        &scene,
        &tcfg,
    )?;
    let run_cfg_for_hash = crate::io::RunConfig { scenario: scenario.clone(), ..cfg.clone() };
    let traj = crate::io::TrajectoryFile::from_trajectory(
        &result.trajectory,
        scenario.scene.clone(),
        crate::io::config_hash(&run_cfg_for_hash),
    );
    let gt = crate::io::GtTrack::from(&bundle.ground_truth);
    let report = crate::io::evaluate(&traj, &gt)?;
    Ok(SweepOutcome { seed, scenario, report })
}
