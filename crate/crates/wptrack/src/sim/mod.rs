//! Scenario simulator: ground-truth walks plus the two synthetic sensor
//! streams (CSI at 1 kHz, dual insole pressure at 50 Hz, ground truth at
//! 100 Hz) with configurable noise.
//!
//! Timeline: every stream shares one global clock starting at t = 0. The
//! run opens with the insole synchronization gesture (heel pressure,
//! then a forefoot hold, then flat standing) while the target stands at
//! the first waypoint; walking starts after the lead-in and ends after
//! a whole number of strides, followed by a short standing tail so the
//! Doppler windows cover the last step. The right insole stream is
//! emitted in its own clock, offset behind the global one, to exercise
//! stream alignment.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::csi::{CsiFrame, N_ANT, N_SUB};
use crate::geometry::{GeometryError, Point2, Rect, Scene, SPEED_OF_LIGHT};
use crate::insole::{Foot, PressureFrame, SensorLayout, N_SENSORS};

/// Subcarrier spacing of the 30 grouped subcarriers (40 MHz grouping).
pub const SUBCARRIER_SPACING_HZ: f64 = 1.25e6;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("bad scenario: {0}")]
    BadScenario(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

fn d4() -> f64 {
    4.0
}
fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}

/// Device placement and RF constants in serializable form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneConfig {
    pub tx: [f64; 2],
    pub rx: [f64; 2],
    pub carrier_freq_hz: f64,
    pub antenna_spacing_m: f64,
    pub area: AreaConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AreaConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Default for AreaConfig {
    fn default() -> Self {
        Self { x_min: 0.0, x_max: 4.0, y_min: 0.0, y_max: 4.0 }
    }
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            tx: [0.0, 0.0],
            rx: [d4(), 0.0],
            carrier_freq_hz: 5.32e9,
            antenna_spacing_m: 0.028,
            area: AreaConfig::default(),
        }
    }
}

impl SceneConfig {
    pub fn build(&self) -> Result<Scene<f64>, GeometryError> {
        Scene::new(
            Point2::new(self.tx[0], self.tx[1]),
            Point2::new(self.rx[0], self.rx[1]),
            self.carrier_freq_hz,
            self.antenna_spacing_m,
            Rect {
                x_min: self.area.x_min,
                x_max: self.area.x_max,
                y_min: self.area.y_min,
                y_max: self.area.y_max,
            },
        )
    }
}

/// Gait and lead-in timing parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaitConfig {
    /// Fraction of the per-foot gait cycle spent in double support.
    pub double_support_frac: f64,
    /// Heel-pressure phase of the sync gesture, seconds.
    pub lead_heel_s: f64,
    /// Forefoot-hold phase of the sync gesture, seconds.
    pub lead_hold_s: f64,
    /// Flat standing between the gesture and the first step, seconds.
    pub lead_stand_s: f64,
    /// Smooth blending time between pressure patterns, seconds.
    pub transition_s: f64,
    /// Center-of-pressure push-off ramp before a toe-off from standing.
    pub pushoff_s: f64,
    /// Standing tail after the last step, seconds.
    pub tail_s: f64,
}

impl Default for GaitConfig {
    fn default() -> Self {
        Self {
            double_support_frac: 0.15,
            lead_heel_s: 2.0,
            lead_hold_s: 3.0,
            lead_stand_s: 1.0,
            transition_s: 0.2,
            pushoff_s: 0.3,
            tail_s: 0.8,
        }
    }
}

impl GaitConfig {
    /// Swing time as a fraction of the per-foot gait cycle.
    pub fn swing_frac(&self) -> f64 {
        (0.5 - self.double_support_frac).max(0.05)
    }

    /// Total lead-in before the first toe-off.
    pub fn lead_in(&self) -> f64 {
        self.lead_heel_s + self.lead_hold_s + self.lead_stand_s
    }
}

/// Noise injection switches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    /// AWGN on each CSI sample at this SNR in dB; None disables it.
    pub csi_awgn_snr_db: Option<f64>,
    /// Per-packet random common phase plus a linear subcarrier slope.
    pub cfo_sfo: bool,
    /// Multiplicative pressure noise fraction per sensor sample.
    pub pressure_noise: f64,
    /// Slowly varying reflected-path velocity error, m/s RMS.
    pub doppler_sigma: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self { csi_awgn_snr_db: None, cfo_sfo: false, pressure_noise: 0.0, doppler_sigma: 0.0 }
    }
}

/// Full scenario description; serializable as a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scene: SceneConfig,
    /// Walk path vertices in canonical scene coordinates, meters.
    pub waypoints: Vec<[f64; 2]>,
    /// Walking speed in m/s.
    pub speed: f64,
    /// Per-user stride constant in meters.
    pub stride: f64,
    pub gait: GaitConfig,
    pub noise: NoiseConfig,
    pub seed: u64,
    /// The right insole clock lags the global clock by this much.
    pub right_clock_offset_s: f64,
    pub csi_rate_hz: f64,
    pub pressure_rate_hz: f64,
    pub gt_rate_hz: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scene: SceneConfig::default(),
            waypoints: vec![[1.0, 2.0], [3.0, 2.0]],
            speed: one(),
            stride: half(),
            gait: GaitConfig::default(),
            noise: NoiseConfig::default(),
            seed: 0,
            right_clock_offset_s: 0.5,
            csi_rate_hz: 1000.0,
            pressure_rate_hz: 50.0,
            gt_rate_hz: 100.0,
        }
    }
}

/// One toe-off instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepTime {
    pub t: f64,
    pub foot: Foot,
}

/// Sampled reference trajectory with per-foot step boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub times: Vec<f64>,
    pub positions: Vec<Point2<f64>>,
    pub headings: Vec<f64>,
    /// Toe-off instants, alternating feet; n+1 instants bound n steps.
    pub step_times: Vec<StepTime>,
    /// Global time of the first toe-off.
    pub walk_start: f64,
    pub end_time: f64,
}

impl GroundTruth {
    /// Linear interpolation of the position at time t (clamped).
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

    /// Heading at time t (piecewise constant, clamped).
    pub fn heading_at(&self, t: f64) -> f64 {
        match self.times.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(i) => self.headings[i],
            Err(0) => self.headings[0],
            Err(i) if i >= self.times.len() => *self.headings.last().unwrap(),
            Err(i) => self.headings[i - 1],
        }
    }

    /// Number of steps implied by the toe-off list.
    pub fn step_count(&self) -> usize {
        self.step_times.len().saturating_sub(1)
    }
}

/// Piecewise-linear path through the waypoints, parameterized by
/// arc length.
struct Path {
    points: Vec<Point2<f64>>,
    cum: Vec<f64>,
}

impl Path {
    fn new(waypoints: &[[f64; 2]]) -> Result<Self, SimError> {
        if waypoints.len() < 2 {
            return Err(SimError::BadScenario(format!(
                "need at least 2 waypoints, got {}",
                waypoints.len()
            )));
        }
        let points: Vec<Point2<f64>> =
            waypoints.iter().map(|w| Point2::new(w[0], w[1])).collect();
        let mut cum = vec![0.0];
        for w in points.windows(2) {
            let seg = w[0].dist(w[1]);
            if seg <= 1e-12 {
                return Err(SimError::BadScenario("repeated waypoint".into()));
            }
            cum.push(cum.last().unwrap() + seg);
        }
        Ok(Self { points, cum })
    }

    fn total(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    fn at(&self, dist: f64) -> (Point2<f64>, f64) {
        let d = dist.clamp(0.0, self.total());
        let i = match self.cum.binary_search_by(|v| v.partial_cmp(&d).unwrap()) {
            Ok(i) => i.min(self.points.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.points.len() - 2),
        };
        let seg = self.cum[i + 1] - self.cum[i];
        let w = (d - self.cum[i]) / seg;
        let (a, b) = (self.points[i], self.points[i + 1]);
        let pos = Point2::new(a.x + (b.x - a.x) * w, a.y + (b.y - a.y) * w);
        let heading = (b.y - a.y).atan2(b.x - a.x);
        (pos, heading)
    }
}

/// Generate the reference trajectory: constant-speed piecewise-linear
/// motion through the waypoints, truncated to a whole number of strides,
/// sampled at the ground-truth rate, with standing lead-in and tail.
pub fn gen_trajectory(cfg: &ScenarioConfig) -> Result<GroundTruth, SimError> {
    if !(cfg.speed > 0.0) {
        return Err(SimError::BadScenario("speed must be positive".into()));
    }
    if !(cfg.stride > 0.0) {
        return Err(SimError::BadScenario("stride must be positive".into()));
    }
    let scene = cfg.scene.build()?;
    let path = Path::new(&cfg.waypoints)?;
    for (i, w) in cfg.waypoints.iter().enumerate() {
        if !scene.area().contains(Point2::new(w[0], w[1])) {
            return Err(SimError::BadScenario(format!(
                "waypoint {} at ({}, {}) outside the scene area",
                i, w[0], w[1]
            )));
        }
    }
    let n_steps = (path.total() / cfg.stride + 1e-9).floor() as usize;
    if n_steps == 0 {
        return Err(SimError::BadScenario(format!(
            "path length {:.3} m is shorter than one stride {:.3} m",
            path.total(),
            cfg.stride
        )));
    }
    let walk_start = cfg.gait.lead_in();
    let step_dur = cfg.stride / cfg.speed;
    let walk_end = walk_start + n_steps as f64 * step_dur;
    let end_time = walk_end + cfg.gait.tail_s;

    let n_samples = (end_time * cfg.gt_rate_hz).round() as usize + 1;
    let mut times = Vec::with_capacity(n_samples);
    let mut positions = Vec::with_capacity(n_samples);
    let mut headings = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let t = i as f64 / cfg.gt_rate_hz;
        let d = ((t - walk_start) * cfg.speed).clamp(0.0, n_steps as f64 * cfg.stride);
        let (pos, heading) = path.at(d);
        times.push(t);
        positions.push(pos);
        headings.push(heading);
    }

    let step_times = (0..=n_steps)
        .map(|k| StepTime {
            t: walk_start + k as f64 * step_dur,
            foot: if k % 2 == 0 { Foot::Left } else { Foot::Right },
        })
        .collect();

    Ok(GroundTruth { times, positions, headings, step_times, walk_start, end_time })
}

fn subcarrier_freq(carrier: f64, s: usize) -> f64 {
    carrier + (s as f64 + 1.0 - 15.5) * SUBCARRIER_SPACING_HZ
}

fn steer(ant: usize, alpha: f64, spacing: f64, freq: f64) -> Complex64 {
    Complex64::from_polar(
        1.0,
        std::f64::consts::TAU * ant as f64 * spacing * alpha.cos() * freq / SPEED_OF_LIGHT,
    )
}

/// Static (line-of-sight) channel term for one antenna/subcarrier.
pub(crate) fn static_term(scene: &Scene<f64>, ant: usize, s: usize) -> Complex64 {
    let f = subcarrier_freq(scene.carrier_freq(), s);
    let tau = scene.d_los() / SPEED_OF_LIGHT;
    // The LoS path arrives along the axis from the receiver toward the
    // transmitter.
    Complex64::from_polar(1.0, -std::f64::consts::TAU * f * tau)
        * steer(ant, std::f64::consts::PI, scene.antenna_spacing(), f)
}

/// Dynamic (target-reflected) channel term: amplitude decays with the
/// reflected path length, phase advances with it.
pub(crate) fn dynamic_term(
    scene: &Scene<f64>,
    ant: usize,
    s: usize,
    l: f64,
    alpha_r: f64,
) -> Complex64 {
    let f = subcarrier_freq(scene.carrier_freq(), s);
    let amp = 0.2 * scene.d_los() / l;
    Complex64::from_polar(amp, -std::f64::consts::TAU * f * l / SPEED_OF_LIGHT)
        * steer(ant, alpha_r, scene.antenna_spacing(), f)
}

/// Generate the CSI packet stream over the full ground-truth span.
pub fn gen_csi<R: Rng>(
    gt: &GroundTruth,
    cfg: &ScenarioConfig,
    rng: &mut R,
) -> Result<Vec<CsiFrame>, SimError> {
    let scene = cfg.scene.build()?;
    let dt = 1.0 / cfg.csi_rate_hz;
    let n = (gt.end_time * cfg.csi_rate_hz).round() as usize + 1;
    let mut frames = Vec::with_capacity(n);

    // Slowly varying velocity error integrated into a path-length error:
    // an AR(1) process with a 0.5 s correlation time scaled to unit RMS.
    let rho = (-dt / 0.5).exp();
    let mut ar = 0.0f64;
    let mut l_err = 0.0f64;

    for i in 0..n {
        let t = i as f64 * dt;
        let pos = gt.position_at(t);
        let (_, alpha_r) = scene.angles_from_position(pos)?;
        if cfg.noise.doppler_sigma > 0.0 {
            let z: f64 = StandardNormal.sample(rng);
            ar = rho * ar + (1.0 - rho * rho).sqrt() * z;
            l_err += cfg.noise.doppler_sigma * ar * dt;
        }
        let l = scene.path_length(pos) + l_err;

        let mut frame = CsiFrame::new(t);
        let (common, slope) = if cfg.noise.cfo_sfo {
            let z: f64 = StandardNormal.sample(rng);
            (rng.gen_range(0.0..std::f64::consts::TAU), 0.05 * z)
        } else {
            (0.0, 0.0)
        };
        for a in 0..N_ANT {
            for s in 0..N_SUB {
                let mut h = static_term(&scene, a, s) + dynamic_term(&scene, a, s, l, alpha_r);
                if cfg.noise.cfo_sfo {
                    h *= Complex64::from_polar(1.0, common + slope * s as f64);
                }
                if let Some(snr) = cfg.noise.csi_awgn_snr_db {
                    let sigma = 10f64.powf(-snr / 20.0) / 2f64.sqrt();
                    let zr: f64 = StandardNormal.sample(rng);
                    let zi: f64 = StandardNormal.sample(rng);
                    h += Complex64::new(sigma * zr, sigma * zi);
                }
                frame.h[a][s] = h;
            }
        }
        frames.push(frame);
    }
    Ok(frames)
}

/// Gaussian pressure bump along the longitudinal axis, centered at `cop`.
fn bump(layout: &SensorLayout<f64>, cop: f64, p: &mut [f64; N_SENSORS]) {
    const WIDTH: f64 = 0.12;
    for (v, &y) in p.iter_mut().zip(layout.y.iter()) {
        let d = y - cop;
        *v = 0.8 * (-d * d / (2.0 * WIDTH * WIDTH)).exp();
    }
}

fn uniform_stand(p: &mut [f64; N_SENSORS]) {
    for v in p.iter_mut() {
        *v = 0.3;
    }
}

fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * (3.0 - 2.0 * x)
}

fn blend(a: &[f64; N_SENSORS], b: &[f64; N_SENSORS], w: f64) -> [f64; N_SENSORS] {
    let mut out = [0.0; N_SENSORS];
    for i in 0..N_SENSORS {
        out[i] = a[i] * (1.0 - w) + b[i] * w;
    }
    out
}

/// Pressure pattern of one foot at global time t.
fn foot_pressure(
    t: f64,
    toe_offs: &[f64],
    gt: &GroundTruth,
    cfg: &ScenarioConfig,
    layout: &SensorLayout<f64>,
) -> [f64; N_SENSORS] {
    let g = &cfg.gait;
    let mut heel = [0.0; N_SENSORS];
    bump(layout, 0.2, &mut heel);
    let mut fore = [0.0; N_SENSORS];
    bump(layout, 0.85, &mut fore);
    let mut stand = [0.0; N_SENSORS];
    uniform_stand(&mut stand);

    let t_fore = g.lead_heel_s;
    let t_stand = g.lead_heel_s + g.lead_hold_s;

    // Lead-in gesture: heel -> forefoot hold -> flat standing.
    if t < t_fore {
        return heel;
    }
    if t < t_fore + g.transition_s {
        return blend(&heel, &fore, smoothstep((t - t_fore) / g.transition_s));
    }
    if t < t_stand {
        return fore;
    }
    if t < t_stand + g.transition_s {
        return blend(&fore, &stand, smoothstep((t - t_stand) / g.transition_s));
    }

    let first = match toe_offs.first() {
        Some(&f) => f,
        None => return stand,
    };
    let last = *toe_offs.last().unwrap();
    let step_dur = cfg.stride / cfg.speed;
    let cycle = 2.0 * step_dur;
    let swing = g.swing_frac() * cycle;

    // Standing until the push-off ramp ahead of the first toe-off.
    if t < first - g.pushoff_s {
        return stand;
    }
    if t < first {
        let mut push = [0.0; N_SENSORS];
        bump(layout, 0.9, &mut push);
        return blend(&stand, &push, smoothstep((t - (first - g.pushoff_s)) / g.pushoff_s));
    }

    // After the last toe-off: swing, then land and stand.
    if t >= last {
        if t < last + swing {
            return [0.0; N_SENSORS];
        }
        let mut land = [0.0; N_SENSORS];
        bump(layout, 0.1, &mut land);
        let w = smoothstep((t - (last + swing)) / g.transition_s.max(1e-6));
        return blend(&land, &stand, w);
    }

    // Walking: locate the cycle [toe_off_k, toe_off_{k+1}).
    let k = match toe_offs.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
        Ok(i) => i,
        Err(i) => i - 1,
    };
    let t0 = toe_offs[k];
    let t1 = toe_offs.get(k + 1).copied().unwrap_or(gt.end_time);
    let phase = t - t0;
    if phase < swing {
        return [0.0; N_SENSORS];
    }
    // Stance: center of pressure ramps heel to toe.
    let stance = (t1 - t0) - swing;
    let cop = 0.1 + 0.8 * ((phase - swing) / stance).clamp(0.0, 1.0);
    let mut p = [0.0; N_SENSORS];
    bump(layout, cop, &mut p);
    p
}

/// Generate the two pressure streams. The left stream carries global
/// timestamps; the right stream carries its own clock, which lags the
/// global one by `right_clock_offset_s`.
pub fn gen_pressure<R: Rng>(
    gt: &GroundTruth,
    layout: &SensorLayout<f64>,
    cfg: &ScenarioConfig,
    rng: &mut R,
) -> (Vec<PressureFrame<f64>>, Vec<PressureFrame<f64>>) {
    let rate = cfg.pressure_rate_hz;
    let toe_l: Vec<f64> =
        gt.step_times.iter().filter(|s| s.foot == Foot::Left).map(|s| s.t).collect();
    let toe_r: Vec<f64> =
        gt.step_times.iter().filter(|s| s.foot == Foot::Right).map(|s| s.t).collect();

    let mut make = |foot: Foot, toe_offs: &[f64], clock_offset: f64| -> Vec<PressureFrame<f64>> {
        let n = ((gt.end_time - clock_offset) * rate).floor().max(0.0) as usize + 1;
        (0..n)
            .map(|i| {
                let t_local = i as f64 / rate;
                let t_global = t_local + clock_offset;
                let mut p = foot_pressure(t_global, toe_offs, gt, cfg, layout);
                if cfg.noise.pressure_noise > 0.0 {
                    for v in p.iter_mut() {
                        let z: f64 = StandardNormal.sample(rng);
                        *v = (*v * (1.0 + cfg.noise.pressure_noise * z)).max(0.0);
                    }
                }
                PressureFrame { timestamp: t_local, foot, p }
            })
            .collect()
    };

    let left = make(Foot::Left, &toe_l, 0.0);
    let right = make(Foot::Right, &toe_r, cfg.right_clock_offset_s);
    (left, right)
}

/// Derive a randomized straight-walk scenario from a base configuration:
/// random start and heading, fixed walk length of four strides, rejection
/// sampled so the whole walk stays inside the area with margin and away
/// from the tangential blind spot (|path-length derivative| >= 0.3
/// everywhere along the walk).
pub fn randomized_straight_walk(base: &ScenarioConfig, seed: u64) -> Result<ScenarioConfig, SimError> {
    use crate::geometry::doppler_ratio;

    let scene = base.scene.build()?;
    let area = scene.area();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(7);
    let length = 4.0 * base.stride;
    let margin = 0.4;
    let y_floor = 0.4;

    for _ in 0..10_000 {
        let x0 = rng.gen_range(area.x_min + margin..area.x_max - margin);
        let y0 = rng.gen_range((area.y_min + margin).max(y_floor)..area.y_max - margin);
        let phi = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        let (dx, dy) = (phi.cos(), phi.sin());
        let end = Point2::new(x0 + length * dx, y0 + length * dy);
        let inside = |p: Point2<f64>| {
            p.x >= area.x_min + margin
                && p.x <= area.x_max - margin
                && p.y >= (area.y_min + margin).max(y_floor)
                && p.y <= area.y_max - margin
        };
        if !inside(end) {
            continue;
        }
        let mut ok = true;
        let mut d = 0.0;
        while d <= length + 1e-9 {
            let p = Point2::new(x0 + d * dx, y0 + d * dy);
            let (at, ar) = match scene.angles_from_position(p) {
                Ok(v) => v,
                Err(_) => {
                    ok = false;
                    break;
                }
            };
            if doppler_ratio(at, ar, phi).abs() < 0.3 {
                ok = false;
                break;
            }
            d += 0.25 * base.stride;
        }
        if !ok {
            continue;
        }
        let mut cfg = base.clone();
        cfg.seed = seed;
        cfg.waypoints = vec![[x0, y0], [end.x, end.y]];
        return Ok(cfg);
    }
    Err(SimError::BadScenario(
        "could not sample a feasible straight walk in 10000 tries".into(),
    ))
}

/// All streams of one simulated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioBundle {
    pub ground_truth: GroundTruth,
    pub csi: Vec<CsiFrame>,
    pub pressure_left: Vec<PressureFrame<f64>>,
    pub pressure_right: Vec<PressureFrame<f64>>,
}

/// Run one scenario end to end. Deterministic in (cfg, cfg.seed): the
/// CSI and pressure generators draw from independent seeded streams.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioBundle, SimError> {
    let gt = gen_trajectory(cfg)?;
    let mut rng_csi = ChaCha12Rng::seed_from_u64(cfg.seed);
    rng_csi.set_stream(1);
    let mut rng_pressure = ChaCha12Rng::seed_from_u64(cfg.seed);
    rng_pressure.set_stream(2);
    let csi = gen_csi(&gt, cfg, &mut rng_csi)?;
    let layout = SensorLayout::default();
    let (pressure_left, pressure_right) = gen_pressure(&gt, &layout, cfg, &mut rng_pressure);
    Ok(ScenarioBundle { ground_truth: gt, csi, pressure_left, pressure_right })
}
