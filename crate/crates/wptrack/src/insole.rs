//! Dual pressure-insole processing: center-of-pressure, heel-lift
//! synchronization, first-moving-foot detection, step segmentation and
//! walking speed.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::real::Real;

/// Sensors per insole: a 9x5 grid, row 1 at the toe, row-major order.
pub const N_SENSORS: usize = 45;
pub const N_ROWS: usize = 9;
pub const N_COLS: usize = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InsoleError {
    #[error("sync feature (heel-lift gesture) not found")]
    FeatureNotFound,
    #[error("no motion detected in either stream")]
    NoMotionDetected,
    #[error("no steps found")]
    NoStepsFound,
    #[error("invalid layout: {0}")]
    BadLayout(&'static str),
    #[error("invalid step: {0}")]
    BadStep(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Foot {
    Left,
    Right,
}

impl Foot {
    pub fn other(self) -> Self {
        match self {
            Foot::Left => Foot::Right,
            Foot::Right => Foot::Left,
        }
    }
}

impl std::fmt::Display for Foot {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Foot::Left => write!(f, "L"),
            Foot::Right => write!(f, "R"),
        }
    }
}

/// One insole sample: 45 non-negative pressures on the 9x5 grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureFrame<F> {
    pub timestamp: F,
    pub foot: Foot,
    pub p: [F; N_SENSORS],
}

/// Longitudinal coordinate of each sensor, normalized 0 = heel, 1 = toe.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorLayout<F> {
    pub y: [F; N_SENSORS],
}

/// Row-center longitudinal coordinates, row 1 (toe) first. Non-uniform
/// spacing mirrors the denser forefoot sensor placement.
pub const DEFAULT_ROW_Y: [f64; N_ROWS] = [0.95, 0.85, 0.74, 0.62, 0.50, 0.38, 0.26, 0.15, 0.05];

impl<F: Real> SensorLayout<F> {
    /// Layout from per-row longitudinal coordinates (row 1 = toe first).
    pub fn from_rows(rows: &[f64; N_ROWS]) -> Result<Self, InsoleError> {
        for w in rows.windows(2) {
            if w[0] <= w[1] {
                return Err(InsoleError::BadLayout("row coordinates must strictly decrease toe to heel"));
            }
        }
        let mut y = [F::zero(); N_SENSORS];
        for r in 0..N_ROWS {
            for c in 0..N_COLS {
                y[r * N_COLS + c] = F::val(rows[r]);
            }
        }
        Ok(Self { y })
    }
}

impl<F: Real> Default for SensorLayout<F> {
    fn default() -> Self {
        Self::from_rows(&DEFAULT_ROW_Y).unwrap()
    }
}

/// One detected step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepEvent<F> {
    pub t_start: F,
    pub t_end: F,
    pub duration: F,
    pub stride: F,
    pub speed: F,
    pub foot: Foot,
}

/// Thresholds for the gait detectors. All pressures are relative to
/// `full_scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    default,
    deny_unknown_fields,
    bound(serialize = "F: Real + Serialize", deserialize = "F: Real + serde::de::DeserializeOwned")
)]
pub struct InsoleCfg<F> {
    /// Full-scale single-sensor reading.
    pub full_scale: F,
    /// Total pressure below this fraction of full_scale x 45 means airborne.
    pub contact_eps_frac: F,
    /// CoP above this marks the forefoot-only hold of the sync gesture.
    pub forefoot_cop: F,
    /// Required hold duration of the sync gesture in seconds.
    pub sync_hold: F,
    /// Fraction of sync_hold the CoP must actually stay up.
    pub hold_frac: F,
    /// Foot counts as unloaded below this fraction of its standing mean.
    pub unload_frac: F,
    /// Row-1 (toe) sum threshold as a fraction of full scale per sensor.
    pub toe_off_frac: F,
}

impl<F: Real> Default for InsoleCfg<F> {
    fn default() -> Self {
        Self {
            full_scale: F::one(),
            contact_eps_frac: F::val(0.01),
            forefoot_cop: F::val(0.6),
            sync_hold: F::val(3.0),
            hold_frac: F::val(0.8),
            unload_frac: F::val(0.1),
            toe_off_frac: F::val(0.05),
        }
    }
}

/// Longitudinal center of pressure, or None when the foot is airborne.
pub fn cop_y<F: Real>(
    frame: &PressureFrame<F>,
    layout: &SensorLayout<F>,
    cfg: &InsoleCfg<F>,
) -> Option<F> {
    let total: F = frame.p.iter().fold(F::zero(), |a, &b| a + b);
    let eps = cfg.contact_eps_frac * cfg.full_scale * F::val(N_SENSORS as f64);
    if total <= eps {
        return None;
    }
    let weighted: F = frame
        .p
        .iter()
        .zip(layout.y.iter())
        .fold(F::zero(), |a, (&p, &y)| a + p * y);
    Some(weighted / total)
}

/// Instant the heel-lift gesture starts: first rise of CoP above the
/// forefoot threshold that is held for at least hold_frac x sync_hold.
pub fn detect_sync_feature<F: Real>(
    stream: &[PressureFrame<F>],
    layout: &SensorLayout<F>,
    cfg: &InsoleCfg<F>,
) -> Result<F, InsoleError> {
    if stream.len() < 2 {
        return Err(InsoleError::FeatureNotFound);
    }
    let need = cfg.sync_hold * cfg.hold_frac;
    let mut rise: Option<(F, F)> = None; // (rise time, last time still up)
    for f in stream {
        let up = cop_y(f, layout, cfg).map_or(false, |c| c > cfg.forefoot_cop);
        match (&mut rise, up) {
            (None, true) => rise = Some((f.timestamp, f.timestamp)),
            (Some((t0, t_last)), true) => {
                *t_last = f.timestamp;
                if *t_last - *t0 >= need {
                    return Ok(*t0);
                }
            }
            (Some((t0, t_last)), false) => {
                if *t_last - *t0 >= need {
                    return Ok(*t0);
                }
                rise = None;
            }
            (None, false) => {}
        }
    }
    if let Some((t0, t_last)) = rise {
        if t_last - t0 >= need {
            return Ok(t0);
        }
    }
    Err(InsoleError::FeatureNotFound)
}

/// Clock offset between the two insoles: how much must be added to the
/// right stream's timestamps so the sync gestures coincide.
pub fn align_streams<F: Real>(
    left: &[PressureFrame<F>],
    right: &[PressureFrame<F>],
    layout: &SensorLayout<F>,
    cfg: &InsoleCfg<F>,
) -> Result<F, InsoleError> {
    let t_left = detect_sync_feature(left, layout, cfg)?;
    let t_right = detect_sync_feature(right, layout, cfg)?;
    Ok(t_left - t_right)
}

/// Shift every timestamp by `offset`.
pub fn shift_stream<F: Real>(stream: &mut [PressureFrame<F>], offset: F) {
    for f in stream {
        f.timestamp += offset;
    }
}

/// Linear interpolation of a stream onto a uniform grid.
pub fn resample<F: Real>(stream: &[PressureFrame<F>], t0: F, rate: F, n: usize) -> Vec<PressureFrame<F>> {
    let mut out = Vec::with_capacity(n);
    if stream.is_empty() {
        return out;
    }
    let mut j = 0usize;
    for i in 0..n {
        let t = t0 + F::val(i as f64) / rate;
        while j + 1 < stream.len() && stream[j + 1].timestamp <= t {
            j += 1;
        }
        let frame = if j + 1 >= stream.len() || t <= stream[j].timestamp {
            let mut f = stream[j.min(stream.len() - 1)].clone();
            f.timestamp = t;
            f
        } else {
            let (a, b) = (&stream[j], &stream[j + 1]);
            let w = (t - a.timestamp) / (b.timestamp - a.timestamp);
            let mut p = [F::zero(); N_SENSORS];
            for k in 0..N_SENSORS {
                p[k] = a.p[k] * (F::one() - w) + b.p[k] * w;
            }
            PressureFrame { timestamp: t, foot: a.foot, p }
        };
        out.push(frame);
    }
    out
}

fn total_pressure<F: Real>(f: &PressureFrame<F>) -> F {
    f.p.iter().fold(F::zero(), |a, &b| a + b)
}

/// Which foot unloads first after the hint time. Ties within one sample
/// break to Left.
pub fn detect_first_moving_foot<F: Real>(
    left: &[PressureFrame<F>],
    right: &[PressureFrame<F>],
    t_hint: F,
    cfg: &InsoleCfg<F>,
) -> Result<Foot, InsoleError> {
    let unload_time = |stream: &[PressureFrame<F>]| -> Option<F> {
        // Standing mean over the second before the hint.
        let mut sum = F::zero();
        let mut count = 0usize;
        for f in stream {
            if f.timestamp <= t_hint && f.timestamp >= t_hint - F::one() {
                sum += total_pressure(f);
                count += 1;
            }
        }
        if count == 0 {
            return None;
        }
        let threshold = cfg.unload_frac * sum / F::val(count as f64);
        stream
            .iter()
            .find(|f| f.timestamp > t_hint && total_pressure(f) < threshold)
            .map(|f| f.timestamp)
    };
    let tl = unload_time(left);
    let tr = unload_time(right);
    // One sample period, estimated from the left stream.
    let sample = if left.len() > 1 {
        (left.last().unwrap().timestamp - left[0].timestamp) / F::val((left.len() - 1) as f64)
    } else {
        F::val(0.02)
    };
    match (tl, tr) {
        (Some(a), Some(b)) => {
            if b - a > -sample {
                Ok(Foot::Left)
            } else {
                Ok(Foot::Right)
            }
        }
        (Some(_), None) => Ok(Foot::Left),
        (None, Some(_)) => Ok(Foot::Right),
        (None, None) => Err(InsoleError::NoMotionDetected),
    }
}

/// Toe-off instants: falling edges of the row-1 (toe) pressure sum.
pub fn toe_off_times<F: Real>(stream: &[PressureFrame<F>], after: F, cfg: &InsoleCfg<F>) -> Vec<F> {
    let threshold = cfg.toe_off_frac * cfg.full_scale * F::val(N_COLS as f64);
    let row1 = |f: &PressureFrame<F>| f.p[..N_COLS].iter().fold(F::zero(), |a, &b| a + b);
    let mut out = Vec::new();
    let mut was_above = false;
    for f in stream {
        let above = row1(f) > threshold;
        if was_above && !above && f.timestamp > after {
            out.push(f.timestamp);
        }
        was_above = above;
    }
    out
}

/// Segment the walk into steps: each step starts at one foot's toe-off
/// and ends at the other foot's. Steps must alternate feet.
pub fn segment_steps<F: Real>(
    left: &[PressureFrame<F>],
    right: &[PressureFrame<F>],
    from_time: F,
    cfg: &InsoleCfg<F>,
) -> Result<Vec<StepEvent<F>>, InsoleError> {
    let mut events: Vec<(F, Foot)> = toe_off_times(left, from_time, cfg)
        .into_iter()
        .map(|t| (t, Foot::Left))
        .chain(toe_off_times(right, from_time, cfg).into_iter().map(|t| (t, Foot::Right)))
        .collect();
    events.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    if events.len() < 2 {
        return Err(InsoleError::NoStepsFound);
    }
    let mut steps = Vec::new();
    for w in events.windows(2) {
        let (t0, foot) = w[0];
        let (t1, next_foot) = w[1];
        if next_foot == foot {
            // Same foot twice: gait irregularity, skip the interval.
            continue;
        }
        if t1 <= t0 {
            continue;
        }
        steps.push(StepEvent {
            t_start: t0,
            t_end: t1,
            duration: t1 - t0,
            stride: F::zero(),
            speed: F::zero(),
            foot,
        });
    }
    if steps.is_empty() {
        return Err(InsoleError::NoStepsFound);
    }
    Ok(steps)
}

/// Attach the per-user stride constant; speed = stride / duration.
pub fn attach_stride<F: Real>(
    steps: &[StepEvent<F>],
    stride: F,
) -> Result<Vec<StepEvent<F>>, InsoleError> {
    if !(stride > F::zero()) {
        return Err(InsoleError::BadStep("stride must be positive"));
    }
    steps
        .iter()
        .map(|s| {
            if !(s.duration > F::zero()) {
                return Err(InsoleError::BadStep("non-positive step duration"));
            }
            Ok(StepEvent { stride, speed: stride / s.duration, ..*s })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn frame(t: f64, foot: Foot, mut fill: impl FnMut(usize) -> f64) -> PressureFrame<f64> {
        let mut p = [0.0; N_SENSORS];
        for (i, v) in p.iter_mut().enumerate() {
            *v = fill(i);
        }
        PressureFrame { timestamp: t, foot, p }
    }

    /// Gaussian pressure bump centered at a given CoP position.
    fn bump(cop: f64) -> impl Fn(usize) -> f64 {
        let layout = SensorLayout::<f64>::default();
        move |i| {
            let d = layout.y[i] - cop;
            0.8 * (-d * d / (2.0 * 0.12 * 0.12)).exp()
        }
    }

    fn cfg() -> InsoleCfg<f64> {
        InsoleCfg::default()
    }

    #[test]
    fn cop_single_sensor() {
        let mut layout = SensorLayout::<f64>::default();
        layout.y[7] = 0.8;
        let f = frame(0.0, Foot::Left, |i| if i == 7 { 10.0 } else { 0.0 });
        assert!((cop_y(&f, &layout, &cfg()).unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn cop_two_sensors_midpoint() {
        let mut layout = SensorLayout::<f64>::default();
        layout.y[0] = 0.2;
        layout.y[1] = 0.6;
        let f = frame(0.0, Foot::Left, |i| if i < 2 { 3.0 } else { 0.0 });
        assert!((cop_y(&f, &layout, &cfg()).unwrap() - 0.4).abs() < 1e-12);
    }

    #[test]
    fn cop_airborne_is_none() {
        let f = frame(0.0, Foot::Left, |_| 0.0);
        assert!(cop_y(&f, &SensorLayout::default(), &cfg()).is_none());
    }

    fn gesture_stream(heel_s: f64, fore_s: f64, rate: f64) -> Vec<PressureFrame<f64>> {
        let n = ((heel_s + fore_s) * rate) as usize;
        (0..n)
            .map(|i| {
                let t = i as f64 / rate;
                let cop = if t < heel_s { 0.2 } else { 0.85 };
                frame(t, Foot::Left, bump(cop))
            })
            .collect()
    }

    #[test]
    fn sync_feature_detected_at_rise() {
        let stream = gesture_stream(2.0, 3.0, 50.0);
        let t = detect_sync_feature(&stream, &SensorLayout::default(), &cfg()).unwrap();
        assert!((t - 2.0).abs() <= 0.02 + 1e-9, "detected {}", t);
    }

    #[test]
    fn short_hold_not_found() {
        let stream = gesture_stream(2.0, 1.0, 50.0);
        assert_eq!(
            detect_sync_feature(&stream, &SensorLayout::default(), &cfg()),
            Err(InsoleError::FeatureNotFound)
        );
    }

    #[test]
    fn flat_standing_not_found() {
        let stream: Vec<_> = (0..300).map(|i| frame(i as f64 / 50.0, Foot::Left, bump(0.45))).collect();
        assert_eq!(
            detect_sync_feature(&stream, &SensorLayout::default(), &cfg()),
            Err(InsoleError::FeatureNotFound)
        );
    }

    #[test]
    fn align_recovers_clock_offset() {
        let layout = SensorLayout::default();
        let left = gesture_stream(2.0, 3.0, 50.0);
        let mut right = gesture_stream(2.0, 3.0, 50.0);
        // Right insole started 0.5 s late: its clock lags.
        shift_stream(&mut right, -0.5);
        let off = align_streams(&left, &right, &layout, &cfg()).unwrap();
        assert!((off - 0.5).abs() <= 0.02 + 1e-9, "offset {}", off);

        let zero = align_streams(&left, &left.clone(), &layout, &cfg()).unwrap();
        assert!(zero.abs() <= 0.02 + 1e-9);

        // Antisymmetry.
        let back = align_streams(&right, &left, &layout, &cfg()).unwrap();
        assert!((off + back).abs() <= 0.02 + 1e-9);
    }

    #[test]
    fn align_missing_gesture() {
        let left = gesture_stream(2.0, 3.0, 50.0);
        let flat: Vec<_> = (0..300).map(|i| frame(i as f64 / 50.0, Foot::Right, bump(0.45))).collect();
        assert_eq!(
            align_streams(&left, &flat, &SensorLayout::default(), &cfg()),
            Err(InsoleError::FeatureNotFound)
        );
    }

    /// Standing, then one foot unloads at t_l, other at t_r.
    fn unload_stream(foot: Foot, t_unload: f64) -> Vec<PressureFrame<f64>> {
        (0..400)
            .map(|i| {
                let t = i as f64 / 50.0;
                if t < t_unload {
                    frame(t, foot, bump(0.45))
                } else {
                    frame(t, foot, |_| 0.0)
                }
            })
            .collect()
    }

    #[test]
    fn first_moving_foot() {
        let left = unload_stream(Foot::Left, 5.0);
        let right = unload_stream(Foot::Right, 5.6);
        assert_eq!(detect_first_moving_foot(&left, &right, 4.0, &cfg()).unwrap(), Foot::Left);
        assert_eq!(detect_first_moving_foot(&right, &left, 4.0, &cfg()).unwrap(), Foot::Right);
    }

    #[test]
    fn simultaneous_unload_ties_left() {
        let left = unload_stream(Foot::Left, 5.0);
        let right = unload_stream(Foot::Right, 5.0);
        assert_eq!(detect_first_moving_foot(&left, &right, 4.0, &cfg()).unwrap(), Foot::Left);
    }

    #[test]
    fn no_motion() {
        let left = unload_stream(Foot::Left, 1e9);
        let right = unload_stream(Foot::Right, 1e9);
        assert_eq!(
            detect_first_moving_foot(&left, &right, 4.0, &cfg()),
            Err(InsoleError::NoMotionDetected)
        );
    }

    /// Loaded toe (cop 0.9), with toe-off (all zero) at given instants;
    /// re-loads 0.3 s after each toe-off.
    fn gait_stream(foot: Foot, toe_offs: &[f64], t_end: f64) -> Vec<PressureFrame<f64>> {
        let n = (t_end * 50.0) as usize;
        (0..n)
            .map(|i| {
                let t = i as f64 / 50.0;
                let airborne = toe_offs.iter().any(|&to| t >= to && t < to + 0.3);
                if airborne {
                    frame(t, foot, |_| 0.0)
                } else {
                    frame(t, foot, bump(0.9))
                }
            })
            .collect()
    }

    #[test]
    fn two_step_segmentation() {
        let left = gait_stream(Foot::Left, &[1.0], 3.0);
        let right = gait_stream(Foot::Right, &[1.6], 3.0);
        let steps = segment_steps(&left, &right, 0.5, &cfg()).unwrap();
        assert_eq!(steps.len(), 1);
        let s = steps[0];
        assert_eq!(s.foot, Foot::Left);
        assert!((s.t_start - 1.0).abs() <= 0.02 + 1e-9);
        assert!((s.t_end - 1.6).abs() <= 0.02 + 1e-9);
        assert!((s.duration - 0.6).abs() <= 0.04 + 1e-9);
    }

    #[test]
    fn standing_still_no_steps() {
        let left = gait_stream(Foot::Left, &[], 3.0);
        let right = gait_stream(Foot::Right, &[], 3.0);
        assert_eq!(segment_steps(&left, &right, 0.0, &cfg()), Err(InsoleError::NoStepsFound));
    }

    #[test]
    fn four_toe_offs_three_steps_alternating() {
        let left = gait_stream(Foot::Left, &[1.0, 2.2], 4.0);
        let right = gait_stream(Foot::Right, &[1.6, 2.8], 4.0);
        let steps = segment_steps(&left, &right, 0.5, &cfg()).unwrap();
        assert_eq!(steps.len(), 3);
        let feet: Vec<Foot> = steps.iter().map(|s| s.foot).collect();
        assert_eq!(feet, vec![Foot::Left, Foot::Right, Foot::Left]);
        // Non-overlapping.
        for w in steps.windows(2) {
            assert!(w[1].t_start >= w[0].t_end - 1e-9);
        }
    }

    #[test]
    fn attach_stride_speed() {
        let steps: Vec<StepEvent<f64>> = vec![
            StepEvent { t_start: 0.0, t_end: 0.5, duration: 0.5, stride: 0.0, speed: 0.0, foot: Foot::Left },
            StepEvent { t_start: 0.5, t_end: 0.75, duration: 0.25, stride: 0.0, speed: 0.0, foot: Foot::Right },
        ];
        let out = attach_stride(&steps, 0.5).unwrap();
        assert!((out[0].speed - 1.0).abs() < 1e-12);
        assert!((out[1].speed - 2.0).abs() < 1e-12);

        let bad = vec![StepEvent { t_start: 1.0, t_end: 1.0, duration: 0.0, stride: 0.0, speed: 0.0, foot: Foot::Left }];
        assert!(attach_stride(&bad, 0.5).is_err());
        assert!(attach_stride(&steps, 0.0).is_err());
    }

    proptest! {
        /// CoP is a convex combination of the sensor coordinates and is
        /// scale invariant.
        #[test]
        fn cop_convex_and_scale_invariant(
            seed in 0u64..1000,
            k in 0.01f64..100.0,
        ) {
            use rand::rngs::StdRng;
            use rand::{Rng, SeedableRng};
            let mut rng = StdRng::seed_from_u64(seed);
            let layout = SensorLayout::<f64>::default();
            let f = frame(0.0, Foot::Left, |_| rng.gen_range(0.0..1.0));
            if let Some(c) = cop_y(&f, &layout, &cfg()) {
                let lo = layout.y.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = layout.y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(c >= lo - 1e-12 && c <= hi + 1e-12);
                let mut scaled = f.clone();
                for p in scaled.p.iter_mut() { *p *= k; }
                if let Some(c2) = cop_y(&scaled, &layout, &cfg()) {
                    prop_assert!((c - c2).abs() < 1e-9);
                }
            }
        }
    }
}
