//! CSI-pressure fusion: per-step measurement tuples, the ellipse/line/
//! velocity-ratio objective, initial-state estimation by coarse-to-fine
//! search, and step-by-step tracking.
//!
//! The ellipse term is anchored to the measured path-length change
//! (predicted L at the next step = geometric L at the candidate plus the
//! integrated Doppler), the line term to the measured arrival angle at
//! the receiver, and the ratio term to the per-step mean Doppler-to-
//! walking-velocity ratio. Angle-dependent terms are evaluated at the
//! step midpoint, matching the per-step averaging of the measurements.

use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{
    doppler_ratio, ellipse_from_path_length, GeometryError, Point2, Scene, TargetState,
};
use crate::insole::StepEvent;
use crate::real::{wrap_angle, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FusionError {
    #[error("no feasible state: {0}")]
    NoFeasibleState(String),
    #[error("track lost at step {step}: residual {residual} above threshold for 2 consecutive steps")]
    TrackLost { step: usize, residual: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Fused per-step measurement tuple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepMeasurement<F> {
    pub step: StepEvent<F>,
    /// Integrated reflected-path length change over the step, meters.
    pub delta_l: F,
    /// Mean Doppler velocity over the step divided by walking speed,
    /// clamped to [-2, 2].
    pub v_ratio: F,
    /// Arrival angle of the reflected path at the receiver, if measurable.
    pub alpha_r: Option<F>,
    /// Fraction of Doppler windows in the step with a dominant peak.
    pub confidence: F,
}

/// Weights, noise scales and search resolutions for the fusion solver.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(
    default,
    deny_unknown_fields,
    bound(serialize = "F: Real + serde::Serialize", deserialize = "F: Real + serde::de::DeserializeOwned")
)]
pub struct FusionConfig<F> {
    pub w_ellipse: F,
    pub w_line: F,
    pub w_ratio: F,
    /// Path-length measurement noise scale (normalizes the ellipse term).
    pub sigma_l: F,
    /// Velocity-ratio noise scale (normalizes the ratio term).
    pub sigma_ratio: F,
    /// Line-term noise scale in meters.
    pub sigma_line: F,
    /// Coarse grid resolution in meters.
    pub grid_xy: F,
    /// Coarse grid resolution in radians.
    pub grid_phi: F,
    /// Local refinement stops when the simplex spread falls below this.
    pub refine_tol: F,
    /// Candidates with |y| below this are excluded (reflection geometry
    /// degenerates on the LoS line).
    pub y_min: F,
    /// Number of leading steps used for the initial estimate.
    pub window_steps: usize,
    /// Number of best grid cells refined by simplex descent.
    pub refine_starts: usize,
    /// Two consecutive steps above this residual lose the track.
    pub track_lost_residual: F,
    /// Steps with Doppler confidence below this are considered blind.
    pub min_confidence: F,
    /// Heading candidates within this of the per-step minimum residual
    /// are tie-broken toward the previous heading.
    pub phi_tie_margin: F,
    /// Steps whose Doppler confidence falls below this keep only the
    /// arrival-angle line term: a partially covered step (e.g. at motion
    /// onset) yields a path-length change that is biased low, so its
    /// ellipse and ratio terms would drag the whole window estimate.
    pub full_doppler_confidence: F,
}

impl<F: Real> Default for FusionConfig<F> {
    fn default() -> Self {
        Self {
            w_ellipse: F::one(),
            w_line: F::one(),
            w_ratio: F::one(),
            sigma_l: F::val(0.05),
            sigma_ratio: F::val(0.1),
            sigma_line: F::val(0.05),
            grid_xy: F::val(0.1),
            grid_phi: F::val(5.0f64.to_radians()),
            refine_tol: F::val(1e-9),
            y_min: F::val(0.05),
            window_steps: 4,
            refine_starts: 10,
            track_lost_residual: F::val(10.0),
            min_confidence: F::val(0.2),
            phi_tie_margin: F::val(0.5),
            full_doppler_confidence: F::val(0.9),
        }
    }
}

/// One tracked state with timestamp and objective residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackPoint<F> {
    pub t: F,
    pub state: TargetState<F>,
    pub residual: F,
}

/// Estimated trajectory: one state per step plus the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<F> {
    pub points: Vec<TrackPoint<F>>,
}

/// Weighted per-step residual of a candidate state against one fused
/// measurement. Zero at the true state under noiseless measurements.
pub fn objective<F: Real>(
    state: &TargetState<F>,
    meas: &StepMeasurement<F>,
    scene: &Scene<F>,
    cfg: &FusionConfig<F>,
) -> Result<F, FusionError> {
    let d = meas.step.stride;
    let next = state.propagate(d);
    let mid = state.propagate(d * F::half());

    // Ellipse term: the propagated point must lie on the ellipse whose
    // path length is the candidate's geometric L plus the measured change.
    let l_pred = scene.path_length(state.pos()) + meas.delta_l;
    let ellipse = ellipse_from_path_length(l_pred, scene.d_los())?;
    let t1 = (ellipse.eval(next.pos()) - F::one()).abs();
    let t1 = t1 * ellipse.a / (F::two() * cfg.sigma_l);

    // Line term: the midpoint must lie on the line through the receiver
    // at the measured arrival angle. Skipped without an AoA measurement
    // or when the line is near vertical (tan blows up).
    let t2 = match meas.alpha_r {
        Some(alpha) if alpha.cos().abs() > F::val(0.05) => {
            (mid.y - alpha.tan() * (mid.x - scene.d_los())).abs() / cfg.sigma_line
        }
        _ => F::zero(),
    };

    // Ratio term at the step midpoint, approximating the per-step mean.
    let (alpha_t, alpha_r) = scene.angles_from_position(mid.pos())?;
    let t3 = (doppler_ratio(alpha_t, alpha_r, state.phi) - meas.v_ratio).abs()
        / (F::two() * cfg.sigma_ratio);

    // Partially covered Doppler (unconfident windows inside the step)
    // underestimates delta_l and v_ratio; keep only the line term then.
    if meas.confidence < cfg.full_doppler_confidence {
        return Ok(cfg.w_line * t2);
    }
    Ok(cfg.w_ellipse * t1 + cfg.w_line * t2 + cfg.w_ratio * t3)
}

/// Sum of per-step objectives over a window, propagating the candidate
/// cumulatively by each step's stride at a fixed heading.
/// None when any step hits degenerate geometry or the exclusion margin.
pub fn window_objective<F: Real>(
    start: &TargetState<F>,
    window: &[StepMeasurement<F>],
    scene: &Scene<F>,
    cfg: &FusionConfig<F>,
) -> Option<F> {
    let mut state = *start;
    let mut total = F::zero();
    for m in window {
        if state.y.abs() < cfg.y_min {
            return None;
        }
        match objective(&state, m, scene, cfg) {
            Ok(v) => total += v,
            Err(_) => return None,
        }
        state = state.propagate(m.step.stride);
    }
    if total.is_finite() {
        Some(total)
    } else {
        None
    }
}

fn grid_axis<F: Real>(lo: F, hi: F, step: F) -> Vec<F> {
    let mut out = Vec::new();
    let mut v = lo + step * F::half();
    while v < hi {
        out.push(v);
        v += step;
    }
    if out.is_empty() {
        out.push((lo + hi) * F::half());
    }
    out
}

fn phi_axis<F: Real>(step: F) -> Vec<F> {
    let n = ((F::two() * F::pi()) / step).round().to_f64().unwrap() as usize;
    let n = n.max(1);
    (0..n)
        .map(|k| wrap_angle(-F::pi() + F::val(k as f64 + 1.0) * F::two() * F::pi() / F::val(n as f64)))
        .collect()
}

/// Nelder-Mead descent in (x, y, phi). Infeasible points get a large
/// penalty that grows away from the feasible region, so the simplex is
/// pushed back inside. Never returns a value above the starting one.
fn refine_simplex<F: Real>(
    start: TargetState<F>,
    start_val: F,
    window: &[StepMeasurement<F>],
    scene: &Scene<F>,
    cfg: &FusionConfig<F>,
) -> (TargetState<F>, F) {
    let area = scene.area();
    let eval = |p: &[F; 3]| -> F {
        let s = TargetState::new(p[0], p[1], p[2]);
        let mut penalty = F::zero();
        if s.x < area.x_min {
            penalty += area.x_min - s.x;
        }
        if s.x > area.x_max {
            penalty += s.x - area.x_max;
        }
        if s.y < area.y_min {
            penalty += area.y_min - s.y;
        }
        if s.y > area.y_max {
            penalty += s.y - area.y_max;
        }
        if penalty > F::zero() {
            return F::val(1e9) * (F::one() + penalty);
        }
        window_objective(&s, window, scene, cfg).unwrap_or_else(|| F::val(1e9))
    };

    let h_xy = cfg.grid_xy * F::half();
    let h_phi = cfg.grid_phi * F::half();
    let mut simplex: Vec<([F; 3], F)> = vec![
        ([start.x, start.y, start.phi], start_val),
        ([start.x + h_xy, start.y, start.phi], F::zero()),
        ([start.x, start.y + h_xy, start.phi], F::zero()),
        ([start.x, start.y, start.phi + h_phi], F::zero()),
    ];
    for i in 1..4 {
        simplex[i].1 = eval(&simplex[i].0);
    }

    let (alpha, gamma, rho, sigma) = (F::one(), F::two(), F::half(), F::half());
    for _ in 0..400 {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let spread = simplex[3].1 - simplex[0].1;
        let size = (0..3).fold(F::zero(), |acc, k| {
            acc + (simplex[3].0[k] - simplex[0].0[k]).abs()
        });
        if spread < cfg.refine_tol && size < cfg.refine_tol * F::val(1e3) {
            break;
        }
        let mut centroid = [F::zero(); 3];
        for v in &simplex[..3] {
            for k in 0..3 {
                centroid[k] += v.0[k] / F::val(3.0);
            }
        }
        let worst = simplex[3];
        let mut reflect = [F::zero(); 3];
        for k in 0..3 {
            reflect[k] = centroid[k] + alpha * (centroid[k] - worst.0[k]);
        }
        let fr = eval(&reflect);
        if fr < simplex[0].1 {
            let mut expand = [F::zero(); 3];
            for k in 0..3 {
                expand[k] = centroid[k] + gamma * (reflect[k] - centroid[k]);
            }
            let fe = eval(&expand);
            simplex[3] = if fe < fr { (expand, fe) } else { (reflect, fr) };
        } else if fr < simplex[2].1 {
            simplex[3] = (reflect, fr);
        } else {
            let mut contract = [F::zero(); 3];
            for k in 0..3 {
                contract[k] = centroid[k] + rho * (worst.0[k] - centroid[k]);
            }
            let fc = eval(&contract);
            if fc < worst.1 {
                simplex[3] = (contract, fc);
            } else {
                let best = simplex[0];
                for v in simplex.iter_mut().skip(1) {
                    for k in 0..3 {
                        v.0[k] = best.0[k] + sigma * (v.0[k] - best.0[k]);
                    }
                    v.1 = eval(&v.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    let best = simplex[0];
    if best.1 <= start_val {
        (TargetState::new(best.0[0], best.0[1], best.0[2]), best.1)
    } else {
        (start, start_val)
    }
}

/// Estimate the initial state over the leading measurement window:
/// coarse grid over the scene area, then simplex refinement from the
/// best cells.
pub fn estimate_initial_state<F: Real>(
    meas: &[StepMeasurement<F>],
    scene: &Scene<F>,
    cfg: &FusionConfig<F>,
) -> Result<(TargetState<F>, F), FusionError> {
    let window: &[StepMeasurement<F>] = &meas[..meas.len().min(cfg.window_steps.max(2))];
    if window.len() < 2 {
        return Err(FusionError::NoFeasibleState(format!(
            "initial window needs at least 2 steps, got {}",
            window.len()
        )));
    }
    if window.iter().all(|m| m.confidence < cfg.min_confidence) {
        return Err(FusionError::NoFeasibleState(
            "all Doppler measurements in the initial window are low-confidence (tangential blind spot)"
                .into(),
        ));
    }

    let area = scene.area();
    let xs = grid_axis(area.x_min, area.x_max, cfg.grid_xy);
    let ys: Vec<F> = grid_axis(area.y_min, area.y_max, cfg.grid_xy)
        .into_iter()
        .filter(|y| y.abs() >= cfg.y_min)
        .collect();
    let phis = phi_axis(cfg.grid_phi);
    if ys.is_empty() {
        return Err(FusionError::NoFeasibleState("area fully inside exclusion margin".into()));
    }

    // Best cells per x column, evaluated in parallel.
    let k = cfg.refine_starts.max(1);
    let mut candidates: Vec<(F, TargetState<F>)> = xs
        .par_iter()
        .map(|&x| {
            let mut local: Vec<(F, TargetState<F>)> = Vec::new();
            for &y in &ys {
                for &phi in &phis {
                    let s = TargetState::new(x, y, phi);
                    if let Some(v) = window_objective(&s, window, scene, cfg) {
                        local.push((v, s));
                        local.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
                        local.truncate(k);
                    }
                }
            }
            local
        })
        .reduce(Vec::new, |mut a, b| {
            a.extend(b);
            a.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
            a.truncate(k);
            a
        });

    if candidates.is_empty() {
        return Err(FusionError::NoFeasibleState(
            "every grid cell was degenerate or excluded".into(),
        ));
    }
    candidates.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let mut best: Option<(TargetState<F>, F)> = None;
    for (v0, s0) in candidates {
        let (s, v) = refine_simplex(s0, v0, window, scene, cfg);
        if best.as_ref().map_or(true, |(_, bv)| v < *bv) {
            best = Some((s, v));
        }
    }
    best.ok_or_else(|| FusionError::NoFeasibleState("refinement produced no state".into()))
}

/// Re-estimate the heading for one step by 1D search: coarse 2-degree
/// grid, tie-break toward the previous heading among near-minimal local
/// minima, then golden-section refinement.
fn estimate_step_heading<F: Real>(
    pos: Point2<F>,
    prev_phi: F,
    meas: &StepMeasurement<F>,
    scene: &Scene<F>,
    cfg: &FusionConfig<F>,
) -> Option<(F, F)> {
    let eval = |phi: F| -> Option<F> {
        let s = TargetState::new(pos.x, pos.y, phi);
        objective(&s, meas, scene, cfg).ok().filter(|v| v.is_finite())
    };
    let step = F::val(2.0f64.to_radians());
    let phis = phi_axis(step);
    let n = phis.len();
    let vals: Vec<Option<F>> = phis.iter().map(|&p| eval(p)).collect();
    let min_val = vals
        .iter()
        .filter_map(|v| *v)
        .fold(F::infinity(), |a, b| if b < a { b } else { a });
    if !min_val.is_finite() {
        return None;
    }
    // Local minima on the circular grid within the tie margin.
    let mut chosen: Option<(F, F)> = None; // (angular distance to prev, phi)
    for i in 0..n {
        let v = match vals[i] {
            Some(v) => v,
            None => continue,
        };
        let prev = vals[(i + n - 1) % n].unwrap_or(F::infinity());
        let next = vals[(i + 1) % n].unwrap_or(F::infinity());
        if v <= prev && v <= next && v <= min_val + cfg.phi_tie_margin {
            let dist = wrap_angle(phis[i] - prev_phi).abs();
            if chosen.map_or(true, |(d, _)| dist < d) {
                chosen = Some((dist, phis[i]));
            }
        }
    }
    let (_, phi0) = chosen?;

    let (phi, v) = golden_min(&eval, phi0 - step, phi0 + step);
    if v <= min_val {
        Some((phi, v))
    } else {
        Some((phi0, min_val))
    }
}

/// Golden-section minimization of an angular objective on [a, b];
/// returns (wrapped angle, value).
fn golden_min<F: Real>(eval: &impl Fn(F) -> Option<F>, mut a: F, mut b: F) -> (F, F) {
    let gr = F::val(0.618_033_988_749_894_8);
    let mut c = b - gr * (b - a);
    let mut d = a + gr * (b - a);
    let mut fc = eval(wrap_angle(c)).unwrap_or(F::infinity());
    let mut fd = eval(wrap_angle(d)).unwrap_or(F::infinity());
    for _ in 0..60 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = eval(wrap_angle(c)).unwrap_or(F::infinity());
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = eval(wrap_angle(d)).unwrap_or(F::infinity());
        }
        if (b - a).abs() < F::val(1e-9) {
            break;
        }
    }
    let phi = wrap_angle((a + b) * F::half());
    (phi, eval(phi).unwrap_or(F::infinity()))
}

/// Continuous minimum of an angular objective over the full circle:
/// coarse scan at `scan_step`, then golden-section refinement around the
/// three best local minima. Returns (phi, value).
fn min_over_phi<F: Real>(eval: &impl Fn(F) -> Option<F>, scan_step: F) -> Option<(F, F)> {
    let phis = phi_axis(scan_step);
    let n = phis.len();
    let vals: Vec<Option<F>> = phis.iter().map(|&p| eval(p)).collect();
    let mut cands: Vec<(F, F)> = Vec::new(); // (value, phi)
    for i in 0..n {
        let v = match vals[i] {
            Some(v) => v,
            None => continue,
        };
        let prev = vals[(i + n - 1) % n].unwrap_or(F::infinity());
        let next = vals[(i + 1) % n].unwrap_or(F::infinity());
        if v <= prev && v <= next {
            cands.push((v, phis[i]));
        }
    }
    cands.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    cands.truncate(3);
    let mut best: Option<(F, F)> = None;
    for &(v0, p0) in &cands {
        let (p, v) = golden_min(eval, p0 - scan_step, p0 + scan_step);
        let (p, v) = if v <= v0 { (p, v) } else { (p0, v0) };
        if best.map_or(true, |(_, bv)| v < bv) {
            best = Some((p, v));
        }
    }
    best
}

/// Track the target step by step from an initial state: per step, hold
/// the position, re-estimate the heading, then advance by the stride.
pub fn track<F: Real>(
    initial: TargetState<F>,
    meas: &[StepMeasurement<F>],
    scene: &Scene<F>,
    cfg: &FusionConfig<F>,
) -> Result<Trajectory<F>, FusionError> {
    let t0 = meas.first().map_or(F::zero(), |m| m.step.t_start);
    let mut points = vec![TrackPoint { t: t0, state: initial, residual: F::zero() }];
    let mut state = initial;
    let mut lost = 0usize;
    for (k, m) in meas.iter().enumerate() {
        let (phi, residual) = match estimate_step_heading(state.pos(), state.phi, m, scene, cfg) {
            Some(r) => r,
            None => (state.phi, cfg.track_lost_residual + F::one()),
        };
        if residual > cfg.track_lost_residual {
            lost += 1;
            if lost >= 2 {
                return Err(FusionError::TrackLost {
                    step: k,
                    residual: residual.to_f64().unwrap_or(f64::NAN),
                });
            }
        } else {
            lost = 0;
        }
        state = TargetState::new(state.x, state.y, phi).propagate(m.step.stride);
        points.push(TrackPoint { t: m.step.t_end, state, residual });
    }
    Ok(Trajectory { points })
}

/// Oracle search resolution (tests and verification only). `grid_phi`
/// is the coarse heading scan step; the heading at each position cell is
/// refined continuously from the scan's local minima.
#[derive(Debug, Clone, Copy)]
pub struct OracleCfg<F> {
    pub grid_xy: F,
    pub grid_phi: F,
    /// Cells within this of the global minimum enter the ambiguity set.
    pub ambiguity_margin: F,
    /// Minimum separation between reported ambiguity-set members.
    pub cluster_radius: F,
}

impl<F: Real> Default for OracleCfg<F> {
    fn default() -> Self {
        Self {
            grid_xy: F::val(0.02),
            grid_phi: F::val(2.0f64.to_radians()),
            ambiguity_margin: F::val(0.1),
            cluster_radius: F::val(0.5),
        }
    }
}

#[derive(Debug, Clone)]
pub struct OracleResult<F> {
    pub best: TargetState<F>,
    pub residual: F,
    /// Well-separated near-minimal states (includes the best one).
    pub ambiguity: Vec<TargetState<F>>,
}

/// Exhaustive fine-grid minimization of the window objective.
pub fn brute_force_oracle<F: Real>(
    meas: &[StepMeasurement<F>],
    scene: &Scene<F>,
    fusion: &FusionConfig<F>,
    oracle: &OracleCfg<F>,
) -> Result<OracleResult<F>, FusionError> {
    let window: &[StepMeasurement<F>] = &meas[..meas.len().min(fusion.window_steps.max(2))];
    let area = scene.area();
    let xs = grid_axis(area.x_min, area.x_max, oracle.grid_xy);
    let ys: Vec<F> = grid_axis(area.y_min, area.y_max, oracle.grid_xy)
        .into_iter()
        .filter(|y| y.abs() >= fusion.y_min)
        .collect();

    // Per (x, y) cell the heading is minimized continuously (coarse scan
    // plus golden-section refinement); discretizing it would displace the
    // argmin along shallow valleys by more than a position cell.
    let cell_best = |x: F, y: F| -> Option<(F, TargetState<F>)> {
        let eval = |phi: F| window_objective(&TargetState::new(x, y, phi), window, scene, fusion);
        let (phi, v) = min_over_phi(&eval, oracle.grid_phi)?;
        Some((v, TargetState::new(x, y, phi)))
    };

    let column_best = |x: F| -> Option<(F, TargetState<F>)> {
        let mut best: Option<(F, TargetState<F>)> = None;
        for &y in &ys {
            if let Some((v, s)) = cell_best(x, y) {
                if best.as_ref().map_or(true, |(bv, _)| v < *bv) {
                    best = Some((v, s));
                }
            }
        }
        best
    };

    let per_column: Vec<(F, TargetState<F>)> =
        xs.par_iter().filter_map(|&x| column_best(x)).collect();
    let (mut residual, mut best) = per_column
        .iter()
        .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
        .map(|&(v, s)| (v, s))
        .ok_or_else(|| FusionError::NoFeasibleState("oracle grid fully degenerate".into()))?;

    // Local exhaustive refinement around the coarse minimum at a tenth of
    // the cell size: along a shallow valley the coarse argmin can sit a
    // few cells from the true minimum.
    let fine = oracle.grid_xy / F::val(10.0);
    let span = 20i64;
    let fine_cells: Vec<(F, F)> = (-span..=span)
        .flat_map(|i| {
            (-span..=span).map(move |j| {
                (F::val(i as f64), F::val(j as f64))
            })
        })
        .collect();
    if let Some((v, s)) = fine_cells
        .par_iter()
        .filter_map(|&(i, j)| {
            let y = best.y + j * fine;
            if y.abs() < fusion.y_min {
                return None;
            }
            cell_best(best.x + i * fine, y)
        })
        .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
    {
        if v < residual {
            residual = v;
            best = s;
        }
    }

    // Second pass: collect near-minimal cells and cluster them.
    let threshold = residual + oracle.ambiguity_margin;
    let near: Vec<(F, TargetState<F>)> = xs
        .par_iter()
        .map(|&x| {
            let mut local: Vec<(F, TargetState<F>)> = Vec::new();
            for &y in &ys {
                if let Some((v, s)) = cell_best(x, y) {
                    if v <= threshold {
                        local.push((v, s));
                    }
                }
            }
            local
        })
        .reduce(Vec::new, |mut a, b| {
            a.extend(b);
            a
        });

    let mut sorted = near;
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut ambiguity: Vec<TargetState<F>> = Vec::new();
    for (_, s) in sorted {
        if ambiguity
            .iter()
            .all(|r| r.pos().dist(s.pos()) > oracle.cluster_radius)
        {
            ambiguity.push(s);
        }
    }
    Ok(OracleResult { best, residual, ambiguity })
}

/// Construct exact measurements for a walk starting at `start` with the
/// given per-step strides and headings, from pure geometry. Used for
/// verification and calibration.
pub fn synthesize_measurements<F: Real>(
    scene: &Scene<F>,
    start: TargetState<F>,
    headings: &[F],
    stride: F,
    step_duration: F,
    with_aoa: bool,
) -> Vec<StepMeasurement<F>> {
    let mut out = Vec::with_capacity(headings.len());
    let mut state = start;
    for (k, &phi) in headings.iter().enumerate() {
        state.phi = phi;
        let next = state.propagate(stride);
        let mid = state.propagate(stride * F::half());
        let delta_l = scene.path_length(next.pos()) - scene.path_length(state.pos());
        let (alpha_t, alpha_r) = scene.angles_from_position(mid.pos()).unwrap();
        let v_ratio = doppler_ratio(alpha_t, alpha_r, phi);
        let t0 = F::val(k as f64) * step_duration;
        out.push(StepMeasurement {
            step: StepEvent {
                t_start: t0,
                t_end: t0 + step_duration,
                duration: step_duration,
                stride,
                speed: stride / step_duration,
                foot: if k % 2 == 0 {
                    crate::insole::Foot::Left
                } else {
                    crate::insole::Foot::Right
                },
            },
            delta_l,
            v_ratio,
            alpha_r: if with_aoa { Some(alpha_r) } else { None },
            confidence: F::one(),
        });
        state = next;
    }
    out
}
