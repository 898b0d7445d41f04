//! Acceptance gate: one test per release criterion, each printing a
//! single pass/fail line (visible with `--nocapture`).
//!
//! Criteria 1 and 8 exercise the full randomized-sweep path at the
//! calibrated noise level pinned in `scenarios/sweep_calibrated.toml`;
//! criterion 2 checks the noiseless solver fixed point on every checked-in
//! scenario; the rest are component-level oracles.

use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use wptrack::csi::{estimate_doppler_velocity, CsiFrame, N_ANT, N_SUB};
use wptrack::fusion::{
    brute_force_oracle, estimate_initial_state, synthesize_measurements, track, FusionConfig,
    OracleCfg,
};
use wptrack::geometry::{doppler_ratio, Point2, TargetState};
use wptrack::insole::{
    align_streams, segment_steps, shift_stream, toe_off_times, InsoleCfg, SensorLayout,
};
use wptrack::io::{read_run_config, RunConfig};
use wptrack::pipeline::run_seed;
use wptrack::sim::{gen_trajectory, randomized_straight_walk, run_scenario, ScenarioConfig};

fn scenario_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn sweep_config() -> RunConfig {
    read_run_config(&scenario_dir().join("sweep_calibrated.toml")).unwrap()
}

/// All checked-in walking scenarios: every TOML except the sweep noise
/// configuration and the deliberately untrackable tangential arc.
fn walk_scenarios() -> Vec<(String, RunConfig)> {
    let mut out: Vec<(String, RunConfig)> = std::fs::read_dir(scenario_dir())
        .unwrap()
        .filter_map(|e| {
            let path = e.unwrap().path();
            let name = path.file_stem()?.to_str()?.to_string();
            if path.extension()?.to_str()? != "toml"
                || name == "sweep_calibrated"
                || name == "tangential_blind"
            {
                return None;
            }
            Some((name, read_run_config(&path).unwrap()))
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

fn report(criterion: u32, label: &str, pass: bool, detail: &str) {
    // Write through the raw stdout handle so the line is visible even
    // though the harness captures macro output from passing tests.
    use std::io::Write;
    let line = format!(
        "acceptance {criterion} ({label}): {} — {detail}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let _ = std::io::stdout().write_all(line.as_bytes());
    assert!(pass, "criterion {criterion} ({label}) failed: {detail}");
}

/// Criterion 1: 50-seed randomized straight-walk sweep at the calibrated
/// noise level; mean initial-position error in [0.08, 0.30] m, max
/// < 0.60 m, under 5 minutes.
#[test]
fn criterion_1_initial_position_sweep() {
    let started = Instant::now();
    let cfg = sweep_config();
    let errors: Vec<f64> = (0..50u64)
        .into_par_iter()
        .map(|s| run_seed(&cfg, s).unwrap().report.initial_error_m)
        .collect();
    let mean = errors.iter().sum::<f64>() / errors.len() as f64;
    let max = errors.iter().cloned().fold(0.0f64, f64::max);
    let elapsed = started.elapsed().as_secs_f64();
    let pass = (0.08..=0.30).contains(&mean) && max < 0.60 && elapsed < 300.0;
    report(
        1,
        "initial-position sweep",
        pass,
        &format!("mean {mean:.4} m, max {max:.4} m, {elapsed:.0} s"),
    );
}

/// Criterion 2: noiseless fixed point on every checked-in scenario:
/// initial estimate within 0.01 m and tracked per-step error within
/// 0.05 m against the measurement-generating geometry, under 2 minutes.
#[test]
fn criterion_2_noiseless_fixed_point() {
    let started = Instant::now();
    let mut worst_init = 0.0f64;
    let mut worst_step = 0.0f64;
    let scenarios = walk_scenarios();
    assert!(scenarios.len() >= 10, "need at least 10 scenarios, found {}", scenarios.len());
    for (name, cfg) in &scenarios {
        let sc = &cfg.scenario;
        let scene = sc.scene.build().unwrap();
        let gt = gen_trajectory(sc).unwrap();
        let step_dur = sc.stride / sc.speed;
        // Exact per-step measurement tuples from the scenario geometry.
        let start = {
            let p = gt.position_at(gt.walk_start);
            TargetState::new(p.x, p.y, gt.heading_at(gt.walk_start + 1e-9))
        };
        let headings: Vec<f64> = (0..gt.step_count())
            .map(|k| gt.heading_at(gt.walk_start + (k as f64 + 0.5) * step_dur))
            .collect();
        let meas = synthesize_measurements(&scene, start, &headings, sc.stride, step_dur, true);
        let fusion = cfg.fusion;

        let (est, _) = estimate_initial_state(&meas, &scene, &fusion).unwrap();
        let init_err = est.pos().dist(start.pos());
        worst_init = worst_init.max(init_err);
        assert!(init_err < 0.01, "{name}: initial error {init_err:.4} m");

        // Track and compare against the synthesized walk itself.
        let traj = track(est, &meas, &scene, &fusion).unwrap();
        let mut truth = start;
        for (k, m) in meas.iter().enumerate() {
            truth.phi = headings[k];
            truth = truth.propagate(m.step.stride);
            let err = traj.points[k + 1].state.pos().dist(truth.pos());
            worst_step = worst_step.max(err);
            assert!(err < 0.05, "{name}: step {k} error {err:.4} m");
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    let pass = worst_init < 0.01 && worst_step < 0.05 && elapsed < 120.0;
    report(
        2,
        "noiseless fixed point",
        pass,
        &format!(
            "{} scenarios, worst initial {worst_init:.4} m, worst step {worst_step:.4} m, {elapsed:.0} s",
            scenarios.len()
        ),
    );
}

/// Criterion 3: Doppler velocity oracle on constant-dL/dt scenes at
/// 0.1 / 0.2 / 0.5 m/s: mean estimate within ±0.02 m/s of truth.
#[test]
fn criterion_3_doppler_oracle() {
    let lambda = 299_792_458.0 / 5.32e9;
    let spacing = 0.028;
    let fs = 1000.0;
    let mut rng = ChaCha12Rng::seed_from_u64(33);
    let steer = |n: usize, alpha: f64| -> Complex64 {
        Complex64::from_polar(1.0, std::f64::consts::TAU * n as f64 * spacing * alpha.cos() / lambda)
    };
    let mut detail = String::new();
    let mut pass = true;
    for v in [0.1, 0.2, 0.5] {
        let frames: Vec<CsiFrame> = (0..4000)
            .map(|i| {
                let t = i as f64 / fs;
                let l = 5.0 + v * t; // constant dL/dt, path lengthening
                let rot = Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU));
                let mut f = CsiFrame::new(t);
                for a in 0..N_ANT {
                    for s in 0..N_SUB {
                        let stat = Complex64::from_polar(1.0, 0.2 * s as f64)
                            * steer(a, std::f64::consts::FRAC_PI_2);
                        let dynp = Complex64::from_polar(
                            0.2,
                            -std::f64::consts::TAU * l / lambda + 0.07 * s as f64,
                        ) * steer(a, 1.0);
                        f.h[a][s] = rot * (stat + dynp);
                    }
                }
                f
            })
            .collect();
        let series =
            estimate_doppler_velocity(&frames, &Default::default(), lambda).unwrap();
        let conf: Vec<f64> = series
            .v_d
            .iter()
            .zip(&series.confident)
            .filter(|(_, &c)| c)
            .map(|(&x, _)| x)
            .collect();
        assert!(!conf.is_empty(), "no confident windows at v = {v}");
        let mean = conf.iter().sum::<f64>() / conf.len() as f64;
        detail.push_str(&format!("v {v}: mean {mean:+.4}; "));
        pass &= (mean - v).abs() < 0.02;
    }
    report(3, "doppler oracle", pass, detail.trim_end_matches("; "));
}

/// Criterion 4: doppler_ratio equals the finite-difference derivative of
/// the reflected path length along the motion direction, 1 000 samples,
/// within 1e-6.
#[test]
fn criterion_4_ratio_is_path_length_derivative() {
    let scene = ScenarioConfig::default().scene.build().unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(44);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let x = rng.gen_range(0.2..3.8);
        let y = rng.gen_range(0.2..3.8);
        let phi = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        let p = Point2::new(x, y);
        let (at, ar) = scene.angles_from_position(p).unwrap();
        let ratio = doppler_ratio(at, ar, phi);
        let h = 1e-6;
        let step = Point2::new(h * phi.cos(), h * phi.sin());
        let fd = (scene.path_length(Point2::new(p.x + step.x, p.y + step.y))
            - scene.path_length(Point2::new(p.x - step.x, p.y - step.y)))
            / (2.0 * h);
        worst = worst.max((ratio - fd).abs());
    }
    report(
        4,
        "path-length derivative",
        worst < 1e-6,
        &format!("worst |ratio - fd| = {worst:.2e} over 1000 samples"),
    );
}

/// Criterion 5: the tangential (confocal-arc) scenario yields
/// |v_d| < 0.05 m/s throughout, and the CLI tracker exits with the
/// blind-spot code 3.
#[test]
fn criterion_5_tangential_blind_spot() {
    let cfg = read_run_config(&scenario_dir().join("tangential_blind.toml")).unwrap();
    let bundle = run_scenario(&cfg.scenario).unwrap();
    let scene = cfg.scenario.scene.build().unwrap();
    let series =
        estimate_doppler_velocity(&bundle.csi, &cfg.doppler, scene.wavelength()).unwrap();
    let worst = series.v_d.iter().fold(0.0f64, |a, &v| a.max(v.abs()));

    // CLI round trip: simulate, then track must exit 3.
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_wptrack");
    let config = scenario_dir().join("tangential_blind.toml");
    let sim = std::process::Command::new(bin)
        .args(["simulate", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(sim.success());
    let track = std::process::Command::new(bin)
        .args(["track", "--csi"])
        .arg(dir.path().join("csi.csv.gz"))
        .arg("--pressure-left")
        .arg(dir.path().join("pressure_left.csv"))
        .arg("--pressure-right")
        .arg(dir.path().join("pressure_right.csv"))
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("traj.json"))
        .stderr(std::process::Stdio::null())
        .status()
        .unwrap();
    let code = track.code().unwrap_or(-1);
    let pass = worst < 0.05 && code == 3;
    report(
        5,
        "tangential blind spot",
        pass,
        &format!("max |v_d| {worst:.4} m/s, track exit code {code}"),
    );
}

/// Criterion 6: insole round trip over 20 seeded gait scenarios: clock
/// offset within 20 ms, every toe-off within 20 ms, per-step speeds
/// within 5%.
#[test]
fn criterion_6_insole_round_trip() {
    let mut base = ScenarioConfig::default();
    base.noise.pressure_noise = 0.02;
    let layout = SensorLayout::<f64>::default();
    let icfg = InsoleCfg::<f64>::default();
    let mut worst_offset = 0.0f64;
    let mut worst_toe = 0.0f64;
    let mut worst_speed = 0.0f64;
    for seed in 0..20u64 {
        let sc = randomized_straight_walk(&base, seed).unwrap();
        let bundle = run_scenario(&sc).unwrap();
        let gt = &bundle.ground_truth;
        let left = bundle.pressure_left.clone();
        let mut right = bundle.pressure_right.clone();

        let offset = align_streams(&left, &right, &layout, &icfg).unwrap();
        worst_offset = worst_offset.max((offset - sc.right_clock_offset_s).abs());
        shift_stream(&mut right, offset);

        // Toe-offs against the simulated step times, per foot.
        let after = gt.walk_start - 0.25;
        let mut toe: Vec<(f64, wptrack::insole::Foot)> = toe_off_times(&left, after, &icfg)
            .into_iter()
            .map(|t| (t, wptrack::insole::Foot::Left))
            .chain(
                toe_off_times(&right, after, &icfg)
                    .into_iter()
                    .map(|t| (t, wptrack::insole::Foot::Right)),
            )
            .collect();
        toe.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        assert_eq!(toe.len(), gt.step_times.len(), "seed {seed}: toe-off count");
        for (got, truth) in toe.iter().zip(&gt.step_times) {
            assert_eq!(got.1, truth.foot, "seed {seed}");
            worst_toe = worst_toe.max((got.0 - truth.t).abs());
        }

        // Step speeds from segmentation + the stride constant.
        let steps = segment_steps(&left, &right, after, &icfg).unwrap();
        let steps = wptrack::insole::attach_stride(&steps, sc.stride).unwrap();
        for s in &steps {
            worst_speed = worst_speed.max((s.speed - sc.speed).abs() / sc.speed);
        }
    }
    let pass = worst_offset < 0.020 && worst_toe < 0.020 && worst_speed < 0.05;
    report(
        6,
        "insole round trip",
        pass,
        &format!(
            "worst offset {:.1} ms, worst toe-off {:.1} ms, worst speed {:.2}%",
            worst_offset * 1e3,
            worst_toe * 1e3,
            worst_speed * 1e2
        ),
    );
}

/// Criterion 7: solver matches the exhaustive oracle within 0.05 m on 20
/// noiseless scenarios, and the y-mirror ambiguity appears exactly when
/// the arrival-angle term is disabled.
#[test]
fn criterion_7_oracle_equivalence() {
    let base = ScenarioConfig::default();
    let fusion = FusionConfig::<f64>::default();
    let oracle_cfg = OracleCfg::<f64>::default();
    let mut worst = 0.0f64;
    for seed in 100..120u64 {
        let sc = randomized_straight_walk(&base, seed).unwrap();
        let scene = sc.scene.build().unwrap();
        let gt = gen_trajectory(&sc).unwrap();
        let p = gt.position_at(gt.walk_start);
        let start = TargetState::new(p.x, p.y, gt.heading_at(gt.walk_start + 1e-9));
        let headings = vec![start.phi; gt.step_count()];
        let meas = synthesize_measurements(
            &scene,
            start,
            &headings,
            sc.stride,
            sc.stride / sc.speed,
            true,
        );
        let (est, _) = estimate_initial_state(&meas, &scene, &fusion).unwrap();
        let oracle = brute_force_oracle(&meas, &scene, &fusion, &oracle_cfg).unwrap();
        worst = worst.max(est.pos().dist(oracle.best.pos()));
    }

    // Mirror ambiguity in a scene whose area spans both sides of the
    // device baseline: present without AoA, absent with it.
    let mut sc = ScenarioConfig::default();
    sc.scene.area.y_min = -4.0;
    let scene = sc.scene.build().unwrap();
    let start = TargetState::new(1.2, 1.8, 0.4);
    let headings = vec![start.phi; 4];
    let mirror_of = |s: &TargetState<f64>| Point2::new(s.x, -s.y);
    let check = |with_aoa: bool| -> bool {
        let meas =
            synthesize_measurements(&scene, start, &headings, sc.stride, 0.5, with_aoa);
        let oracle = brute_force_oracle(&meas, &scene, &fusion, &oracle_cfg).unwrap();
        oracle
            .ambiguity
            .iter()
            .any(|s| mirror_of(s).dist(start.pos()) < 0.1)
    };
    let mirror_without_aoa = check(false);
    let mirror_with_aoa = check(true);

    let pass = worst < 0.05 && mirror_without_aoa && !mirror_with_aoa;
    report(
        7,
        "oracle equivalence",
        pass,
        &format!(
            "worst |solver - oracle| {worst:.4} m; mirror without AoA: {mirror_without_aoa}, with AoA: {mirror_with_aoa}"
        ),
    );
}

/// Criterion 8: 4-step straight walks at the calibrated noise level: mean
/// per-step error < 0.3 m and mean endpoint error < 0.4 m over 20 seeds.
#[test]
fn criterion_8_trajectory_shape() {
    let cfg = sweep_config();
    let outcomes: Vec<_> = (0..20u64)
        .into_par_iter()
        .map(|s| run_seed(&cfg, s).unwrap())
        .collect();
    let mut step_errors = Vec::new();
    let mut endpoints = Vec::new();
    for o in &outcomes {
        step_errors.extend(o.report.step_errors_m.iter().copied());
        endpoints.push(*o.report.step_errors_m.last().unwrap());
    }
    let mean_step = step_errors.iter().sum::<f64>() / step_errors.len() as f64;
    let mean_end = endpoints.iter().sum::<f64>() / endpoints.len() as f64;
    let pass = mean_step < 0.3 && mean_end < 0.4;
    report(
        8,
        "trajectory shape",
        pass,
        &format!("mean per-step {mean_step:.4} m, mean endpoint {mean_end:.4} m, 20 seeds"),
    );
}
