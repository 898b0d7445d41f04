//! Angle of arrival from the uniform linear array at the receiver.
//!
//! `estimate_aoa` is the plain phase-difference estimator on raw frames:
//! it reports the dominant path's arrival angle. `estimate_step_aoa`
//! isolates the target-reflected (dynamic) path first by measuring the
//! inter-antenna phase at the Doppler tone, so it works even when the
//! static line-of-sight path dominates the channel.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::csi::doppler::{adjusted_products, bin_freq, hann, pick_peak};
use crate::csi::{conjugate_multiply, CsiError, CsiFrame, N_ANT, N_SUB};

fn alpha_from_delta(delta_theta: f64, lambda: f64, spacing: f64) -> Result<f64, CsiError> {
    let u = delta_theta * lambda / (std::f64::consts::TAU * spacing);
    if u.abs() > 1.0 + 1e-9 {
        return Err(CsiError::AmbiguousAoa(u.abs()));
    }
    Ok(u.clamp(-1.0, 1.0).acos())
}

/// Average inter-antenna phase difference over a window of frames and all
/// subcarriers, mapped to an arrival angle in [0, pi] measured from the
/// array axis. Requires spacing <= lambda/2.
pub fn estimate_aoa(window: &[CsiFrame], lambda: f64, spacing: f64) -> Result<f64, CsiError> {
    if window.is_empty() {
        return Err(CsiError::InsufficientData("empty aoa window".into()));
    }
    if spacing > lambda / 2.0 + 1e-12 {
        return Err(CsiError::AmbiguousAoa(2.0 * spacing / lambda));
    }
    // Circular mean of the adjacent-antenna phase differences.
    let mut acc = Complex64::new(0.0, 0.0);
    for f in window {
        for n in 0..N_ANT - 1 {
            for s in 0..N_SUB {
                acc += f.h[n + 1][s] * f.h[n][s].conj();
            }
        }
    }
    alpha_from_delta(acc.arg(), lambda, spacing)
}

/// Arrival angle of the dynamic (target-reflected) path over a step.
///
/// For each antenna n, the static-adjusted product against the boosted
/// reference antenna leaves the dynamic term dominant; the Doppler-tone
/// FFT bin then carries that antenna's dynamic phase. The phase
/// difference between the two non-reference antennas at the tone gives
/// the steering phase. Returns None when no dominant tone exists
/// (blind spot / no motion).
pub fn estimate_step_aoa(
    frames: &[CsiFrame],
    lambda: f64,
    spacing: f64,
    v_max: f64,
    dc_cut_hz: f64,
) -> Result<Option<f64>, CsiError> {
    if frames.len() < 64 {
        return Ok(None);
    }
    let span = frames.last().unwrap().timestamp - frames[0].timestamp;
    if !(span > 0.0) {
        return Ok(None);
    }
    let fs = (frames.len() - 1) as f64 / span;
    let n_fft = frames.len().next_power_of_two().max(256);

    let win = hann(frames.len());
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n_fft);
    let transform = |seg: &[Complex64]| {
        let mean = seg.iter().sum::<Complex64>() / seg.len() as f64;
        let mut buf = vec![Complex64::new(0.0, 0.0); n_fft];
        let mut seg_pow = 0.0;
        for (i, &z) in seg.iter().enumerate() {
            seg_pow += z.norm_sqr();
            buf[i] = (z - mean) * win[i];
        }
        fft.process(&mut buf);
        (buf, seg_pow / seg.len() as f64)
    };

    // Signed-tone localization uses the static-adjusted products, whose
    // spectrum carries the dynamic tone on the correct side of DC.
    let mut power = vec![0.0f64; n_fft];
    let mut scale = 0.0f64;
    for n in [1usize, 2] {
        let prod = adjusted_products(frames, 0, n, false)?;
        for s in 0..N_SUB {
            let (buf, seg_pow) = transform(&prod[s]);
            scale += seg_pow;
            for (p, z) in power.iter_mut().zip(buf.iter()) {
                *p += z.norm_sqr();
            }
        }
    }

    // The steering phase is read from the plain conjugate products: after
    // temporal mean removal, the picked bin holds dynamic_n * conj(static_0)
    // for each antenna n, so the cross-spectrum phase is the inter-antenna
    // steering difference of the dynamic path alone. (The adjusted products
    // are unsuitable here: the amplitude shrink leaves a residual
    // static-direction term modulated at the tone rate, biasing the phase.)
    let prod1 = conjugate_multiply(frames, 1, 0)?;
    let prod2 = conjugate_multiply(frames, 2, 0)?;
    let mut spectra1: Vec<Vec<Complex64>> = Vec::with_capacity(N_SUB);
    let mut spectra2: Vec<Vec<Complex64>> = Vec::with_capacity(N_SUB);
    for (series, store) in [(&prod1, &mut spectra1), (&prod2, &mut spectra2)] {
        for s in 0..N_SUB {
            store.push(transform(&series[s]).0);
        }
    }

    let f_max = v_max / lambda;
    let win_sum: f64 = win.iter().sum();
    let floor = 2.5e-5 * scale * win_sum * win_sum / 4.0;
    let pick = pick_peak(&power, fs, dc_cut_hz, f_max, 8.0, floor);
    if !pick.confident {
        return Ok(None);
    }
    let k = pick.bin;
    debug_assert!(bin_freq(k, n_fft, fs).abs() <= f_max + fs / n_fft as f64);

    // The plain products also carry a mirror tone at the negated frequency
    // (static_n * conj(dynamic_0)) whose spectral leakage into the tone bin
    // corrupts the phase when the tone sits near DC. Solve the 2x2 leakage
    // system between the tone bin and its mirror bin to recover the clean
    // tone amplitude: with G the window transform in bin units and beta the
    // fractional signed bin of the tone,
    //   X[k]  = T * G(beta - k) + M * conj(G(beta + k))
    //   X[-k] = T * G(beta + k) + M * conj(G(beta - k)).
    let beta = pick.freq * n_fft as f64 / fs;
    if beta.abs() < 1.0 {
        return Ok(None); // tone and mirror unresolvable
    }
    let km = (n_fft - k) % n_fft;
    let ks = if k <= n_fft / 2 { k as f64 } else { k as f64 - n_fft as f64 };
    let g = |u: f64| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (t, &w) in win.iter().enumerate() {
            acc += Complex64::from_polar(w, std::f64::consts::TAU * u * t as f64 / n_fft as f64);
        }
        acc
    };
    let a = g(beta - ks);
    let b = g(beta + ks);
    let det = a.norm_sqr() - b.norm_sqr();
    if det.abs() < 0.1 * a.norm_sqr() {
        return Ok(None); // ill-conditioned separation
    }
    let deconv = |spec: &[Complex64]| (a.conj() * spec[k] - b.conj() * spec[km]) / det;
    let mut acc = Complex64::new(0.0, 0.0);
    for s in 0..N_SUB {
        acc += deconv(&spectra2[s]) * deconv(&spectra1[s]).conj();
    }
    match alpha_from_delta(acc.arg(), lambda, spacing) {
        Ok(alpha) => Ok(Some(alpha)),
        Err(CsiError::AmbiguousAoa(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, TAU};

    fn steer(n: usize, alpha: f64, spacing: f64, lambda: f64) -> Complex64 {
        Complex64::from_polar(1.0, TAU * n as f64 * spacing * alpha.cos() / lambda)
    }

    fn plane_wave_window(alpha: f64, lambda: f64, spacing: f64, n_frames: usize) -> Vec<CsiFrame> {
        (0..n_frames)
            .map(|t| {
                let mut f = CsiFrame::new(t as f64 * 1e-3);
                for a in 0..N_ANT {
                    for s in 0..N_SUB {
                        let base = Complex64::from_polar(1.0, 0.13 * s as f64);
                        f.h[a][s] = base * steer(a, alpha, spacing, lambda);
                    }
                }
                f
            })
            .collect()
    }

    #[test]
    fn broadside() {
        let lambda = 0.056;
        let w = plane_wave_window(FRAC_PI_2, lambda, lambda / 2.0, 16);
        let a = estimate_aoa(&w, lambda, lambda / 2.0).unwrap();
        assert!((a - FRAC_PI_2).abs() < 1e-9);
    }

    #[test]
    fn endfire() {
        let lambda = 0.056;
        // delta_theta = pi with half-wavelength spacing -> endfire (0 rad).
        let w = plane_wave_window(0.0, lambda, lambda / 2.0, 16);
        let a = estimate_aoa(&w, lambda, lambda / 2.0).unwrap();
        assert!(a.abs() < 1e-6 || (a - std::f64::consts::PI).abs() < 1e-6);
    }

    #[test]
    fn plane_wave_sixty_degrees() {
        let lambda = 0.056;
        let alpha = 60.0f64.to_radians();
        let w = plane_wave_window(alpha, lambda, lambda / 2.0, 32);
        let a = estimate_aoa(&w, lambda, lambda / 2.0).unwrap();
        assert!((a - alpha).to_degrees().abs() < 2.0, "estimated {} deg", a.to_degrees());
    }

    #[test]
    fn spacing_too_wide_is_ambiguous() {
        let lambda = 0.056;
        let w = plane_wave_window(1.0, lambda, lambda, 8);
        assert!(matches!(
            estimate_aoa(&w, lambda, lambda),
            Err(CsiError::AmbiguousAoa(_))
        ));
    }

    #[test]
    fn dynamic_aoa_through_static_path() {
        // Static path dominates at broadside, moving reflector arrives
        // from 60 degrees; the step estimator must report the latter.
        let lambda = 0.056;
        let spacing = lambda / 2.0;
        let alpha = 60.0f64.to_radians();
        let fs = 1000.0;
        let rate = 0.3;
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(5);
        let frames: Vec<CsiFrame> = (0..600)
            .map(|i| {
                let t = i as f64 / fs;
                let l = 5.0 + rate * t;
                let rot = Complex64::from_polar(1.0, rng.gen_range(0.0..TAU));
                let mut f = CsiFrame::new(t);
                for a in 0..N_ANT {
                    for s in 0..N_SUB {
                        let stat = Complex64::from_polar(1.0, 0.2 * s as f64)
                            * steer(a, FRAC_PI_2, spacing, lambda);
                        let dynp = Complex64::from_polar(0.2, -TAU * l / lambda + 0.07 * s as f64)
                            * steer(a, alpha, spacing, lambda);
                        f.h[a][s] = rot * (stat + dynp);
                    }
                }
                f
            })
            .collect();
        let got = estimate_step_aoa(&frames, lambda, spacing, 4.0, 1.2)
            .unwrap()
            .expect("dominant tone expected");
        assert!(
            (got - alpha).to_degrees().abs() < 2.0,
            "estimated {} deg, truth {} deg",
            got.to_degrees(),
            alpha.to_degrees()
        );
    }

    #[test]
    fn dynamic_aoa_none_when_static() {
        let lambda = 0.056;
        let w = plane_wave_window(FRAC_PI_2, lambda, lambda / 2.0, 600);
        let got = estimate_step_aoa(&w, lambda, lambda / 2.0, 4.0, 1.2).unwrap();
        assert!(got.is_none());
    }
}
