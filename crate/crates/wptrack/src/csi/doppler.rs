//! Doppler velocity extraction: amplitude-adjusted cross-antenna
//! conjugate multiplication, short-time Fourier analysis of the
//! subcarrier-averaged product, and signed spectral peak tracking.
//!
//! The raw conjugate product carries the Doppler tone mirrored at +/- f_D
//! (static(a) x dynamic(b)* and dynamic(a) x static(b)*). Boosting the
//! static component of one antenna and subtracting it from the other
//! before multiplying leaves a single dominant tone whose sign follows
//! the path-length change: positive frequency = reflected path lengthening.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::csi::{CsiError, CsiFrame, N_SUB};

/// STFT configuration for Doppler extraction.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DopplerCfg {
    /// STFT window length in samples; must be a power of two.
    pub window: usize,
    /// Hop between consecutive windows in samples.
    pub hop: usize,
    /// Bins with |f| below this are treated as static-path residual.
    pub dc_cut_hz: f64,
    /// Velocity search bound in m/s.
    pub v_max: f64,
    /// Peak must exceed this multiple of the band's median power.
    pub peak_min_ratio: f64,
    /// Peak must exceed this fraction of the full-scale tone power.
    pub min_tone_frac: f64,
    /// Antenna whose static component is boosted.
    pub ant_boost: usize,
    /// Antenna whose static component is shrunk.
    pub ant_shrink: usize,
}

impl Default for DopplerCfg {
    fn default() -> Self {
        Self {
            window: 1024,
            hop: 128,
            dc_cut_hz: 1.2,
            v_max: 4.0,
            peak_min_ratio: 8.0,
            min_tone_frac: 0.005,
            ant_boost: 0,
            ant_shrink: 1,
        }
    }
}

/// Signed Doppler velocity samples at STFT window centers.
/// Positive velocity means the reflected path is lengthening.
#[derive(Debug, Clone, PartialEq)]
pub struct DopplerSeries {
    pub times: Vec<f64>,
    pub v_d: Vec<f64>,
    /// False where no dominant spectral peak was found (tangential
    /// blind spot or no motion); such samples carry v_d = 0.
    pub confident: Vec<bool>,
}

impl DopplerSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Linear interpolation inside the support; endpoints are clamped.
    pub fn value_at(&self, t: f64) -> f64 {
        interp(&self.times, &self.v_d, t)
    }

    /// Fraction of confident samples with centers in [t0, t1].
    pub fn confidence_fraction(&self, t0: f64, t1: f64) -> f64 {
        let mut total = 0usize;
        let mut good = 0usize;
        for (i, &t) in self.times.iter().enumerate() {
            if t >= t0 && t <= t1 {
                total += 1;
                if self.confident[i] {
                    good += 1;
                }
            }
        }
        if total == 0 {
            0.0
        } else {
            good as f64 / total as f64
        }
    }
}

fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    match xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
        Ok(i) => ys[i],
        Err(0) => ys[0],
        Err(i) if i >= xs.len() => *ys.last().unwrap(),
        Err(i) => {
            let w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
            ys[i - 1] * (1.0 - w) + ys[i] * w
        }
    }
}

/// Static-boosted and static-shrunk per-subcarrier product series,
/// `out[subcarrier][packet]`. The per-packet common phase cancels.
pub(crate) fn adjusted_products(
    frames: &[CsiFrame],
    ant_boost: usize,
    ant_shrink: usize,
    boosted_first: bool,
) -> Result<Vec<Vec<Complex64>>, CsiError> {
    if ant_boost == ant_shrink || ant_boost >= crate::csi::N_ANT || ant_shrink >= crate::csi::N_ANT
    {
        return Err(CsiError::BadAntennaPair);
    }
    let n = frames.len();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); n]; N_SUB];
    for s in 0..N_SUB {
        let mut mean_a = 0.0;
        let mut min_b = f64::INFINITY;
        for f in frames {
            mean_a += f.h[ant_boost][s].norm();
            min_b = min_b.min(f.h[ant_shrink][s].norm());
        }
        mean_a /= n as f64;
        for (t, f) in frames.iter().enumerate() {
            let va = f.h[ant_boost][s];
            let vb = f.h[ant_shrink][s];
            let na = va.norm();
            let nb = vb.norm();
            let boosted = if na > 0.0 { va / na * (na + mean_a) } else { Complex64::new(mean_a, 0.0) };
            let shrunk = if nb > 0.0 { vb / nb * (nb - min_b) } else { Complex64::new(0.0, 0.0) };
            out[s][t] = if boosted_first {
                boosted * shrunk.conj()
            } else {
                shrunk * boosted.conj()
            };
        }
    }
    Ok(out)
}

pub(crate) fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (std::f64::consts::TAU * i as f64 / n as f64).cos())
        .collect()
}

/// Signed frequency of FFT bin k for an n-point transform at rate fs.
pub(crate) fn bin_freq(k: usize, n: usize, fs: f64) -> f64 {
    if k <= n / 2 {
        k as f64 * fs / n as f64
    } else {
        (k as f64 - n as f64) * fs / n as f64
    }
}

pub(crate) struct PeakPick {
    /// Interpolated signed frequency in Hz.
    pub freq: f64,
    /// FFT bin index of the raw maximum.
    pub bin: usize,
    pub confident: bool,
}

/// Pick the dominant tone in a summed power spectrum, excluding the
/// near-DC region and anything beyond f_max. `scale` is the full-scale
/// tone power used for the absolute floor.
pub(crate) fn pick_peak(
    power: &[f64],
    fs: f64,
    dc_cut_hz: f64,
    f_max: f64,
    peak_min_ratio: f64,
    floor: f64,
) -> PeakPick {
    let n = power.len();
    let mut band: Vec<f64> = Vec::new();
    let mut best_k = 0usize;
    let mut best_p = -1.0;
    let mut near_dc_max: f64 = 0.0;
    for k in 0..n {
        if k == 0 {
            continue;
        }
        let f = bin_freq(k, n, fs);
        if f.abs() > f_max {
            continue;
        }
        if f.abs() < dc_cut_hz {
            near_dc_max = near_dc_max.max(power[k]);
            continue;
        }
        band.push(power[k]);
        if power[k] > best_p {
            best_p = power[k];
            best_k = k;
        }
    }
    if band.is_empty() || best_p <= 0.0 {
        return PeakPick { freq: 0.0, bin: 0, confident: false };
    }
    band.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = band[band.len() / 2];
    let confident =
        best_p >= peak_min_ratio * median && best_p >= floor && best_p >= near_dc_max;

    // Parabolic interpolation on log power over FFT-index neighbors.
    let prev = (best_k + n - 1) % n;
    let next = (best_k + 1) % n;
    let mut delta = 0.0;
    if power[prev] > 0.0 && power[next] > 0.0 {
        let (lp, l0, ln) = (power[prev].ln(), power[best_k].ln(), power[next].ln());
        let denom = lp - 2.0 * l0 + ln;
        if denom < 0.0 {
            delta = 0.5 * (lp - ln) / denom;
            delta = delta.clamp(-0.5, 0.5);
        }
    }
    let base = bin_freq(best_k, n, fs);
    PeakPick { freq: base + delta * fs / n as f64, bin: best_k, confident }
}

/// Extract a signed Doppler-velocity series from a CSI stream.
pub fn estimate_doppler_velocity(
    frames: &[CsiFrame],
    cfg: &DopplerCfg,
    lambda: f64,
) -> Result<DopplerSeries, CsiError> {
    let w = cfg.window;
    if !w.is_power_of_two() || w == 0 {
        return Err(CsiError::BadFilterParams(format!(
            "stft window {} must be a power of two",
            w
        )));
    }
    if frames.len() < w {
        return Err(CsiError::InsufficientData(format!(
            "{} frames, need at least one window of {}",
            frames.len(),
            w
        )));
    }
    let span = frames.last().unwrap().timestamp - frames[0].timestamp;
    if !(span > 0.0) {
        return Err(CsiError::InsufficientData("zero time span".into()));
    }
    let fs = (frames.len() - 1) as f64 / span;
    let f_max = cfg.v_max / lambda;

    let prod = adjusted_products(frames, cfg.ant_boost, cfg.ant_shrink, true)?;
    let win = hann(w);
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(w);

    let mut times = Vec::new();
    let mut v_d = Vec::new();
    let mut confident = Vec::new();
    let mut offset = 0usize;
    let mut buf = vec![Complex64::new(0.0, 0.0); w];
    let mut power = vec![0.0f64; w];
    while offset + w <= frames.len() {
        power.iter_mut().for_each(|p| *p = 0.0);
        let mut scale = 0.0f64;
        for series in prod.iter() {
            let seg = &series[offset..offset + w];
            let mean = seg.iter().sum::<Complex64>() / w as f64;
            let mut seg_pow = 0.0;
            for (i, &z) in seg.iter().enumerate() {
                let centered = z - mean;
                seg_pow += z.norm_sqr();
                buf[i] = centered * win[i];
            }
            scale += seg_pow / w as f64;
            fft.process(&mut buf);
            for (p, z) in power.iter_mut().zip(buf.iter()) {
                *p += z.norm_sqr();
            }
        }
        // Full-scale tone power: amplitude^2 * (sum of window)^2 / 4-ish.
        let win_sum: f64 = win.iter().sum();
        let floor = cfg.min_tone_frac * cfg.min_tone_frac * scale * win_sum * win_sum / 4.0;
        let pick = pick_peak(&power, fs, cfg.dc_cut_hz, f_max, cfg.peak_min_ratio, floor);
        let center = frames[offset + w / 2].timestamp;
        times.push(center);
        if pick.confident {
            v_d.push((pick.freq * lambda).clamp(-cfg.v_max, cfg.v_max));
            confident.push(true);
        } else {
            v_d.push(0.0);
            confident.push(false);
        }
        offset += cfg.hop;
    }
    Ok(DopplerSeries { times, v_d, confident })
}

/// Trapezoidal integral of the Doppler velocity over [t0, t1]: the
/// reflected-path length change.
///
/// Only confident samples contribute; unconfident ones carry v_d = 0 as
/// a placeholder (e.g. windows straddling motion onset, where the tone
/// occupies too little of the window) and integrating them would bias
/// the result, so the integral interpolates across them. An interval
/// with no confident samples integrates to zero.
pub fn integrate_path_change(series: &DopplerSeries, t0: f64, t1: f64) -> Result<f64, CsiError> {
    if series.is_empty() {
        return Err(CsiError::InsufficientData("empty doppler series".into()));
    }
    let lo = series.times[0];
    let hi = *series.times.last().unwrap();
    let tol = 1e-9;
    if t0 < lo - tol || t1 > hi + tol || t1 < t0 {
        return Err(CsiError::OutOfRange { t0, t1, lo, hi });
    }
    let t0 = t0.max(lo);
    let t1 = t1.min(hi);

    let mut times = Vec::with_capacity(series.len());
    let mut vals = Vec::with_capacity(series.len());
    for i in 0..series.len() {
        if series.confident[i] {
            times.push(series.times[i]);
            vals.push(series.v_d[i]);
        }
    }
    if times.is_empty() {
        return Ok(0.0);
    }

    // Breakpoints: interval edges plus interior confident sample times.
    let mut acc = 0.0;
    let mut prev_t = t0;
    let mut prev_v = interp(&times, &vals, t0);
    for (i, &t) in times.iter().enumerate() {
        if t <= t0 || t >= t1 {
            continue;
        }
        acc += (t - prev_t) * (prev_v + vals[i]) * 0.5;
        prev_t = t;
        prev_v = vals[i];
    }
    acc += (t1 - prev_t) * (prev_v + interp(&times, &vals, t1)) * 0.5;
    Ok(acc)
}
