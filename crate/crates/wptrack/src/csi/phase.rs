//! Linear-transform phase sanitization: per antenna, unwrap the phase
//! across subcarriers and remove the least-squares line in subcarrier
//! index. The slope absorbs SFO/PDD, the intercept absorbs CFO.

use num_complex::Complex64;

use crate::csi::{CsiFrame, N_ANT, N_SUB};

/// Unwrap a phase sequence so consecutive differences stay within pi.
pub fn unwrap_phases(phases: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(phases.len());
    let mut offset = 0.0;
    for (i, &p) in phases.iter().enumerate() {
        if i > 0 {
            let prev = out[i - 1];
            let mut d = p + offset - prev;
            while d > std::f64::consts::PI {
                offset -= std::f64::consts::TAU;
                d -= std::f64::consts::TAU;
            }
            while d < -std::f64::consts::PI {
                offset += std::f64::consts::TAU;
                d += std::f64::consts::TAU;
            }
        }
        out.push(p + offset);
    }
    out
}

/// Remove the linear phase trend across subcarriers, per antenna,
/// keeping amplitudes unchanged.
pub fn sanitize_phase(frame: &CsiFrame) -> CsiFrame {
    let mut out = frame.clone();
    for ant in 0..N_ANT {
        let raw: Vec<f64> = (0..N_SUB).map(|s| frame.h[ant][s].arg()).collect();
        let phases = unwrap_phases(&raw);
        // Least-squares line in subcarrier index.
        let n = N_SUB as f64;
        let sx = (0..N_SUB).map(|s| s as f64).sum::<f64>();
        let sxx = (0..N_SUB).map(|s| (s * s) as f64).sum::<f64>();
        let sy: f64 = phases.iter().sum();
        let sxy: f64 = phases.iter().enumerate().map(|(s, p)| s as f64 * p).sum();
        let denom = n * sxx - sx * sx;
        let slope = (n * sxy - sx * sy) / denom;
        let intercept = (sy - slope * sx) / n;
        for s in 0..N_SUB {
            let resid = phases[s] - (intercept + slope * s as f64);
            out.h[ant][s] = Complex64::from_polar(frame.h[ant][s].norm(), resid);
        }
    }
    out
}
