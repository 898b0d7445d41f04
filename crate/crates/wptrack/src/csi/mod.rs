//! CSI processing: denoising, phase sanitization, Doppler velocity and
//! angle-of-arrival extraction from a 1x3x30 channel matrix stream.

mod aoa;
mod doppler;
mod phase;
mod savgol;

pub use aoa::{estimate_aoa, estimate_step_aoa};
pub use doppler::{estimate_doppler_velocity, integrate_path_change, DopplerCfg, DopplerSeries};
pub use phase::{sanitize_phase, unwrap_phases};
pub use savgol::{denoise_amplitude, savgol_coefficients};

use num_complex::Complex64;
use thiserror::Error;

/// Number of receive antennas.
pub const N_ANT: usize = 3;
/// Number of (grouped) OFDM subcarriers.
pub const N_SUB: usize = 30;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CsiError {
    #[error("bad filter params: {0}")]
    BadFilterParams(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("integration interval [{t0}, {t1}] outside series support [{lo}, {hi}]")]
    OutOfRange { t0: f64, t1: f64, lo: f64, hi: f64 },
    #[error("ambiguous angle of arrival: |cos| = {0} > 1")]
    AmbiguousAoa(f64),
    #[error("antenna index out of range or pair not distinct")]
    BadAntennaPair,
}

/// One Wi-Fi packet's channel matrix with timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct CsiFrame {
    /// Seconds relative to stream start; strictly increasing in a stream.
    pub timestamp: f64,
    /// Complex channel response, `h[antenna][subcarrier]`.
    pub h: [[Complex64; N_SUB]; N_ANT],
}

impl CsiFrame {
    pub fn new(timestamp: f64) -> Self {
        Self {
            timestamp,
            h: [[Complex64::new(0.0, 0.0); N_SUB]; N_ANT],
        }
    }
}

/// Cross-antenna conjugate multiplication: cancels the per-packet common
/// phase (CFO/PDD) exactly while preserving the Doppler modulation.
/// Returns one complex series per subcarrier, `out[subcarrier][packet]`.
pub fn conjugate_multiply(
    frames: &[CsiFrame],
    ant_a: usize,
    ant_b: usize,
) -> Result<Vec<Vec<Complex64>>, CsiError> {
    if ant_a == ant_b || ant_a >= N_ANT || ant_b >= N_ANT {
        return Err(CsiError::BadAntennaPair);
    }
    let mut out = vec![vec![Complex64::new(0.0, 0.0); frames.len()]; N_SUB];
    for (t, f) in frames.iter().enumerate() {
        for s in 0..N_SUB {
            out[s][t] = f.h[ant_a][s] * f.h[ant_b][s].conj();
        }
    }
    Ok(out)
}

/// Smooth per-antenna per-subcarrier amplitude series along time,
/// keeping phases untouched.
pub fn denoise_stream_amplitude(
    frames: &[CsiFrame],
    window: usize,
    poly_order: usize,
) -> Result<Vec<CsiFrame>, CsiError> {
    if frames.len() < window {
        // Too short to smooth; pass through unchanged.
        return Ok(frames.to_vec());
    }
    let mut out = frames.to_vec();
    for ant in 0..N_ANT {
        for s in 0..N_SUB {
            let amps: Vec<f64> = frames.iter().map(|f| f.h[ant][s].norm()).collect();
            let smooth = denoise_amplitude(&amps, window, poly_order)?;
            for (t, f) in out.iter_mut().enumerate() {
                let v = f.h[ant][s];
                let a = v.norm();
                if a > 0.0 {
                    f.h[ant][s] = v / a * smooth[t].max(0.0);
                }
            }
        }
    }
    Ok(out)
}
