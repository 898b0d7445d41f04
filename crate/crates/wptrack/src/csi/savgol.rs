//! Savitzky-Golay smoothing: least-squares polynomial fit per window,
//! realized as a fixed convolution kernel. Edges use mirror padding.

use crate::csi::CsiError;
use crate::real::Real;

/// Convolution coefficients for the central smoothing value of a
/// Savitzky-Golay filter with the given odd window and polynomial order.
pub fn savgol_coefficients<F: Real>(window: usize, poly_order: usize) -> Result<Vec<F>, CsiError> {
    if window % 2 == 0 || window <= poly_order {
        return Err(CsiError::BadFilterParams(format!(
            "window {} must be odd and greater than poly order {}",
            window, poly_order
        )));
    }
    let m = (window / 2) as i64;
    let p = poly_order + 1;

    // Normal equations G z = e0 with G[j][k] = sum_i i^(j+k).
    let mut g = vec![vec![F::zero(); p]; p];
    for j in 0..p {
        for k in 0..p {
            let mut s = F::zero();
            for i in -m..=m {
                s += F::val(i as f64).powi((j + k) as i32);
            }
            g[j][k] = s;
        }
    }
    let mut rhs = vec![F::zero(); p];
    rhs[0] = F::one();
    let z = solve_dense(&mut g, &mut rhs)
        .ok_or_else(|| CsiError::BadFilterParams("singular normal equations".into()))?;

    // h_i = sum_j z_j * i^j
    let mut coeffs = Vec::with_capacity(window);
    for i in -m..=m {
        let mut h = F::zero();
        for (j, zj) in z.iter().enumerate() {
            h += *zj * F::val(i as f64).powi(j as i32);
        }
        coeffs.push(h);
    }
    Ok(coeffs)
}

/// Gaussian elimination with partial pivoting on a small dense system.
fn solve_dense<F: Real>(a: &mut [Vec<F>], b: &mut [F]) -> Option<Vec<F>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap()
        })?;
        if a[pivot][col].abs() < F::val(1e-300) {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                let v = a[col][k];
                a[row][k] -= f * v;
            }
            let v = b[col];
            b[row] -= f * v;
        }
    }
    let mut x = vec![F::zero(); n];
    for col in (0..n).rev() {
        let mut s = b[col];
        for k in (col + 1)..n {
            s -= a[col][k] * x[k];
        }
        x[col] = s / a[col][col];
    }
    Some(x)
}

/// Savitzky-Golay smoothing of a real series. Output has the same length;
/// edges are handled by mirror padding.
pub fn denoise_amplitude<F: Real>(
    series: &[F],
    window: usize,
    poly_order: usize,
) -> Result<Vec<F>, CsiError> {
    let coeffs = savgol_coefficients::<F>(window, poly_order)?;
    if series.len() < window {
        return Err(CsiError::BadFilterParams(format!(
            "series length {} shorter than window {}",
            series.len(),
            window
        )));
    }
    let m = window / 2;
    let n = series.len();
    let at = |idx: i64| -> F {
        // Mirror padding about the end points (no repeated edge sample).
        let i = if idx < 0 {
            (-idx) as usize
        } else if idx >= n as i64 {
            2 * (n - 1) - idx as usize
        } else {
            idx as usize
        };
        series[i.min(n - 1)]
    };
    let mut out = Vec::with_capacity(n);
    for t in 0..n as i64 {
        let mut acc = F::zero();
        for (k, c) in coeffs.iter().enumerate() {
            acc += *c * at(t + k as i64 - m as i64);
        }
        out.push(acc);
    }
    Ok(out)
}
