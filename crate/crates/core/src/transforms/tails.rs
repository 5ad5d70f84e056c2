//! Power-law tails `A |x|^{-k}` beyond a grid end and their Fourier integrals.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::grid::UniformGrid;
use crate::quad::{adaptive, QuadOptions};

/// Model `A |x|^{-k}` for the samples beyond one grid end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerTail {
    pub amplitude: Complex64,
    pub exponent: f64,
}

/// Fits a power law to the last samples at one end of the grid.
///
/// Uses three points a fixed stride apart; the two local slopes must agree
/// and the phase must be steady, otherwise the end is not power-law like.
pub(crate) fn fit_power_tail(grid: &UniformGrid, values: &[Complex64], right: bool) -> Option<PowerTail> {
    let n = values.len();
    let stride = ((n - 1) / 32).max(1);
    if n < 2 * stride + 1 {
        return None;
    }
    let idx = |j: usize| if right { n - 1 - j * stride } else { j * stride };
    let x: Vec<f64> = (0..3).map(|j| grid.point(idx(j)).abs()).collect();
    let f: Vec<Complex64> = (0..3).map(|j| values[idx(j)]).collect();
    if x.iter().any(|&v| v == 0.0) || f.iter().any(|v| v.norm() == 0.0) {
        return None;
    }
    // x[0] is the outermost point
    let slope = |a: usize, b: usize| -(f[a].norm() / f[b].norm()).ln() / (x[a] / x[b]).ln();
    let k_near = slope(0, 1);
    let k_far = slope(1, 2);
    if !(k_near.is_finite() && k_far.is_finite()) {
        return None;
    }
    if (k_near - k_far).abs() > 0.05 * k_near.abs().max(k_far.abs()) + 1e-3 || k_near <= 0.1 {
        return None;
    }
    let phase_drift = (f[0] / f[1]).arg().abs().max((f[1] / f[2]).arg().abs());
    if phase_drift > 0.1 {
        return None;
    }
    Some(PowerTail {
        amplitude: f[0] * x[0].powf(k_near),
        exponent: k_near,
    })
}

/// Lower limit beyond which the asymptotic expansion of `E(b, k)` is used.
const ASYMPTOTIC_START: f64 = 40.0;

/// `E(b, k) = ∫_b^∞ u^{-k} e^{iu} du` for `b > 0`.
fn e_tail(b: f64, k: f64) -> Result<Complex64> {
    if b >= ASYMPTOTIC_START {
        return Ok(e_asymptotic(b, k));
    }
    // finite piece by adaptive quadrature, remainder by the expansion
    let opts = QuadOptions {
        abs_tol: 1e-14,
        rel_tol: 1e-12,
        max_intervals: 20_000,
    };
    let re = adaptive(|u| u.powf(-k) * u.cos(), b, ASYMPTOTIC_START, &opts)?;
    let im = adaptive(|u| u.powf(-k) * u.sin(), b, ASYMPTOTIC_START, &opts)?;
    Ok(Complex64::new(re.value, im.value) + e_asymptotic(ASYMPTOTIC_START, k))
}

/// `i e^{ib} b^{-k} Σ_n (-i)^n (k)_n / b^n`, cut at the smallest term.
fn e_asymptotic(b: f64, k: f64) -> Complex64 {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut last = 1.0;
    for n in 0..200 {
        let next = term * Complex64::new(0.0, -1.0) * ((k + n as f64) / b);
        let mag = next.norm();
        if mag >= last || mag < 1e-18 {
            if mag < last {
                sum += next;
            }
            break;
        }
        sum += next;
        term = next;
        last = mag;
    }
    Complex64::new(0.0, 1.0) * Complex64::from_polar(1.0, b) * b.powf(-k) * sum
}

/// `∫_a^∞ y^{-k} e^{i w y} dy` for `a > 0`.
///
/// Conditionally convergent for `0 < k ≤ 1` and `w ≠ 0`; at `w = 0` it needs `k > 1`.
pub fn power_tail_transform(a: f64, k: f64, w: f64) -> Result<Complex64> {
    if !(a > 0.0) || !(k > 0.0) {
        return Err(invalid(format!("power tail needs a > 0 and k > 0, got a = {a}, k = {k}")));
    }
    if w == 0.0 {
        if k > 1.0 {
            return Ok(Complex64::new(a.powf(1.0 - k) / (k - 1.0), 0.0));
        }
        return Err(Error::Divergent(format!("∫ y^-{k} dy diverges at frequency 0")));
    }
    let aw = w.abs();
    let e = e_tail(aw * a, k)? * aw.powf(k - 1.0);
    Ok(if w > 0.0 { e } else { e.conj() })
}
