//! Discrete Fourier sums that stand in for continuous transforms on uniform grids.
//!
//! Input samples sit at `x_k = c + k h`; outputs at `u_j = j 2π / (M h)` for
//! `j = -(M-1)/2 ..= (M-1)/2` with `M` odd. The sum
//! `Σ_k a_k e^{± i u_j x_k}` is evaluated exactly by one FFT of length `M`.

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::tails::{fit_power_tail, power_tail_transform, PowerTail};
use crate::error::{Error, Result};
use crate::grid::UniformGrid;

/// How the samples beyond the grid ends are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tails {
    /// Require decay to `1e-12` of the peak at both ends.
    Strict,
    /// Rectangle weights, no tail: the exact discrete transform pair.
    Periodic,
    /// Trapezoid weights plus the analytic transform of a fitted `A |x|^{-k}` tail.
    PowerLaw,
    /// `Periodic` when the ends have decayed, otherwise `PowerLaw`.
    Auto,
}

/// Relative edge magnitude below which a sampled function counts as decayed.
pub const DECAY_RATIO: f64 = 1e-12;

pub(crate) fn edge_ratio(values: &[Complex64]) -> f64 {
    let peak = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return 0.0;
    }
    let edge = values[0].norm().max(values[values.len() - 1].norm());
    edge / peak
}

/// The tails actually applied after resolving `Auto` and checking `Strict`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum ResolvedTails {
    Periodic,
    PowerLaw { left: Option<PowerTail>, right: Option<PowerTail> },
}

pub(crate) fn resolve_tails(grid: &UniformGrid, values: &[Complex64], tails: Tails) -> Result<ResolvedTails> {
    let ratio = edge_ratio(values);
    let decayed = ratio <= DECAY_RATIO;
    match tails {
        Tails::Periodic => Ok(ResolvedTails::Periodic),
        Tails::Strict if decayed => Ok(ResolvedTails::Periodic),
        Tails::Strict => Err(Error::InsufficientDecay { ratio }),
        Tails::Auto if decayed => Ok(ResolvedTails::Periodic),
        Tails::Auto | Tails::PowerLaw => {
            let peak = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let fit_end = |right: bool| -> Result<Option<PowerTail>> {
                let edge = if right { values[values.len() - 1] } else { values[0] };
                if edge.norm() <= DECAY_RATIO * peak {
                    return Ok(None);
                }
                fit_power_tail(grid, values, right).map(Some).ok_or(Error::InsufficientDecay { ratio })
            };
            Ok(ResolvedTails::PowerLaw {
                left: fit_end(false)?,
                right: fit_end(true)?,
            })
        }
    }
}

/// Output grid and values of `scale · Σ_k w_k a_k e^{sign i u_j x_k}` plus tail integrals.
pub(crate) struct FourierSum {
    pub grid: UniformGrid,
    pub values: Vec<Complex64>,
}

/// Odd transform length for `n` samples and zero-padding factor `pad`.
pub(crate) fn transform_len(n: usize, pad: usize) -> usize {
    let m = n * pad.max(1);
    if m % 2 == 0 {
        m + 1
    } else {
        m
    }
}

/// The conjugate grid of length `m` for input spacing `h`.
pub(crate) fn conjugate_grid(h: f64, m: usize) -> Result<UniformGrid> {
    let du = 2.0 * std::f64::consts::PI / (m as f64 * h);
    UniformGrid::new(-(((m - 1) / 2) as f64) * du, du, m)
}

/// `∫ f(x) e^{sign i u x} dx` approximated on the samples, for every `u` on the
/// conjugate grid of length `transform_len(n, pad)`.
pub(crate) fn fourier_sum(
    grid: &UniformGrid,
    values: &[Complex64],
    sign: f64,
    pad: usize,
    tails: ResolvedTails,
) -> Result<FourierSum> {
    let n = values.len();
    let h = grid.step();
    let c = grid.start();
    let m = transform_len(n, pad);
    let out = conjugate_grid(h, m)?;

    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for (k, v) in values.iter().enumerate() {
        let w = match tails {
            ResolvedTails::PowerLaw { .. } if k == 0 || k == n - 1 => 0.5,
            _ => 1.0,
        };
        buf[k] = v * w * h;
    }
    let mut planner = FftPlanner::<f64>::new();
    // rustfft's inverse computes Σ a_k e^{+2πi jk/M}, the forward e^{-2πi jk/M}
    let fft = if sign > 0.0 {
        planner.plan_fft_inverse(m)
    } else {
        planner.plan_fft_forward(m)
    };
    fft.process(&mut buf);

    let half = (m - 1) / 2;
    let mut result = Vec::with_capacity(m);
    for j in 0..m {
        let jj = j as i64 - half as i64;
        let idx = jj.rem_euclid(m as i64) as usize;
        let u = out.point(j);
        let phase = Complex64::from_polar(1.0, sign * u * c);
        let mut v = buf[idx] * phase;
        if let ResolvedTails::PowerLaw { left, right } = tails {
            v += tail_contribution(grid, left, right, sign * u)?;
        }
        result.push(v);
    }
    Ok(FourierSum {
        grid: out,
        values: result,
    })
}

/// `∫ f(x) e^{i w x} dx` at a single `w`, by direct summation (deterministic order).
pub(crate) fn fourier_at(grid: &UniformGrid, values: &[Complex64], w: f64, tails: ResolvedTails) -> Result<Complex64> {
    let n = values.len();
    let h = grid.step();
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, v) in values.iter().enumerate() {
        let wt = match tails {
            ResolvedTails::PowerLaw { .. } if k == 0 || k == n - 1 => 0.5,
            _ => 1.0,
        };
        acc += v * wt * Complex64::from_polar(1.0, w * grid.point(k));
    }
    acc *= h;
    if let ResolvedTails::PowerLaw { left, right } = tails {
        acc += tail_contribution(grid, left, right, w)?;
    }
    Ok(acc)
}

/// `∫` of the fitted tails against `e^{i w x}` beyond each grid end.
fn tail_contribution(grid: &UniformGrid, left: Option<PowerTail>, right: Option<PowerTail>, w: f64) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    if let Some(t) = right {
        // ∫_e^∞ A y^{-k} e^{iwy} dy with e = grid end > 0
        let e = grid.end();
        if e <= 0.0 {
            return Err(Error::InsufficientDecay { ratio: 1.0 });
        }
        acc += t.amplitude * power_tail_transform(e, t.exponent, w)?;
    }
    if let Some(t) = left {
        // ∫_{-∞}^{s} A |y|^{-k} e^{iwy} dy = ∫_{|s|}^∞ A u^{-k} e^{-iwu} du
        let s = grid.start();
        if s >= 0.0 {
            return Err(Error::InsufficientDecay { ratio: 1.0 });
        }
        acc += t.amplitude * power_tail_transform(-s, t.exponent, -w)?;
    }
    Ok(acc)
}
