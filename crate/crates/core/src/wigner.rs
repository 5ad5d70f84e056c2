//! Wigner functions of pure states on a phase-space grid, with ħ = 1.
//!
//! `W(x, p) = (1/2π) ∫ ψ(x + s/2) ψ*(x - s/2) e^{isp} ds`. With this sign the
//! momentum marginal is `|ψ̂(p)|²` for `ψ̂(p) = (2π)^{-1/2} ∫ ψ(x) e^{ipx} dx`.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Error, Result};
use crate::grid::{fmt_num, UniformGrid};

/// Largest tolerated `|‖ψ‖² - 1|`.
pub const NORM_TOL: f64 = 1e-8;

/// Pure states with closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum State {
    /// `π^{-1/4} e^{-x²/2}`.
    Gaussian,
    /// `√2 π^{-1/4} x e^{-x²/2}`.
    Hermite1,
    /// Gaussian with position standard deviation `σ`.
    Squeezed(f64),
}

impl State {
    pub fn eval(&self, x: f64) -> Complex64 {
        let v = match self {
            State::Gaussian => PI.powf(-0.25) * (-x * x / 2.0).exp(),
            State::Hermite1 => 2f64.sqrt() * PI.powf(-0.25) * x * (-x * x / 2.0).exp(),
            State::Squeezed(s) => (2.0 * PI * s * s).powf(-0.25) * (-x * x / (4.0 * s * s)).exp(),
        };
        Complex64::new(v, 0.0)
    }

    /// Momentum wavefunction `ψ̂(p)`.
    pub fn momentum(&self, p: f64) -> Complex64 {
        match self {
            State::Gaussian => self.eval(p),
            // ψ̂ = i √2 π^{-1/4} p e^{-p²/2} under the e^{ipx} convention
            State::Hermite1 => Complex64::new(0.0, 1.0) * State::Hermite1.eval(p),
            State::Squeezed(s) => State::Squeezed(0.5 / s).eval(p),
        }
    }

    /// Parses `gaussian`, `hermite1` or `squeezed:σ`.
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(State::Gaussian),
            "hermite1" => Ok(State::Hermite1),
            _ => {
                let sigma = s
                    .strip_prefix("squeezed:")
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| invalid(format!("unknown state `{s}`")))?;
                if !(sigma > 0.0 && sigma.is_finite()) {
                    return Err(invalid(format!("squeezing σ must be positive, got {sigma}")));
                }
                Ok(State::Squeezed(sigma))
            }
        }
    }

    /// Half-widths `(x, p)` of a grid on which the state has decayed.
    pub fn extent(&self) -> (f64, f64) {
        match self {
            State::Gaussian | State::Hermite1 => (8.0, 8.0),
            State::Squeezed(s) => ((8.0 * s * 2f64.sqrt()).max(8.0), (8.0 / (s * 2f64.sqrt())).max(8.0)),
        }
    }
}

/// Points per axis of the default phase-space grid.
pub const GRID_POINTS: usize = 1024;

/// `n` points `-L + j 2L/n`, so the origin is a node and `L` itself is not.
pub fn phase_axis(half_width: f64, n: usize) -> Result<UniformGrid> {
    UniformGrid::new(-half_width, 2.0 * half_width / n as f64, n)
}

/// A wavefunction sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction {
    grid: UniformGrid,
    values: Vec<Complex64>,
}

impl Wavefunction {
    /// Requires `Σ h |ψ|² = 1` within [`NORM_TOL`].
    pub fn new(grid: UniformGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid("wavefunction length does not match its grid"));
        }
        let psi = Wavefunction { grid, values };
        let n2 = psi.norm_sqr();
        if (n2 - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(n2));
        }
        Ok(psi)
    }

    pub fn from_fn(grid: UniformGrid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = grid.points().into_iter().map(f).collect();
        Self::new(grid, values)
    }

    /// A state on its default `1024`-point axis.
    pub fn state(state: State) -> Result<Self> {
        Self::from_fn(phase_axis(state.extent().0, GRID_POINTS)?, |x| state.eval(x))
    }

    /// `ψ(x - a)` for a state, on the given axis.
    pub fn translated(state: State, a: f64, grid: UniformGrid) -> Result<Self> {
        Self::from_fn(grid, |x| state.eval(x - a))
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn norm_sqr(&self) -> f64 {
        self.grid.step() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    /// `|ψ̂(p)|²` on `p_grid` by a chirp-z sum.
    pub fn momentum_density(&self, p_grid: &UniformGrid) -> Vec<f64> {
        let h = self.grid.step();
        let czt = Czt::new(self.values.len(), p_grid.len(), p_grid.step() * h);
        let p0 = p_grid.start();
        let x0 = self.grid.start();
        // Σ_k ψ_k e^{i p_m (x0 + k h)} with p_m = p0 + m Δp
        let a: Vec<Complex64> = self
            .values
            .iter()
            .enumerate()
            .map(|(k, v)| v * Complex64::from_polar(1.0, p0 * k as f64 * h))
            .collect();
        let out = czt.apply(&a);
        out.iter()
            .enumerate()
            .map(|(m, v)| {
                let phase = Complex64::from_polar(1.0, p_grid.point(m) * x0);
                (v * phase * h / (2.0 * PI).sqrt()).norm_sqr()
            })
            .collect()
    }
}

/// `X_m = Σ_{k<L} a_k e^{iθkm}` for `m < M` by Bluestein's algorithm.
struct Czt {
    len_in: usize,
    len_out: usize,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    chirp: Vec<Complex64>,
    kernel_hat: Vec<Complex64>,
}

impl Czt {
    fn new(len_in: usize, len_out: usize, theta: f64) -> Self {
        let n = (len_in + len_out - 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        let ifft = planner.plan_fft_inverse(n);
        let chirp_at = |k: usize| {
            let kk = (k as f64) * (k as f64);
            Complex64::from_polar(1.0, theta * kk / 2.0)
        };
        let chirp: Vec<Complex64> = (0..len_in.max(len_out)).map(chirp_at).collect();
        let mut kernel = vec![Complex64::new(0.0, 0.0); n];
        for (m, slot) in kernel.iter_mut().enumerate().take(len_out) {
            *slot = chirp[m].conj();
        }
        for k in 1..len_in {
            kernel[n - k] = chirp[k].conj();
        }
        fft.process(&mut kernel);
        Czt {
            len_in,
            len_out,
            fft,
            ifft,
            chirp,
            kernel_hat: kernel,
        }
    }

    fn apply(&self, a: &[Complex64]) -> Vec<Complex64> {
        let n = self.kernel_hat.len();
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..self.len_in {
            buf[k] = a[k] * self.chirp[k];
        }
        self.fft.process(&mut buf);
        for (b, k) in buf.iter_mut().zip(&self.kernel_hat) {
            *b *= k;
        }
        self.ifft.process(&mut buf);
        let scale = 1.0 / n as f64;
        (0..self.len_out).map(|m| buf[m] * self.chirp[m] * scale).collect()
    }
}

/// `W` sampled on `x × p`, row-major in `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    x: UniformGrid,
    p: UniformGrid,
    values: Vec<f64>,
    imag_residue: f64,
}

/// `W(x_j, p) = (h/π) Σ_k ψ_{j+k} ψ*_{j-k} e^{2ikhp}` for every node `x_j`.
///
/// Rows are independent and computed in parallel; each row is one chirp-z sum.
pub fn wigner_transform(psi: &Wavefunction, p_grid: &UniformGrid) -> Result<WignerGrid> {
    let n2 = psi.norm_sqr();
    if (n2 - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(n2));
    }
    let n = psi.values.len();
    let h = psi.grid.step();
    if 2.0 * h * p_grid.start().abs().max(p_grid.end().abs()) >= PI {
        return Err(invalid("momentum grid exceeds the Nyquist limit π/(2h) of the position grid"));
    }
    let m = p_grid.len();
    let theta = 2.0 * h * p_grid.step();
    let czt = Czt::new(2 * n - 1, m, theta);
    let p0 = p_grid.start();
    let offset = (n - 1) as f64;
    let psi_v = &psi.values;
    let rows: Vec<(Vec<f64>, f64)> = (0..n)
        .into_par_iter()
        .map(|j| {
            // index q = k + (n - 1) for k in -(n-1) ..= n-1
            let mut a = vec![Complex64::new(0.0, 0.0); 2 * n - 1];
            let kmax = j.min(n - 1 - j);
            for k in -(kmax as i64)..=(kmax as i64) {
                let prod = psi_v[(j as i64 + k) as usize] * psi_v[(j as i64 - k) as usize].conj();
                a[(k + (n - 1) as i64) as usize] = prod * Complex64::from_polar(1.0, 2.0 * k as f64 * h * p0);
            }
            let out = czt.apply(&a);
            let mut imag = 0.0f64;
            let row = out
                .iter()
                .enumerate()
                .map(|(mm, v)| {
                    let w = v * Complex64::from_polar(1.0, -theta * offset * mm as f64) * (h / PI);
                    imag = imag.max(w.im.abs());
                    w.re
                })
                .collect();
            (row, imag)
        })
        .collect();
    let imag_residue = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let values = rows.into_iter().flat_map(|r| r.0).collect();
    Ok(WignerGrid {
        x: psi.grid,
        p: *p_grid,
        values,
        imag_residue,
    })
}

/// The Wigner grid of a state on its default `1024 × 1024` grid.
pub fn wigner_of_state(state: State) -> Result<WignerGrid> {
    let psi = Wavefunction::state(state)?;
    let p = phase_axis(state.extent().1, GRID_POINTS)?;
    wigner_transform(&psi, &p)
}

impl WignerGrid {
    pub fn x_grid(&self) -> &UniformGrid {
        &self.x
    }

    pub fn p_grid(&self) -> &UniformGrid {
        &self.p
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest imaginary part discarded from the transform.
    pub fn imag_residue(&self) -> f64 {
        self.imag_residue
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.p.len() + j]
    }

    /// Value at grid nodes `(x, p)`.
    pub fn value_at(&self, x: f64, p: f64) -> Option<f64> {
        Some(self.get(self.x.index_of(x)?, self.p.index_of(p)?))
    }

    /// `∫∫ W dx dp` by the rectangle rule.
    pub fn total(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.x.step() * self.p.step()
    }

    /// `∫ W dp` at each `x` node.
    pub fn x_marginal(&self) -> Vec<f64> {
        self.values
            .chunks(self.p.len())
            .map(|row| row.iter().sum::<f64>() * self.p.step())
            .collect()
    }

    /// `∫ W dx` at each `p` node.
    pub fn p_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.p.len()];
        for row in self.values.chunks(self.p.len()) {
            for (o, v) in out.iter_mut().zip(row) {
                *o += v;
            }
        }
        out.iter().map(|v| v * self.x.step()).collect()
    }

    /// Matrix CSV: header `x` then the p-values; one row per x node.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut line = String::from("x");
        for p in self.p.points() {
            line.push(',');
            line.push_str(&fmt_num(p));
        }
        writeln!(w, "{line}")?;
        for (i, row) in self.values.chunks(self.p.len()).enumerate() {
            let mut line = fmt_num(self.x.point(i));
            for v in row {
                line.push(',');
                line.push_str(&fmt_num(*v));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// Smallest value of `W` and where it sits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HudsonReport {
    pub min: f64,
    pub at: (f64, f64),
    /// `min ≥ -1e-10`.
    pub nonnegative: bool,
}

pub const HUDSON_TOL: f64 = 1e-10;

pub fn hudson_check(w: &WignerGrid) -> HudsonReport {
    let (idx, min) = w
        .values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    let (i, j) = (idx / w.p.len(), idx % w.p.len());
    HudsonReport {
        min,
        at: (w.x.point(i), w.p.point(j)),
        nonnegative: min >= -HUDSON_TOL,
    }
}

fn spread(grid: &UniformGrid, density: &[f64]) -> Result<f64> {
    let peak = density.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let edge = density[0].abs().max(density[density.len() - 1].abs());
    if edge > 1e-8 * peak {
        return Err(Error::InsufficientDecay { ratio: edge / peak });
    }
    let pts = grid.points();
    let mass: f64 = density.iter().sum();
    let mean: f64 = pts.iter().zip(density).map(|(x, d)| x * d).sum::<f64>() / mass;
    let var: f64 = pts.iter().zip(density).map(|(x, d)| (x - mean).powi(2) * d).sum::<f64>() / mass;
    Ok(var.sqrt())
}

/// Mean of the x-marginal.
pub fn x_mean(w: &WignerGrid) -> f64 {
    let m = w.x_marginal();
    let mass: f64 = m.iter().sum();
    w.x.points().iter().zip(&m).map(|(x, d)| x * d).sum::<f64>() / mass
}

/// `σ_x σ_p` from the two marginals; at least ½ for every state.
///
/// A marginal that has not decayed at the grid edge is reported as
/// [`Error::InsufficientDecay`] rather than a truncated moment.
pub fn uncertainty_product(w: &WignerGrid) -> Result<f64> {
    Ok(spread(&w.x, &w.x_marginal())? * spread(&w.p, &w.p_marginal())?)
}
