//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    assert!(n % 2 == 0);
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Solves a tridiagonal system by the Thomas algorithm.
///
/// `lower[i]` multiplies `x[i-1]`, `upper[i]` multiplies `x[i+1]`.
pub fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i] * c[i - 1];
        c[i] = if i + 1 < n { upper[i] / m } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Crank–Nicolson for `u_t = u_xx` on `[0, π]` with zero boundary values.
///
/// Returns the nodes `x_i = iπ/cells` and `u(x_i, t)`. Initial values at a jump
/// take the average of the two one-sided limits.
pub fn crank_nicolson(init: impl Fn(f64) -> f64, jumps: &[f64], cells: usize, dt: f64, t: f64) -> (Vec<f64>, Vec<f64>) {
    let dx = PI / cells as f64;
    let xs: Vec<f64> = (0..=cells).map(|i| i as f64 * dx).collect();
    let eps = 1e-12;
    let mut u: Vec<f64> = xs
        .iter()
        .map(|&x| {
            if jumps.iter().any(|j| (x - j).abs() < 1e-9) {
                0.5 * (init(x - eps) + init(x + eps))
            } else {
                init(x)
            }
        })
        .collect();
    u[0] = 0.0;
    u[cells] = 0.0;
    let r = dt / (dx * dx);
    let m = cells - 1;
    let lower = vec![-r / 2.0; m];
    let upper = vec![-r / 2.0; m];
    let diag = vec![1.0 + r; m];
    let steps = (t / dt).round() as usize;
    for _ in 0..steps {
        let rhs: Vec<f64> = (1..cells).map(|i| r / 2.0 * u[i - 1] + (1.0 - r) * u[i] + r / 2.0 * u[i + 1]).collect();
        let inner = thomas(&lower, &diag, &upper, &rhs);
        u[1..cells].copy_from_slice(&inner);
    }
    (xs, u)
}

/// Direct Bayes: `L(y|z) π(z) / ∫ L π` with Simpson evidence on `[0, z_max]`.
pub struct DirectPosterior {
    pub evidence: f64,
}

pub fn direct_evidence(lik: impl Fn(f64) -> f64, prior: impl Fn(f64) -> f64, z_max: f64) -> f64 {
    simpson(|z| lik(z) * prior(z), 0.0, z_max, 200_000)
}

/// `W(x, p)` of the ground state.
pub fn wigner_gaussian(x: f64, p: f64) -> f64 {
    (-x * x - p * p).exp() / PI
}

/// `W(x, p)` of the first excited state.
pub fn wigner_hermite1(x: f64, p: f64) -> f64 {
    let r2 = x * x + p * p;
    (2.0 * r2 - 1.0) * (-r2).exp() / PI
}

/// Catalan numbers by the convolution recurrence, scaled by `4^{-n}`.
pub fn scaled_catalan(n_max: usize) -> Vec<f64> {
    let mut c = vec![1.0f64];
    for n in 1..=n_max {
        let next: f64 = (0..n).map(|k| c[k] * c[n - 1 - k]).sum();
        c.push(next);
    }
    c.iter().enumerate().map(|(n, v)| v / 4f64.powi(n as i32)).collect()
}
