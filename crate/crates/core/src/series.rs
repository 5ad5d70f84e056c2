//! Truncated power series standing for (possibly signed) probability
//! generating functions.

use std::f64::consts::PI;
use std::io::Write;

use statrs::function::beta::ln_beta;

use crate::error::{invalid, Error, Result};
use crate::grid::fmt_num;
use crate::measure::SignedPmf;
use crate::quad::{adaptive, QuadOptions};
use crate::tol::{MASS_TOL, SERIES_ORDER};

/// Coefficients `c_0..=c_N` of a series truncated at order `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries {
    coeffs: Vec<f64>,
}

impl PowerSeries {
    /// A series truncated at `order`; missing coefficients are zero, extra ones are dropped.
    pub fn new(mut coeffs: Vec<f64>, order: usize) -> Result<Self> {
        if let Some(k) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(invalid(format!("coefficient {k} is not finite")));
        }
        coeffs.resize(order + 1, 0.0);
        Ok(PowerSeries { coeffs })
    }

    /// A polynomial, truncated at `max(SERIES_ORDER, degree)`.
    pub fn polynomial(coeffs: &[f64]) -> Result<Self> {
        let order = SERIES_ORDER.max(coeffs.len().saturating_sub(1));
        Self::new(coeffs.to_vec(), order)
    }

    pub fn one(order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = 1.0;
        PowerSeries { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn truncate(&self, order: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(order + 1, 0.0);
        PowerSeries { coeffs }
    }

    /// Horner evaluation of the truncated series.
    pub fn eval(&self, s: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * s + c)
    }

    /// `Σ c_n`, the total mass when the series is a generating function.
    pub fn eval_one(&self) -> f64 {
        self.coeffs.iter().sum()
    }

    pub fn abs_sum(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }

    pub fn is_ordinary(&self) -> bool {
        self.coeffs.iter().all(|&c| c >= -MASS_TOL)
    }

    /// The coefficients as a signed PMF on `0..=N`; fails unless they sum to 1.
    pub fn to_pmf(&self) -> Result<SignedPmf> {
        SignedPmf::from_weights(&self.coeffs)
    }

    /// CSV with columns `index,coefficient`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["index", "coefficient"])?;
        for (k, c) in self.coeffs.iter().enumerate() {
            wtr.write_record([k.to_string(), fmt_num(*c)])?;
        }
        wtr.flush()?;
        Ok(())
    }

    fn scale(&self, a: f64) -> Self {
        PowerSeries {
            coeffs: self.coeffs.iter().map(|c| a * c).collect(),
        }
    }

    fn add(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        PowerSeries {
            coeffs: (0..=n).map(|k| self.coeffs[k] + other.coeffs[k]).collect(),
        }
    }
}

/// Cauchy product truncated at the smaller of the two orders.
pub fn series_mul(a: &PowerSeries, b: &PowerSeries) -> PowerSeries {
    let n = a.order().min(b.order());
    let coeffs = (0..=n)
        .map(|k| (0..=k).map(|j| a.coeffs[j] * b.coeffs[k - j]).sum())
        .collect();
    PowerSeries { coeffs }
}

/// A reciprocal series together with the divergence verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct Reciprocal {
    pub series: PowerSeries,
    /// `|c_N| / |c_{N/2}| > 1`: the coefficients grow and the truncation is not a
    /// faithful stand-in for an absolutely convergent reciprocal.
    pub divergent: bool,
}

/// `1 / a` by the triangular recurrence; warns when the coefficients grow.
pub fn series_reciprocal(a: &PowerSeries) -> Result<Reciprocal> {
    let c0 = a.coeffs[0];
    if c0 == 0.0 {
        return Err(Error::ConstantTerm(c0));
    }
    let n = a.order();
    let b = series_reciprocal_quiet(a).coeffs;
    let divergent = growth_flag(&b);
    if divergent {
        log::warn!(
            "reciprocal series coefficients grow (|c_{n}| = {:e}); the reciprocal is not absolutely convergent",
            b[n].abs()
        );
    }
    Ok(Reciprocal {
        series: PowerSeries { coeffs: b },
        divergent,
    })
}

fn growth_flag(b: &[f64]) -> bool {
    let n = b.len() - 1;
    if n < 2 {
        return false;
    }
    let (hi, mid) = (b[n].abs(), b[n / 2].abs());
    if mid == 0.0 {
        hi > 0.0
    } else {
        hi / mid > 1.0
    }
}

/// Square root by Newton iteration `b ← (b + a / b) / 2`, started from `√c_0`.
pub fn series_sqrt(a: &PowerSeries) -> Result<PowerSeries> {
    let c0 = a.coeffs[0];
    if !(c0 > 0.0) {
        return Err(Error::ConstantTerm(c0));
    }
    let n = a.order();
    let mut b = PowerSeries::new(vec![c0.sqrt()], n)?;
    // each step doubles the number of correct coefficients
    let steps = usize::BITS - (n + 1).leading_zeros() + 2;
    for _ in 0..steps {
        let q = series_mul(a, &series_reciprocal_quiet(&b));
        b = b.add(&q).scale(0.5);
    }
    Ok(b)
}

fn series_reciprocal_quiet(a: &PowerSeries) -> PowerSeries {
    let n = a.order();
    let c0 = a.coeffs[0];
    let mut b = vec![0.0; n + 1];
    b[0] = 1.0 / c0;
    for k in 1..=n {
        let s: f64 = (1..=k).map(|j| a.coeffs[j] * b[k - j]).sum();
        b[k] = -s / c0;
    }
    PowerSeries { coeffs: b }
}

/// Catalan number `C_n` in floating point.
pub fn catalan(n: usize) -> f64 {
    // C_{k+1} = C_k · 2(2k+1)/(k+2)
    (0..n).fold(1.0, |c, k| c * (2.0 * (2 * k + 1) as f64) / (k + 2) as f64)
}

/// `binom(1/2, n)` for `n = 0..=n_max` through the Catalan form
/// `(-1)^{n-1} 2 C_{n-1} / 4^n`.
///
/// `C_{n-1} / 4^n` is carried as one scaled quantity, since `C_n` alone
/// overflows `f64` past `n ≈ 500`.
pub fn binom_half_coeffs(n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(1.0);
    // r = C_{n-1} / 4^n, starting at n = 1 with C_0 / 4
    let mut r = 0.25;
    for n in 1..=n_max {
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        out.push(sign * 2.0 * r);
        // C_n / C_{n-1} = 2(2n - 1)/(n + 1)
        r *= 2.0 * (2 * n - 1) as f64 / (n + 1) as f64 / 4.0;
    }
    out
}

pub fn binom_half(n: usize) -> f64 {
    binom_half_coeffs(n)[n]
}

/// Generating function of the half-coin, `√(1/2 + s/2)`, through order `n_max`.
pub fn halfcoin_coeffs(n_max: usize) -> PowerSeries {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    PowerSeries {
        coeffs: binom_half_coeffs(n_max).into_iter().map(|b| r * b).collect(),
    }
}

/// `(q + p s)^n` with `q = 1 - p`; negative `n` gives the reciprocal of the `|n|`-th power.
pub fn binomial_pgf(n: i64, p: f64, order: usize) -> Result<PowerSeries> {
    if n == 0 {
        return Err(invalid("binomial exponent must be nonzero"));
    }
    if !p.is_finite() {
        return Err(invalid("binomial parameter must be finite"));
    }
    let base = PowerSeries::new(vec![1.0 - p, p], order)?;
    let mut power = PowerSeries::one(order);
    for _ in 0..n.unsigned_abs() {
        power = series_mul(&power, &base);
    }
    if n > 0 {
        Ok(power)
    } else {
        Ok(series_reciprocal(&power)?.series)
    }
}

/// Which hyperbolic argument to use in the Pólya-Gamma Laplace transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgConvention {
    /// `cosh^{-b}(√t)`.
    FullArgument,
    /// `cosh^{-b}(√(t/2))`.
    HalfArgument,
}

/// `E e^{-tX}` for a Pólya-Gamma `PG(b, 0)` variable under the chosen convention.
pub fn pg_laplace(b: f64, t: f64, convention: PgConvention) -> Result<f64> {
    if !(t >= 0.0) || !(b > 0.0) {
        return Err(invalid(format!("pg_laplace needs t ≥ 0 and b > 0, got t = {t}, b = {b}")));
    }
    let arg = match convention {
        PgConvention::FullArgument => t.sqrt(),
        PgConvention::HalfArgument => (t / 2.0).sqrt(),
    };
    // cosh^{-b}(a) = (2 e^{-a} / (1 + e^{-2a}))^b, stable for large a
    let e = (-arg).exp();
    Ok((2.0 * e / (1.0 + e * e)).powf(b))
}

/// A truncated alternating sum with its tail bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    /// Magnitude of the first omitted term.
    pub tail: f64,
    pub terms: usize,
    pub converged: bool,
}

/// Mixing density `Σ_k binom(-2δ, k) (δ + k) / B(δ, δ) e^{-(δ+k)² u / 2}`, truncated.
///
/// Stops once two successive terms fall below `1e-14`, or after `k_max` terms.
pub fn bn_mixing_density(delta: f64, u: f64, k_max: usize) -> Result<SeriesValue> {
    if !(delta > 0.0) || !(u > 0.0) || k_max < 1 {
        return Err(invalid(format!(
            "bn_mixing_density needs δ > 0, u > 0, K ≥ 1 (got {delta}, {u}, {k_max})"
        )));
    }
    let inv_beta = (-ln_beta(delta, delta)).exp();
    let term = |k: usize, binom: f64| {
        let d = delta + k as f64;
        binom * d * inv_beta * (-0.5 * d * d * u).exp()
    };
    let mut binom = 1.0;
    let mut sum = 0.0;
    let mut small_run = 0;
    let mut terms = 0;
    for k in 0..k_max {
        if k > 0 {
            // binom(-2δ, k) = binom(-2δ, k-1) · (-(2δ + k - 1) / k)
            binom *= -(2.0 * delta + (k - 1) as f64) / k as f64;
        }
        let t = term(k, binom);
        sum += t;
        terms = k + 1;
        if t.abs() < 1e-14 {
            small_run += 1;
            if small_run >= 2 {
                break;
            }
        } else {
            small_run = 0;
        }
    }
    let next_binom = binom * -(2.0 * delta + (terms - 1) as f64) / terms as f64;
    let tail = term(terms, next_binom).abs();
    let converged = tail.is_finite() && tail <= 1e-10_f64.max(1e-8 * sum.abs());
    if !converged {
        log::warn!("Barndorff-Nielsen mixing series not converged at u = {u}: tail {tail:e} after {terms} terms");
    }
    Ok(SeriesValue {
        value: sum,
        tail,
        terms,
        converged,
    })
}

/// Residual and sign report for a claimed factorization `f g = h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorizationReport {
    pub residual: f64,
    pub f_ordinary: bool,
    pub g_ordinary: bool,
    pub h_ordinary: bool,
}

pub fn factorization_check(f: &PowerSeries, g: &PowerSeries, h: &PowerSeries) -> FactorizationReport {
    let fg = series_mul(f, g);
    let n = fg.order().min(h.order());
    let residual = (0..=n).map(|k| (fg.coeffs[k] - h.coeffs[k]).abs()).fold(0.0, f64::max);
    FactorizationReport {
        residual,
        f_ordinary: f.is_ordinary(),
        g_ordinary: g.is_ordinary(),
        h_ordinary: h.is_ordinary(),
    }
}

/// Below this `u` the mixing density is treated as zero in [`bn_laplace_transform`].
const BN_U_MIN: f64 = 1e-3;

/// `∫₀^∞ e^{-tu} f(u) du` for the mixing density of [`bn_mixing_density`], by quadrature.
///
/// The density is evaluated with up to 20000 series terms; it is negligible
/// below `u = 1e-3` for `δ ≥ 1/2`, which is checked.
pub fn bn_laplace_transform(delta: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(invalid(format!("t must be ≥ 0, got {t}")));
    }
    let f = |u: f64| bn_mixing_density(delta, u, 20_000).map(|v| v.value).unwrap_or(f64::NAN);
    let edge = f(BN_U_MIN).abs();
    if edge > 1e-12 {
        return Err(Error::Divergent(format!(
            "mixing density is {edge:e} at u = {BN_U_MIN}; the Laplace integral would be truncated"
        )));
    }
    let opts = QuadOptions::with_tolerances(1e-14, 1e-12);
    let upper = 2.0 + 80.0 / (delta * delta);
    let mut total = 0.0;
    for (a, b) in [(BN_U_MIN, 0.5), (0.5, 2.0), (2.0, upper)] {
        total += adaptive(|u| (-t * u).exp() * f(u), a, b, &opts)?.value;
    }
    Ok(total)
}

/// `πa / sinh(πa)` with `a = √(2t)`: the Laplace transform of the `δ = 1` mixing density,
/// from `Σ_n (-1)^{n+1} n² / (n² + a²) = πa / (2 sinh πa)` in the Abel sense.
pub fn bn_laplace_delta_one(t: f64) -> f64 {
    let x = PI * (2.0 * t).sqrt();
    if x == 0.0 {
        1.0
    } else {
        x / x.sinh()
    }
}

/// Which Pólya-Gamma convention, if any, matches the numerical Laplace transform
/// of the mixing density with `b = 2δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PgResolution {
    pub delta: f64,
    pub ts: Vec<f64>,
    /// Numerical Laplace transform at each `t`.
    pub transform: Vec<f64>,
    pub full_argument_max_err: f64,
    pub half_argument_max_err: f64,
    pub tol: f64,
    /// Conventions with max error ≤ `tol`.
    pub matching: Vec<PgConvention>,
}

impl PgResolution {
    /// The unique matching convention, if exactly one matches.
    pub fn resolved(&self) -> Option<PgConvention> {
        match self.matching.as_slice() {
            [c] => Some(*c),
            _ => None,
        }
    }
}

pub fn pg_convention_resolution(delta: f64, ts: &[f64], tol: f64) -> Result<PgResolution> {
    let b = 2.0 * delta;
    let transform = ts.iter().map(|&t| bn_laplace_transform(delta, t)).collect::<Result<Vec<_>>>()?;
    let max_err = |c: PgConvention| -> Result<f64> {
        let mut worst = 0.0f64;
        for (&t, l) in ts.iter().zip(&transform) {
            worst = worst.max((pg_laplace(b, t, c)? - l).abs());
        }
        Ok(worst)
    };
    let full_argument_max_err = max_err(PgConvention::FullArgument)?;
    let half_argument_max_err = max_err(PgConvention::HalfArgument)?;
    let matching = [(PgConvention::FullArgument, full_argument_max_err), (PgConvention::HalfArgument, half_argument_max_err)]
        .into_iter()
        .filter(|(_, e)| *e <= tol)
        .map(|(c, _)| c)
        .collect();
    Ok(PgResolution {
        delta,
        ts: ts.to_vec(),
        transform,
        full_argument_max_err,
        half_argument_max_err,
        tol,
        matching,
    })
}
