//! Scale mixtures of normals, `p(x) = ∫₀^∞ (2πv)^{-1/2} e^{-x²/2v} dF(v)`.
//!
//! Mixing measures are kept in the variance parameterization. Families
//! written in a precision `t = 1/v` are converted when they are built.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};
use crate::grid::{CharFn, GridDensity, UniformGrid};
use crate::measure::{Oscillation, SignedMixingMeasure};
use crate::quad::{adaptive, half_line, oscillatory, OscillatoryOptions, QuadOptions};
use crate::tol::{MASS_TOL, PROBE_POINTS};
use crate::transforms::{invert_charfn_with, Tails, TransformOptions};

/// `∫ N(x; 0, v) dF(v)`.
pub fn smn_density(f: &SignedMixingMeasure, x: f64) -> Result<f64> {
    let x2 = x * x;
    Ok(f.integrate(|v| (-x2 / (2.0 * v)).exp() / (2.0 * PI * v).sqrt())?.value)
}

/// `∫ e^{-v t²/2} dF(v)`.
pub fn smn_charfn(f: &SignedMixingMeasure, t: f64) -> Result<f64> {
    let t2 = t * t;
    Ok(f.integrate(|v| (-v * t2 / 2.0).exp())?.value)
}

/// Normalizing constant of the quartic density `c / (4 + x⁴)`, `c = 4/π`.
pub const QUARTIC_C: f64 = 4.0 / PI;

/// The signed mixing of the quartic density `(4/π) / (4 + x⁴)`.
///
/// In precision form the weight is `W(t) = √(2/π) t^{-1/2} sin t`; in variance
/// form `f(v) = √(2/π) v^{-3/2} sin(1/v)`, oscillating in `1/v` with zeros at `kπ`.
pub fn quartic_mixing() -> SignedMixingMeasure {
    let c = (2.0 / PI).sqrt();
    SignedMixingMeasure::density(
        move |v| if v > 0.0 { c * v.powf(-1.5) * (1.0 / v).sin() } else { 0.0 },
        Some(Oscillation::reciprocal(PI, PI)),
    )
}

pub fn quartic_density(x: f64) -> f64 {
    QUARTIC_C / (4.0 + x.powi(4))
}

pub fn quartic_charfn(t: f64) -> f64 {
    let a = t.abs();
    (-a).exp() * (a.cos() + a.sin())
}

/// `1 / (1 + |t|^α)`.
pub fn linnik_charfn(alpha: f64, t: f64) -> f64 {
    1.0 / (1.0 + t.abs().powf(alpha))
}

fn check_linnik_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 4.0) {
        return Err(invalid(format!("Linnik index must lie in (0, 4], got {alpha}")));
    }
    if alpha > 2.0 {
        log::warn!("Linnik index {alpha} > 2: the mixing is extraordinary and the density may be negative");
    }
    Ok(())
}

/// A density value that may come from a truncated, slowly convergent integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinnikValue {
    pub value: f64,
    /// Set when the inversion integral diverges and `value` is its truncation.
    pub slowly_convergent: bool,
}

/// Cutoff used for the origin when `α ≤ 1`, where the inversion integral diverges.
pub const LINNIK_ORIGIN_CUTOFF: f64 = 200.0;

/// `(1/π) ∫₀^∞ cos(tx) / (1 + t^α) dt`.
pub fn linnik_density(alpha: f64, x: f64) -> Result<LinnikValue> {
    check_linnik_alpha(alpha)?;
    let phi = move |t: f64| linnik_charfn(alpha, t);
    if x == 0.0 {
        if alpha <= 1.0 {
            let q = adaptive(|t| phi(t) / PI, 0.0, LINNIK_ORIGIN_CUTOFF, &QuadOptions::default())?;
            return Ok(LinnikValue {
                value: q.value,
                slowly_convergent: true,
            });
        }
        let q = half_line(|t| phi(t) / PI, &QuadOptions::with_tolerances(1e-13, 1e-10))?;
        return Ok(LinnikValue {
            value: q.value,
            slowly_convergent: false,
        });
    }
    let w = x.abs();
    let q = oscillatory(
        |t| phi(t) * (t * w).cos() / PI,
        move |k| if k == 0 { 0.0 } else { (k as f64 - 0.5) * PI / w },
        &OscillatoryOptions::default(),
    )?;
    Ok(LinnikValue {
        value: q.value,
        slowly_convergent: false,
    })
}

/// Linnik density on `points` nodes over `[-half_width, half_width]` by
/// discrete inversion of the sampled characteristic function.
///
/// The frequency grid is the exact conjugate of the output grid, so the
/// rectangle-rule mass is `φ(0) = 1`. Values carry the truncation error of
/// dropping `|t| > π/h`, about `(1/π) ∫_{π/h}^∞ φ`; use [`linnik_density`]
/// for accurate point values.
pub fn linnik_density_grid(alpha: f64, half_width: f64, points: usize) -> Result<GridDensity> {
    check_linnik_alpha(alpha)?;
    if points % 2 == 0 {
        return Err(invalid("grid needs an odd number of points to contain the origin"));
    }
    let h = 2.0 * half_width / (points - 1) as f64;
    let dt = 2.0 * PI / (points as f64 * h);
    let tg = UniformGrid::new(-(((points - 1) / 2) as f64) * dt, dt, points)?;
    let phi = CharFn::from_real_fn(tg, |t| linnik_charfn(alpha, t))?;
    invert_charfn_with(
        &phi,
        &TransformOptions {
            pad: 1,
            tails: Tails::Periodic,
        },
    )
}

/// Density of the positive stable law with Laplace transform `e^{-s^β}`, `0 < β < 1`.
///
/// Zolotarev's integral:
/// `g(x) = (1/π) (β/(1-β)) x^{-1/(1-β)} ∫₀^π A(u) exp(-A(u) x^{-β/(1-β)}) du`
/// with `A(u) = sin(βu)^{β/(1-β)} sin((1-β)u) / sin(u)^{1/(1-β)}`.
pub fn positive_stable_density(beta: f64, x: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(invalid(format!("stable index must lie in (0, 1), got {beta}")));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    let r = 1.0 / (1.0 - beta);
    let z = x.powf(-beta * r);
    let a = |u: f64| (beta * u).sin().powf(beta * r) * ((1.0 - beta) * u).sin() / u.sin().powf(r);
    let q = adaptive(
        |u| {
            let au = a(u);
            if !au.is_finite() {
                return 0.0;
            }
            au * (-au * z).exp()
        },
        0.0,
        PI,
        &QuadOptions::with_tolerances(1e-300, 1e-11),
    )?;
    Ok(beta * r / PI * x.powf(-r) * q.value)
}

/// Mixing `f` with `∫ e^{-st²/2} f(s) ds = e^{-|t|^α}`.
///
/// `f(s) = ½ g_{α/2}(s/2)` with `g` the positive stable density; `α = 1` uses the
/// closed form `½ φ_{1/2}(s/2)` and `α = 2` is a point mass at `s = 2`.
pub fn exp_power_mixing(alpha: f64) -> Result<SignedMixingMeasure> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(invalid(format!("exponential power index must lie in (0, 2], got {alpha}")));
    }
    if alpha == 2.0 {
        return SignedMixingMeasure::point_mass(2.0);
    }
    if alpha == 1.0 {
        return SignedMixingMeasure::density(|s| 0.5 * crate::transforms::levy_half_density(s / 2.0), None)
            .checked(MASS_TOL);
    }
    let beta = alpha / 2.0;
    Ok(SignedMixingMeasure::density(
        move |s| 0.5 * positive_stable_density(beta, s / 2.0).unwrap_or(f64::NAN),
        None,
    ))
}

/// Both sides of `∫₀^∞ N(x; 0, C/t) t^{-n/2} sin(t/2) dt = κ / (1 + (xᵀC⁻¹x)²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultivariateReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`.
    pub ratio: f64,
    /// Predicted constant `2 (2π)^{-n/2} |C|^{-1/2}`.
    pub kappa: f64,
    /// `|lhs - κ rhs|`.
    pub abs_err: f64,
}

pub fn multivariate_quartic_check(n: usize, c: &DMatrix<f64>, x: &[f64]) -> Result<MultivariateReport> {
    if n == 0 || c.nrows() != n || c.ncols() != n || x.len() != n {
        return Err(invalid("dimension mismatch between n, C and x"));
    }
    if (c - c.transpose()).abs().max() > 1e-12 * c.abs().max() {
        return Err(invalid("C must be symmetric"));
    }
    let chol = c
        .clone()
        .cholesky()
        .ok_or_else(|| invalid("C must be positive definite"))?;
    let xv = nalgebra::DVector::from_column_slice(x);
    let q = xv.dot(&chol.solve(&xv));
    let det = chol.determinant();
    let nf = n as f64;
    let norm = (2.0 * PI).powf(-nf / 2.0) / det.sqrt();
    // N(x; 0, C/t) = norm · t^{n/2} e^{-tq/2}
    let lhs = oscillatory(
        |t| {
            if t <= 0.0 {
                return 0.0;
            }
            norm * t.powf(nf / 2.0) * (-t * q / 2.0).exp() * t.powf(-nf / 2.0) * (t / 2.0).sin()
        },
        |k| 2.0 * PI * k as f64,
        &OscillatoryOptions::default(),
    )?
    .value;
    let rhs = 1.0 / (1.0 + q * q);
    let kappa = 2.0 * norm;
    Ok(MultivariateReport {
        lhs,
        rhs,
        ratio: lhs / rhs,
        kappa,
        abs_err: (lhs - kappa * rhs).abs(),
    })
}

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A named scale mixture with optional closed forms for checking.
#[derive(Clone)]
pub struct SMNFamily {
    pub name: String,
    pub mixing: SignedMixingMeasure,
    pub density_closed_form: Option<RealFn>,
    pub charfn_closed_form: Option<RealFn>,
}

impl std::fmt::Debug for SMNFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SMNFamily")
            .field("name", &self.name)
            .field("mixing", &self.mixing)
            .finish_non_exhaustive()
    }
}

impl SMNFamily {
    pub fn density(&self, x: f64) -> Result<f64> {
        match &self.density_closed_form {
            Some(p) => Ok(p(x)),
            None => smn_density(&self.mixing, x),
        }
    }

    pub fn charfn(&self, t: f64) -> Result<f64> {
        match &self.charfn_closed_form {
            Some(phi) => Ok(phi(t)),
            None => smn_charfn(&self.mixing, t),
        }
    }
}

fn family(
    name: &str,
    mixing: SignedMixingMeasure,
    p: impl Fn(f64) -> f64 + Send + Sync + 'static,
    phi: impl Fn(f64) -> f64 + Send + Sync + 'static,
) -> SMNFamily {
    SMNFamily {
        name: name.to_string(),
        mixing,
        density_closed_form: Some(Arc::new(p)),
        charfn_closed_form: Some(Arc::new(phi)),
    }
}

pub fn normal_family() -> SMNFamily {
    family(
        "normal",
        SignedMixingMeasure::point_mass(1.0).expect("valid atom"),
        |x| (-x * x / 2.0).exp() / (2.0 * PI).sqrt(),
        |t| (-t * t / 2.0).exp(),
    )
}

/// Exponential mixing with rate ½.
pub fn laplace_mixing() -> SignedMixingMeasure {
    SignedMixingMeasure::density(|v| 0.5 * (-v / 2.0).exp(), None)
        .checked(MASS_TOL)
        .expect("exponential mixing has unit mass")
}

/// Inverse chi-square mixing with one degree of freedom.
pub fn cauchy_mixing() -> SignedMixingMeasure {
    SignedMixingMeasure::density(
        |v| if v > 0.0 { v.powf(-1.5) * (-0.5 / v).exp() / (2.0 * PI).sqrt() } else { 0.0 },
        None,
    )
    .checked(MASS_TOL)
    .expect("inverse chi-square mixing has unit mass")
}

pub fn laplace_family() -> SMNFamily {
    family("laplace", laplace_mixing(), |x| 0.5 * (-x.abs()).exp(), |t| 1.0 / (1.0 + t * t))
}

pub fn cauchy_family() -> SMNFamily {
    family("cauchy", cauchy_mixing(), |x| 1.0 / (PI * (1.0 + x * x)), |t| (-t.abs()).exp())
}

/// `½ N(0, 1) + ½ N(0, 4)`.
pub fn normal_mixture_family() -> SMNFamily {
    let n = |x: f64, v: f64| (-x * x / (2.0 * v)).exp() / (2.0 * PI * v).sqrt();
    family(
        "normal_mixture",
        SignedMixingMeasure::atoms(vec![(1.0, 0.5), (4.0, 0.5)]).expect("valid atoms"),
        move |x| 0.5 * n(x, 1.0) + 0.5 * n(x, 4.0),
        |t| 0.5 * (-t * t / 2.0).exp() + 0.5 * (-2.0 * t * t).exp(),
    )
}

pub fn quartic_family() -> SMNFamily {
    family("quartic", quartic_mixing(), quartic_density, quartic_charfn)
}

/// Exponential power family `e^{-|t|^α}` in the characteristic function.
///
/// Closed forms exist for `α = 1` (Cauchy) and `α = 2` (normal with variance 2).
pub fn exp_power_family(alpha: f64) -> Result<SMNFamily> {
    let mixing = exp_power_mixing(alpha)?;
    let name = format!("exp_power_{alpha}");
    let phi: RealFn = Arc::new(move |t: f64| (-t.abs().powf(alpha)).exp());
    let density: Option<RealFn> = if alpha == 1.0 {
        Some(Arc::new(|x: f64| 1.0 / (PI * (1.0 + x * x))))
    } else if alpha == 2.0 {
        Some(Arc::new(|x: f64| (-x * x / 4.0).exp() / (4.0 * PI).sqrt()))
    } else {
        None
    };
    Ok(SMNFamily {
        name,
        mixing,
        density_closed_form: density,
        charfn_closed_form: Some(phi),
    })
}

/// The named families with closed forms.
pub fn catalog() -> Vec<SMNFamily> {
    vec![
        normal_family(),
        laplace_family(),
        cauchy_family(),
        normal_mixture_family(),
        quartic_family(),
        exp_power_family(1.0).expect("valid index"),
        exp_power_family(2.0).expect("valid index"),
    ]
}

pub fn catalog_family(name: &str) -> Option<SMNFamily> {
    catalog().into_iter().find(|f| f.name == name)
}

/// A spread that may be infinite, or undefined when the dual is not a density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Spread {
    Finite(f64),
    Infinite,
    /// The dual takes negative values, so it has no standard deviation.
    NotApplicable,
}

impl Spread {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Spread::Infinite)
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Spread::Finite(v) => Some(*v),
            _ => None,
        }
    }
}

/// Second moment `∫ x² g(x) dx` of a symmetric function over growing windows.
///
/// Windows double from `[-1, 1]`. Increments that stop shrinking over three
/// doublings mean divergence.
fn second_moment(g: impl Fn(f64) -> f64) -> Result<Spread> {
    let opts = QuadOptions::with_tolerances(1e-15, 1e-12);
    let mut total = 2.0 * adaptive(|x| x * x * g(x), 0.0, 1.0, &opts)?.value;
    let mut last_inc = f64::INFINITY;
    let mut stalled = 0;
    let mut l = 1.0;
    for _ in 0..60 {
        let inc = 2.0 * adaptive(|x| x * x * g(x), l, 2.0 * l, &opts)?.value;
        l *= 2.0;
        total += inc;
        if inc.abs() <= 1e-14 * total.abs() {
            return Ok(Spread::Finite(total));
        }
        if inc.abs() >= 0.9 * last_inc.abs() {
            stalled += 1;
            if stalled >= 3 {
                return Ok(Spread::Infinite);
            }
        } else {
            stalled = 0;
        }
        last_inc = inc;
    }
    // slow geometric decay: extrapolate the remaining increments
    let r = (last_inc / total).abs();
    if r < 1e-6 {
        Ok(Spread::Finite(total))
    } else {
        Ok(Spread::Infinite)
    }
}

/// `σ_p σ_p̂` for the family density `p` and its dual `p̂(t) = φ(t) / (2π p(0))`.
///
/// Both second moments are computed by quadrature over doubling windows.
/// Returns [`Spread::NotApplicable`] when `p̂` is negative somewhere on `[0, 50]`.
pub fn gneiting_product(family: &SMNFamily) -> Result<Spread> {
    let p0 = family.density(0.0)?;
    if !(p0 > 0.0) {
        return Err(Error::OriginValue(p0));
    }
    let signed = (0..PROBE_POINTS).any(|i| {
        let t = 50.0 * i as f64 / (PROBE_POINTS - 1) as f64;
        family.charfn(t).map(|v| v < -1e-12).unwrap_or(true)
    });
    if signed {
        return Ok(Spread::NotApplicable);
    }
    let sp = second_moment(|x| family.density(x).unwrap_or(f64::NAN))?;
    let sd = second_moment(|t| family.charfn(t).unwrap_or(f64::NAN) / (2.0 * PI * p0))?;
    Ok(match (sp, sd) {
        (Spread::Finite(a), Spread::Finite(b)) => Spread::Finite((a * b).sqrt()),
        _ => Spread::Infinite,
    })
}
