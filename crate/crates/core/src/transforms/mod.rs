//! Characteristic functions, Fourier inversion, dual densities, Laplace
//! transforms of mixing measures and complete-monotonicity testing.

mod fourier;
mod tails;

use std::f64::consts::PI;

use num_complex::Complex64;

pub use fourier::{Tails, DECAY_RATIO};
pub use tails::{power_tail_transform, PowerTail};

use crate::error::{invalid, Error, Result};
use crate::grid::{CharFn, GridDensity};
use crate::measure::{MixingForm, Oscillation, OscillationVariable, SignedMixingMeasure};
use crate::quad::{linear_breakpoints, oscillatory, OscillatoryOptions, QuadEstimate};
use crate::tol::MASS_TOL;
use fourier::{fourier_at, fourier_sum, resolve_tails, ResolvedTails};

/// Options for [`charfn_with`] and [`invert_charfn_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformOptions {
    /// Zero-padding factor; the output grid has about `pad` times as many points.
    pub pad: usize,
    pub tails: Tails,
}

impl Default for TransformOptions {
    fn default() -> Self {
        TransformOptions { pad: 4, tails: Tails::Auto }
    }
}

fn to_complex(values: &[f64]) -> Vec<Complex64> {
    values.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

/// `φ(t) = ∫ e^{itx} p(x) dx` on the conjugate frequency grid, zero-padded by 4.
///
/// Densities that have not decayed at the grid ends get a power-law tail
/// correction; if no power law fits, the result is [`Error::InsufficientDecay`].
pub fn charfn(d: &GridDensity) -> Result<CharFn> {
    charfn_with(d, &TransformOptions::default())
}

pub fn charfn_with(d: &GridDensity, opts: &TransformOptions) -> Result<CharFn> {
    let values = to_complex(d.values());
    let tails = resolve_tails(d.grid(), &values, opts.tails)?;
    let r = fourier_sum(d.grid(), &values, 1.0, opts.pad, tails)?;
    Ok(CharFn::new(r.grid, r.values)?.with_periodic(tails == ResolvedTails::Periodic))
}

/// Largest tolerated `|φ(-t) - conj φ(t)|` relative to `max |φ|`.
const HERMITIAN_TOL: f64 = 1e-8;

fn check_hermitian(phi: &CharFn) -> Result<f64> {
    let peak = phi.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let residual = phi.hermitian_residual();
    if residual > HERMITIAN_TOL * peak.max(f64::MIN_POSITIVE) {
        return Err(Error::NonHermitian(residual));
    }
    Ok(peak)
}

/// `p(x) = (2π)^{-1} ∫ e^{-itx} φ(t) dt` on the conjugate spatial grid.
///
/// A characteristic function produced by [`charfn`] from a decayed density is
/// inverted with the matching discrete inverse, so the round trip reproduces the
/// input samples on the common nodes.
pub fn invert_charfn(phi: &CharFn) -> Result<GridDensity> {
    invert_charfn_with(phi, &TransformOptions { pad: 1, tails: Tails::Auto })
}

pub fn invert_charfn_with(phi: &CharFn, opts: &TransformOptions) -> Result<GridDensity> {
    let peak = check_hermitian(phi)?;
    let tails = if phi.is_periodic() && opts.tails == Tails::Auto {
        ResolvedTails::Periodic
    } else {
        resolve_tails(phi.grid(), phi.values(), opts.tails)?
    };
    let r = fourier_sum(phi.grid(), phi.values(), -1.0, opts.pad, tails)?;
    let scale = 1.0 / (2.0 * PI);
    let imag = r.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max) * scale;
    if imag > HERMITIAN_TOL * peak.max(1.0) {
        return Err(Error::NonHermitian(imag));
    }
    GridDensity::new(r.grid, r.values.iter().map(|v| v.re * scale).collect())
}

/// Density at a single point by direct summation of the inversion integral.
///
/// Uses trapezoid weights and the power-law tail of `φ` beyond the grid,
/// which is more accurate than the discrete inverse when `φ` decays slowly.
pub fn invert_at(phi: &CharFn, x: f64, tails: Tails) -> Result<f64> {
    check_hermitian(phi)?;
    let t = resolve_tails(phi.grid(), phi.values(), tails)?;
    let v = fourier_at(phi.grid(), phi.values(), -x, t)?;
    Ok(v.re / (2.0 * PI))
}

/// Dual density `p̂(t) = φ_p(t) / (2π p(0))`.
///
/// The transform runs without padding and without tail correction, so the
/// output grid is exactly conjugate to the input and the operation is an
/// involution on the grid. The origin must be a grid node.
pub fn dual_density(p: &GridDensity) -> Result<GridDensity> {
    let i0 = p
        .grid()
        .index_of(0.0)
        .ok_or_else(|| invalid("dual density needs a grid node at the origin"))?;
    let p0 = p.values()[i0];
    if !(p0 > 0.0) {
        return Err(Error::OriginValue(p0));
    }
    let values = to_complex(p.values());
    let r = fourier_sum(p.grid(), &values, 1.0, 1, ResolvedTails::Periodic)?;
    let peak = r.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let imag = r.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    if imag > HERMITIAN_TOL * peak {
        // an asymmetric density has a complex characteristic function
        return Err(Error::NonHermitian(imag));
    }
    let scale = 1.0 / (2.0 * PI * p0);
    let d = GridDensity::new(r.grid, r.values.iter().map(|v| v.re * scale).collect())?;
    match d.clone().normalized() {
        Ok(n) => Ok(n),
        Err(Error::Mass { actual, .. }) => {
            log::warn!("dual density has mass {actual}; left unnormalized");
            Ok(d)
        }
        Err(e) => Err(e),
    }
}

/// Dual mixing measure `f̂(v) = (2π)^{-1/2} p0^{-1} v^{-3/2} f(1/v)`.
///
/// An atom at `a` with weight `w` maps to an atom at `1/a` with weight
/// `w / (p0 √(2π a))`. The result is flagged normalized when its mass is 1.
pub fn dual_mixing(f: &SignedMixingMeasure, p0: f64) -> Result<SignedMixingMeasure> {
    if !(p0 > 0.0) {
        return Err(Error::OriginValue(p0));
    }
    let c = 1.0 / ((2.0 * PI).sqrt() * p0);
    let out = match f.form() {
        MixingForm::Atoms(atoms) => {
            SignedMixingMeasure::atoms(atoms.iter().map(|&(a, w)| (1.0 / a, w * c / a.sqrt())).collect())?
        }
        MixingForm::Density { f: g, oscillation } => {
            let g = g.clone();
            let osc = oscillation.map(|o| Oscillation {
                variable: match o.variable {
                    OscillationVariable::Direct => OscillationVariable::Reciprocal,
                    OscillationVariable::Reciprocal => OscillationVariable::Direct,
                },
                ..o
            });
            SignedMixingMeasure::density(move |v| c * v.powf(-1.5) * g(1.0 / v), osc)
        }
        MixingForm::Grid { .. } => return Err(invalid("dual mixing needs an atomic or density measure")),
    };
    if out.is_normalized() {
        return Ok(out);
    }
    match out.clone().checked(MASS_TOL) {
        Ok(n) => Ok(n),
        Err(Error::Mass { actual, .. }) => {
            log::warn!("dual mixing measure has mass {actual}; left unnormalized");
            Ok(out)
        }
        Err(e) => Err(e),
    }
}

/// `∫₀^∞ e^{-sx} dF(s)` for `x > 0`.
pub fn laplace_transform(f: &SignedMixingMeasure, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(invalid(format!("Laplace transform needs x > 0, got {x}")));
    }
    Ok(f.integrate(|s| (-s * x).exp())?.value)
}

/// Outcome of a complete-monotonicity test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CmReport {
    pub pass: bool,
    /// First `(x, j)` with `(-1)^j Δ^j f(x) < -tol`, ordered by `j` then `x`.
    pub violation: Option<(f64, usize)>,
    pub order: usize,
    pub step: f64,
    pub tol: f64,
}

/// Largest difference order accepted by [`completely_monotone_test`].
pub const CM_MAX_ORDER: usize = 10;

/// Checks `(-1)^j Δ_h^j f(x) ≥ -tol` for `j = 0..=order` with `h = (b - a)/2048`
/// and `tol = 1e-7 max |f|`.
pub fn completely_monotone_test(f: impl Fn(f64) -> f64, domain: (f64, f64), order: usize) -> Result<CmReport> {
    let (a, b) = domain;
    if !(a > 0.0 && b > a) {
        return Err(invalid(format!("domain must satisfy 0 < a < b, got ({a}, {b})")));
    }
    if order > CM_MAX_ORDER {
        return Err(invalid(format!("order {order} exceeds {CM_MAX_ORDER}")));
    }
    const INTERVALS: usize = 2048;
    let h = (b - a) / INTERVALS as f64;
    let mut diff: Vec<f64> = (0..=INTERVALS).map(|i| f(a + i as f64 * h)).collect();
    let tol = 1e-7 * diff.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let mut violation = None;
    for j in 0..=order {
        if j > 0 {
            for i in 0..diff.len() - 1 {
                diff[i] = diff[i + 1] - diff[i];
            }
            diff.pop();
        }
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        if let Some(i) = diff.iter().position(|&d| sign * d < -tol) {
            violation = Some((a + i as f64 * h, j));
            break;
        }
    }
    Ok(CmReport {
        pass: violation.is_none(),
        violation,
        order,
        step: h,
        tol,
    })
}

/// Both sides of an integral identity and their difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub abs_err: f64,
    pub quad_error: f64,
}

impl IdentityReport {
    fn new(lhs: QuadEstimate, rhs: f64) -> Self {
        IdentityReport {
            lhs: lhs.value,
            rhs,
            abs_err: (lhs.value - rhs).abs(),
            quad_error: lhs.error,
        }
    }
}

/// `φ_{1/2}(t) = t^{-3/2} e^{-1/(4t)} / (2√π)`, the density of the positive stable law of index 1/2.
pub fn levy_half_density(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    t.powf(-1.5) * (-0.25 / t).exp() / (2.0 * PI.sqrt())
}

/// `(1/π) ∫₀^∞ e^{-tu} sin(√u) du` against `φ_{1/2}(t)`.
///
/// The left side is integrated in `r = √u`, where the sine zeros are `kπ`.
pub fn levy_half_identity_check(t: f64) -> Result<IdentityReport> {
    if !(t > 0.0) {
        return Err(invalid(format!("t must be positive, got {t}")));
    }
    let q = oscillatory(
        |r| 2.0 * r * (-t * r * r).exp() * r.sin() / PI,
        linear_breakpoints(0.0, PI),
        &OscillatoryOptions::default(),
    )?;
    Ok(IdentityReport::new(q, levy_half_density(t)))
}

/// Which form of the Laplace-transform identity for `1/(1+x²)` holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CauchyIdentityReport {
    pub x: f64,
    pub target: f64,
    /// `∫₀^∞ e^{-tx} sin t dt`.
    pub plain: f64,
    /// `∫₀^∞ e^{-tx} t^{-1/2} sin t dt`.
    pub sqrt_weighted: f64,
    pub plain_matches: bool,
    pub sqrt_weighted_matches: bool,
}

pub fn cauchy_identity_check(x: f64, tol: f64) -> Result<CauchyIdentityReport> {
    if !(x > 0.0) {
        return Err(invalid(format!("x must be positive, got {x}")));
    }
    let o = OscillatoryOptions::default();
    let plain = oscillatory(|t| (-t * x).exp() * t.sin(), linear_breakpoints(0.0, PI), &o)?.value;
    let sqrt_weighted = oscillatory(
        |t| if t > 0.0 { (-t * x).exp() * t.sin() / t.sqrt() } else { 0.0 },
        linear_breakpoints(0.0, PI),
        &o,
    )?
    .value;
    let target = 1.0 / (1.0 + x * x);
    Ok(CauchyIdentityReport {
        x,
        target,
        plain,
        sqrt_weighted,
        plain_matches: (plain - target).abs() <= tol,
        sqrt_weighted_matches: (sqrt_weighted - target).abs() <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::UniformGrid;
    use proptest::prelude::*;

    fn normal(x: f64) -> f64 {
        (-x * x / 2.0).exp() / (2.0 * PI).sqrt()
    }
    fn laplace(x: f64) -> f64 {
        0.5 * (-x.abs()).exp()
    }
    fn cauchy(x: f64) -> f64 {
        1.0 / (PI * (1.0 + x * x))
    }

    fn sup_err(d: &GridDensity, f: impl Fn(f64) -> f64, range: f64) -> f64 {
        d.grid()
            .points()
            .iter()
            .zip(d.values())
            .filter(|(x, _)| x.abs() <= range)
            .map(|(&x, v)| (v - f(x)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn normal_charfn() {
        let d = GridDensity::from_fn(UniformGrid::standard(1.0).unwrap(), normal).unwrap();
        let phi = charfn(&d).unwrap();
        assert!(phi.is_periodic());
        let err = phi
            .grid()
            .points()
            .iter()
            .zip(phi.values())
            .map(|(&t, v)| (v - Complex64::new((-t * t / 2.0).exp(), 0.0)).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
        assert!((phi.at_zero().unwrap().re - 1.0).abs() < 1e-8);
    }

    #[test]
    fn cauchy_charfn_with_power_law_tail() {
        let d = GridDensity::from_fn(UniformGrid::symmetric(200.0, 6401).unwrap(), cauchy).unwrap();
        assert!(matches!(
            charfn_with(&d, &TransformOptions { pad: 4, tails: Tails::Strict }),
            Err(Error::InsufficientDecay { .. })
        ));
        let phi = charfn(&d).unwrap();
        assert!(!phi.is_periodic());
        let err = phi
            .grid()
            .points()
            .iter()
            .zip(phi.values())
            .filter(|(t, _)| t.abs() <= 5.0)
            .map(|(&t, v)| (v - Complex64::new((-t.abs()).exp(), 0.0)).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn narrow_normal_is_nearly_constant() {
        let s = 1e-2;
        let g = UniformGrid::symmetric(8.0 * s, 4097).unwrap();
        let d = GridDensity::from_fn(g, |x| normal(x / s) / s).unwrap();
        let phi = charfn(&d).unwrap();
        for t in [-10.0, -3.0, 0.0, 4.0, 10.0] {
            assert!(phi.value_at(t).unwrap().norm() >= 0.99);
        }
    }

    #[test]
    fn round_trip_is_identity() {
        let d = GridDensity::from_fn(UniformGrid::standard(1.0).unwrap(), normal).unwrap();
        let back = invert_charfn(&charfn(&d).unwrap()).unwrap();
        let mut worst = 0.0_f64;
        for (i, v) in d.values().iter().enumerate() {
            let j = back.grid().index_of(d.grid().point(i)).unwrap();
            worst = worst.max((back.values()[j] - v).abs());
        }
        assert!(worst < 1e-12, "{worst}");
    }

    #[test]
    fn inversions_of_closed_forms() {
        let g = UniformGrid::symmetric(40.0, 8001).unwrap();
        let phi = CharFn::from_real_fn(g, |t| (-t * t / 2.0).exp()).unwrap();
        assert!(sup_err(&invert_charfn(&phi).unwrap(), normal, 8.0) < 1e-10);

        let g = UniformGrid::symmetric(200.0, 8001).unwrap();
        let phi = CharFn::from_real_fn(g, |t| 1.0 / (1.0 + t * t)).unwrap();
        for x in [0.5, 1.0, 3.0] {
            let v = invert_at(&phi, x, Tails::Auto).unwrap();
            assert!((v - laplace(x)).abs() < 1e-6, "x = {x}: {v}");
        }
        // the kink at t = 0 costs about h²/(6π) in the trapezoid sum
        let g = UniformGrid::symmetric(60.0, 48001).unwrap();
        let phi = CharFn::from_real_fn(g, |t| (-t.abs()).exp()).unwrap();
        assert!(sup_err(&invert_charfn(&phi).unwrap(), cauchy, 8.0) < 1e-6);
    }

    #[test]
    fn non_hermitian_rejected() {
        let g = UniformGrid::symmetric(5.0, 101).unwrap();
        let phi = CharFn::from_fn(g, |t| Complex64::new((-t * t).exp(), 0.3 * (-t * t).exp())).unwrap();
        assert!(matches!(invert_charfn(&phi), Err(Error::NonHermitian(_))));
    }

    // fine enough that the Cauchy edge values on the dual grid keep the
    // trapezoid mass within 1e-8 of the exact rectangle mass
    fn laplace_grid() -> GridDensity {
        GridDensity::from_fn(UniformGrid::new(-40.0, 1.0 / 1024.0, 81921).unwrap(), laplace).unwrap()
    }

    #[test]
    fn laplace_dual_is_cauchy_and_involution() {
        let p = laplace_grid();
        let ph = dual_density(&p).unwrap();
        assert!(ph.is_normalized());
        assert!(sup_err(&ph, cauchy, 8.0) < 1e-6);
        let back = dual_density(&ph).unwrap();
        assert!(sup_err(&back, laplace, 8.0) < 1e-6);
        assert!(ph.asymmetry() < 1e-12);
    }

    #[test]
    fn normal_is_self_dual() {
        // step chosen so the conjugate grid has the same step: h = √(2π/N)
        let n = 4097;
        let h = (2.0 * PI / n as f64).sqrt();
        let grid = UniformGrid::new(-(((n - 1) / 2) as f64) * h, h, n).unwrap();
        let p = GridDensity::from_fn(grid, normal).unwrap();
        let ph = dual_density(&p).unwrap();
        assert!(sup_err(&ph, normal, 8.0) < 1e-12);
    }

    #[test]
    fn dual_needs_origin() {
        let p = GridDensity::from_fn(UniformGrid::new(0.05, 0.1, 100).unwrap(), laplace).unwrap();
        assert!(dual_density(&p).is_err());
        let p = GridDensity::from_fn(UniformGrid::symmetric(5.0, 101).unwrap(), |x| x * x * laplace(x)).unwrap();
        assert!(matches!(dual_density(&p), Err(Error::OriginValue(_))));
    }

    #[test]
    fn dual_mixing_maps_exponential_to_inverse_chi_square() {
        let f = SignedMixingMeasure::density(|v| 0.5 * (-v / 2.0).exp(), None);
        let fh = dual_mixing(&f, 0.5).unwrap();
        assert!(fh.is_normalized());
        for v in [0.1f64, 0.5, 1.0, 4.0] {
            let expect = (2.0 * PI).powf(-0.5) * v.powf(-1.5) * (-0.5 / v).exp();
            assert!((fh.density_at(v).unwrap() - expect).abs() < 1e-14);
        }
        let back = dual_mixing(&fh, 1.0 / PI).unwrap();
        for v in [0.1, 0.3, 1.0, 3.0, 10.0] {
            let a = back.density_at(v).unwrap();
            let b = f.density_at(v).unwrap();
            assert!(((a - b) / b).abs() < 1e-8, "v = {v}");
        }
    }

    #[test]
    fn dual_mixing_of_normal_atom() {
        let f = SignedMixingMeasure::point_mass(1.0).unwrap();
        let fh = dual_mixing(&f, (2.0 * PI).powf(-0.5)).unwrap();
        match fh.form() {
            MixingForm::Atoms(a) => {
                assert_eq!(a.len(), 1);
                assert!((a[0].0 - 1.0).abs() < 1e-15 && (a[0].1 - 1.0).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
        assert!(dual_mixing(&f, 0.0).is_err());
    }

    #[test]
    fn laplace_transform_examples() {
        let d = SignedMixingMeasure::point_mass(1.0).unwrap();
        assert!((laplace_transform(&d, 2.0).unwrap() - (-2.0f64).exp()).abs() < 1e-15);
        let s = SignedMixingMeasure::density(|s| s.sin(), Some(Oscillation::direct(PI, PI)));
        assert!((laplace_transform(&s, 1.0).unwrap() - 0.5).abs() < 1e-10);
        let l = SignedMixingMeasure::density(levy_half_density, None);
        assert!((laplace_transform(&l, 4.0).unwrap() - (-2.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn cm_examples() {
        assert!(completely_monotone_test(|x| (-x).exp(), (0.1, 10.0), 8).unwrap().pass);
        assert!(completely_monotone_test(|x| (-x.sqrt()).exp(), (0.1, 10.0), 8).unwrap().pass);
        let r = completely_monotone_test(|x| (-x * x).exp(), (0.1, 10.0), 8).unwrap();
        assert!(!r.pass);
        let (x, j) = r.violation.unwrap();
        assert_eq!(j, 2);
        assert!(x < 0.2);
        assert!(completely_monotone_test(|x| x, (0.1, 1.0), 11).is_err());
    }

    #[test]
    fn levy_identity_examples() {
        for t in [0.25, 1.0, 4.0] {
            let r = levy_half_identity_check(t).unwrap();
            assert!(r.abs_err < 1e-8, "t = {t}: {r:?}");
        }
        assert!((levy_half_identity_check(1.0).unwrap().rhs - 0.219_696).abs() < 1e-6);
        assert!((levy_half_identity_check(0.25).unwrap().rhs - 0.830_215).abs() < 1e-6);
    }

    #[test]
    fn cauchy_identity_variants() {
        let r = cauchy_identity_check(1.0, 1e-8).unwrap();
        assert!(r.plain_matches && !r.sqrt_weighted_matches);
        // closed form of the weighted variant: √π sin(atan(1/x)/2) / (1+x²)^{1/4}
        let expect = PI.sqrt() * (0.5 * (1.0f64).atan()).sin() / 2f64.powf(0.25);
        assert!((r.sqrt_weighted - expect).abs() < 1e-8);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn positive_exponential_mixtures_are_cm(
            rates in prop::collection::vec(0.05f64..5.0, 5),
            weights in prop::collection::vec(0.01f64..1.0, 5),
        ) {
            let f = move |x: f64| rates.iter().zip(&weights).map(|(r, w)| w * (-r * x).exp()).sum::<f64>();
            prop_assert!(completely_monotone_test(f, (0.1, 10.0), 8).unwrap().pass);
        }

        #[test]
        fn dual_preserves_symmetry(s in 0.5f64..2.0) {
            let p = GridDensity::from_fn(UniformGrid::symmetric(12.0 * s, 2049).unwrap(), |x| normal(x / s) / s).unwrap();
            let ph = dual_density(&p).unwrap();
            prop_assert!(ph.asymmetry() < 1e-12);
        }
    }
}
