//! Identity checks grouped into suites, reported as one record per check.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::grid::{GridDensity, UniformGrid};
use crate::measure::SignedMixingMeasure;
use crate::mixtures::{
    cauchy_family, exp_power_mixing, gneiting_product, laplace_family, laplace_mixing, linnik_density,
    linnik_density_grid, multivariate_quartic_check, normal_family, normal_mixture_family, quartic_density,
    quartic_family, quartic_mixing, smn_charfn, smn_density, Spread,
};
use crate::quad::{half_line, QuadOptions};
use crate::quasibayes::{bump_coeffs, feynman_table, signed_posterior, total_probability, Likelihood, SignedMixturePrior, SineSeriesSolution};
use crate::series::{
    binom_half_coeffs, binomial_pgf, halfcoin_coeffs, pg_convention_resolution, series_mul, series_reciprocal,
    series_sqrt, PowerSeries,
};
use crate::tol::Settings;
use crate::transforms::{
    completely_monotone_test, dual_density, dual_mixing, laplace_transform, levy_half_density, levy_half_identity_check,
};
use crate::wigner::{hudson_check, uncertainty_product, wigner_of_state, State, Wavefunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Series,
    Transforms,
    Mixtures,
    Quasibayes,
    Wigner,
    All,
}

impl Suite {
    pub const EACH: [Suite; 5] = [Suite::Series, Suite::Transforms, Suite::Mixtures, Suite::Quasibayes, Suite::Wigner];
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "series" => Suite::Series,
            "transforms" => Suite::Transforms,
            "mixtures" => Suite::Mixtures,
            "quasibayes" => Suite::Quasibayes,
            "wigner" => Suite::Wigner,
            "all" => Suite::All,
            _ => return Err(invalid(format!("unknown suite `{s}`"))),
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Suite::Series => "series",
            Suite::Transforms => "transforms",
            Suite::Mixtures => "mixtures",
            Suite::Quasibayes => "quasibayes",
            Suite::Wigner => "wigner",
            Suite::All => "all",
        };
        f.write_str(s)
    }
}

/// A reported value: a number, a vector, or a marker such as `+inf`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum CheckValue {
    Number(f64),
    Vector(Vec<f64>),
    Marker(String),
}

/// One line of a verification report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub check: String,
    pub lhs: CheckValue,
    pub rhs: CheckValue,
    pub abs_err: f64,
    pub tol: f64,
    pub pass: bool,
}

impl CheckRecord {
    fn build(check: &str, lhs: CheckValue, rhs: CheckValue, abs_err: f64, tol: f64) -> Self {
        CheckRecord {
            check: check.to_string(),
            lhs,
            rhs,
            abs_err,
            tol,
            pass: abs_err <= tol,
        }
    }

    /// `|lhs - rhs| ≤ tol`.
    pub fn equal(check: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        let err = (lhs - rhs).abs();
        Self::build(check, CheckValue::Number(lhs), CheckValue::Number(rhs), if err.is_nan() { f64::INFINITY } else { err }, tol)
    }

    /// Componentwise, with `abs_err` the largest difference.
    pub fn equal_vec(check: &str, lhs: Vec<f64>, rhs: Vec<f64>, tol: f64) -> Self {
        let err = if lhs.len() == rhs.len() {
            lhs.iter().zip(&rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        } else {
            f64::INFINITY
        };
        Self::build(check, CheckValue::Vector(lhs), CheckValue::Vector(rhs), err, tol)
    }

    /// `lhs ≥ bound - tol`; `abs_err` is the shortfall.
    pub fn at_least(check: &str, lhs: f64, bound: f64, tol: f64) -> Self {
        let err = if lhs.is_nan() { f64::INFINITY } else { (bound - lhs).max(0.0) };
        Self::build(check, CheckValue::Number(lhs), CheckValue::Number(bound), err, tol)
    }

    /// Matching markers.
    pub fn marker(check: &str, lhs: &str, rhs: &str) -> Self {
        let err = if lhs == rhs { 0.0 } else { f64::INFINITY };
        Self::build(check, CheckValue::Marker(lhs.into()), CheckValue::Marker(rhs.into()), err, 0.0)
    }

    fn failed(check: &str, e: &Error, tol: f64) -> Self {
        Self::build(check, CheckValue::Marker(format!("error: {e}")), CheckValue::Marker(String::new()), f64::INFINITY, tol)
    }

    fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self.pass = self.abs_err <= tol;
        self
    }
}

/// Collects records, turning errors inside a check into failing records.
struct Report {
    records: Vec<CheckRecord>,
}

impl Report {
    fn new() -> Self {
        Report { records: Vec::new() }
    }

    fn push(&mut self, check: &str, tol: f64, f: impl FnOnce() -> Result<CheckRecord>) {
        let r = f().unwrap_or_else(|e| CheckRecord::failed(check, &e, tol));
        self.records.push(r);
    }
}

/// Runs a suite; `tol_override` replaces every pinned tolerance.
pub fn run_suite(suite: Suite, settings: &Settings, tol_override: Option<f64>) -> Vec<CheckRecord> {
    let suites: Vec<Suite> = if suite == Suite::All { Suite::EACH.to_vec() } else { vec![suite] };
    let mut out = Vec::new();
    for s in suites {
        let mut r = Report::new();
        match s {
            Suite::Series => series_suite(&mut r, settings),
            Suite::Transforms => transforms_suite(&mut r, settings),
            Suite::Mixtures => mixtures_suite(&mut r, settings),
            Suite::Quasibayes => quasibayes_suite(&mut r, settings),
            Suite::Wigner => wigner_suite(&mut r),
            Suite::All => unreachable!("expanded above"),
        }
        out.extend(r.records);
    }
    match tol_override {
        Some(t) => out.into_iter().map(|c| c.with_tol(t)).collect(),
        None => out,
    }
}

/// Largest `|a - b|` over a list of pairs.
fn sup(pairs: impl IntoIterator<Item = (f64, f64)>) -> f64 {
    pairs.into_iter().map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn grid_sup(d: &GridDensity, f: impl Fn(f64) -> f64, range: f64) -> f64 {
    sup(d.grid().points().into_iter().zip(d.values()).filter(|(x, _)| x.abs() <= range).map(|(x, &v)| (v, f(x))))
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn series_suite(r: &mut Report, s: &Settings) {
    let order = s.series_order;
    r.push("halfcoin_square_c0", 1e-12, || {
        let h = halfcoin_coeffs(order);
        Ok(CheckRecord::equal("halfcoin_square_c0", series_mul(&h, &h).coeff(0), 0.5, 1e-12))
    });
    r.push("halfcoin_square_c1", 1e-12, || {
        let h = halfcoin_coeffs(order);
        Ok(CheckRecord::equal("halfcoin_square_c1", series_mul(&h, &h).coeff(1), 0.5, 1e-12))
    });
    r.push("halfcoin_square_tail", 1e-10, || {
        let h = halfcoin_coeffs(order);
        let sq = series_mul(&h, &h);
        let worst = sq.coeffs()[2..].iter().fold(0.0f64, |a, c| a.max(c.abs()));
        Ok(CheckRecord::equal("halfcoin_square_tail", worst, 0.0, 1e-10))
    });
    r.push("halfcoin_catalan_vs_newton", 1e-9, || {
        let fair = PowerSeries::new(vec![0.5, 0.5], order)?;
        let newton = series_sqrt(&fair)?;
        let catalan = halfcoin_coeffs(order);
        let err = sup(catalan.coeffs().iter().copied().zip(newton.coeffs().iter().copied()));
        Ok(CheckRecord::equal("halfcoin_catalan_vs_newton", err, 0.0, 1e-9))
    });
    r.push("halfcoin_binomial_coefficients", 1e-15, || {
        let b = binom_half_coeffs(4);
        Ok(CheckRecord::equal_vec("halfcoin_binomial_coefficients", b, vec![1.0, 0.5, -0.125, 0.0625, -0.0390625], 1e-15))
    });
    r.push("bartlett_reciprocal_residual", 1e-10, || {
        let b = binomial_pgf(1, 0.3, order)?;
        let inv = series_reciprocal(&b)?;
        let prod = series_mul(&b, &inv.series);
        let err = prod.coeffs().iter().enumerate().map(|(k, c)| (c - if k == 0 { 1.0 } else { 0.0 }).abs()).fold(0.0, f64::max);
        Ok(CheckRecord::equal("bartlett_reciprocal_residual", err, 0.0, 1e-10))
    });
    r.push("bartlett_reciprocal_divergence_flag", 0.0, || {
        let b = binomial_pgf(1, 0.7, order)?;
        let flagged = series_reciprocal(&b)?.divergent;
        Ok(CheckRecord::equal("bartlett_reciprocal_divergence_flag", if flagged { 1.0 } else { 0.0 }, 1.0, 0.0))
    });
    let ts = linspace(0.1, 5.0, 50);
    r.push("bn_laplace_delta_one_closed_form", 1e-8, || {
        let err = sup(ts.iter().map(|&t| {
            (crate::series::bn_laplace_transform(1.0, t).unwrap_or(f64::NAN), crate::series::bn_laplace_delta_one(t))
        }));
        Ok(CheckRecord::equal("bn_laplace_delta_one_closed_form", err, 0.0, 1e-8))
    });
    match pg_convention_resolution(1.0, &ts, 1e-6) {
        Ok(res) => {
            r.records.push(CheckRecord::equal("pg_full_argument_convention_vs_bn_mixing", res.full_argument_max_err, 0.0, 1e-6));
            r.records.push(CheckRecord::equal(
                "pg_half_argument_convention_vs_bn_mixing",
                res.half_argument_max_err,
                0.0,
                1e-6,
            ));
            let resolved = match res.resolved() {
                Some(c) => format!("{c:?}"),
                None => format!("{} conventions match", res.matching.len()),
            };
            r.records.push(CheckRecord::build(
                "pg_convention_resolution",
                CheckValue::Marker(resolved),
                CheckValue::Marker("exactly one convention matches".into()),
                if res.resolved().is_some() { 0.0 } else { f64::INFINITY },
                0.0,
            ));
        }
        Err(e) => r.records.push(CheckRecord::failed("pg_convention_resolution", &e, 1e-6)),
    }
}

/// Laplace density on `[-40, 40]` with step `1/1024`.
pub fn laplace_grid() -> Result<GridDensity> {
    GridDensity::from_fn(UniformGrid::new(-40.0, 1.0 / 1024.0, 81_921)?, |x| 0.5 * (-x.abs()).exp())
}

fn cauchy(x: f64) -> f64 {
    1.0 / (PI * (1.0 + x * x))
}

fn transforms_suite(r: &mut Report, s: &Settings) {
    r.push("dual_laplace_is_cauchy", 1e-6, || {
        let ph = dual_density(&laplace_grid()?)?;
        Ok(CheckRecord::equal("dual_laplace_is_cauchy", grid_sup(&ph, cauchy, 8.0), 0.0, 1e-6))
    });
    r.push("dual_laplace_mass", s.mass_tol, || {
        let ph = dual_density(&laplace_grid()?)?;
        Ok(CheckRecord::equal("dual_laplace_mass", ph.mass(), 1.0, s.mass_tol))
    });
    r.push("double_dual_is_laplace", 1e-6, || {
        let back = dual_density(&dual_density(&laplace_grid()?)?)?;
        Ok(CheckRecord::equal("double_dual_is_laplace", grid_sup(&back, |x| 0.5 * (-x.abs()).exp(), 8.0), 0.0, 1e-6))
    });
    let cm: [(&str, fn(f64) -> f64); 3] = [
        ("cm_exp", |x| (-x).exp()),
        ("cm_exp_sqrt", |x| (-x.sqrt()).exp()),
        ("cm_rational", |x| 1.0 / (1.0 + x)),
    ];
    for (name, f) in cm {
        r.push(name, 0.0, || {
            let rep = completely_monotone_test(f, (0.1, 10.0), 8)?;
            Ok(CheckRecord::equal(name, if rep.pass { 1.0 } else { 0.0 }, 1.0, 0.0))
        });
    }
    r.push("cm_gaussian_fails_at_order_2", 0.0, || {
        let rep = completely_monotone_test(|x| (-x * x).exp(), (0.1, 10.0), 8)?;
        let j = rep.violation.map(|v| v.1 as f64).unwrap_or(f64::NAN);
        Ok(CheckRecord::equal("cm_gaussian_fails_at_order_2", j, 2.0, 0.0))
    });
    for t in [0.25, 1.0, 4.0] {
        let name = format!("levy_identity_t{t}");
        r.push(&name, 1e-8, || {
            let rep = levy_half_identity_check(t)?;
            Ok(CheckRecord::equal(&name, rep.lhs, rep.rhs, 1e-8))
        });
    }
    for x in [1.0, 4.0, 9.0] {
        let name = format!("levy_laplace_transform_x{x}");
        r.push(&name, 1e-8, || {
            let f = SignedMixingMeasure::density(levy_half_density, None);
            Ok(CheckRecord::equal(&name, laplace_transform(&f, x)?, (-x.sqrt()).exp(), 1e-8))
        });
    }
    r.push("cauchy_laplace_identity", 1e-8, || {
        let rep = crate::transforms::cauchy_identity_check(2.0, 1e-8)?;
        Ok(CheckRecord::equal("cauchy_laplace_identity", rep.plain, rep.target, 1e-8))
    });
}

fn mixtures_suite(r: &mut Report, s: &Settings) {
    r.push("smn_laplace_x1", 1e-10, || {
        Ok(CheckRecord::equal("smn_laplace_x1", smn_density(&laplace_mixing(), 1.0)?, 0.5 * (-1.0f64).exp(), 1e-10))
    });
    r.push("smn_cauchy_x2", 1e-10, || {
        Ok(CheckRecord::equal("smn_cauchy_x2", smn_density(&cauchy_family().mixing, 2.0)?, cauchy(2.0), 1e-10))
    });
    let xs = linspace(-5.0, 5.0, 41);
    r.push("dual_mixing_laplace_is_cauchy", 1e-6, || {
        let fh = dual_mixing(&laplace_mixing(), 0.5)?;
        let err = sup(xs.iter().map(|&x| (smn_density(&fh, x).unwrap_or(f64::NAN), cauchy(x))));
        Ok(CheckRecord::equal("dual_mixing_laplace_is_cauchy", err, 0.0, 1e-6))
    });
    r.push("dual_mixing_involution", 1e-8, || {
        let f = laplace_mixing();
        let back = dual_mixing(&dual_mixing(&f, 0.5)?, 1.0 / PI)?;
        let err = linspace(0.1, 10.0, 100)
            .into_iter()
            .map(|v| {
                let a = f.density_at(v).unwrap_or(f64::NAN);
                let b = back.density_at(v).unwrap_or(f64::NAN);
                ((a - b) / a).abs()
            })
            .fold(0.0, f64::max);
        Ok(CheckRecord::equal("dual_mixing_involution", err, 0.0, 1e-8))
    });
    r.push("quartic_reconstruction", 1e-6, || {
        let f = quartic_mixing();
        let err = sup(xs.iter().map(|&x| (smn_density(&f, x).unwrap_or(f64::NAN), quartic_density(x))));
        Ok(CheckRecord::equal("quartic_reconstruction", err, 0.0, 1e-6))
    });
    r.push("quartic_half_line_integral", 1e-6, || {
        let q = half_line(|x| 1.0 / (4.0 + x.powi(4)), &QuadOptions::default())?;
        Ok(CheckRecord::equal("quartic_half_line_integral", q.value, PI / 8.0, 1e-6))
    });
    r.push("quartic_mixing_is_signed", 0.0, || {
        let f = quartic_mixing();
        Ok(CheckRecord::equal("quartic_mixing_is_signed", if f.is_ordinary(0.0) { 0.0 } else { 1.0 }, 1.0, 0.0))
    });
    r.push("quartic_density_nonnegative", 1e-10, || {
        let f = quartic_mixing();
        let min = linspace(-8.0, 8.0, 161).into_iter().map(|x| smn_density(&f, x).unwrap_or(f64::NAN)).fold(f64::INFINITY, f64::min);
        Ok(CheckRecord::at_least("quartic_density_nonnegative", min, 0.0, 1e-10))
    });
    r.push("quartic_charfn_at_one", 1e-8, || {
        Ok(CheckRecord::equal("quartic_charfn_at_one", smn_charfn(&quartic_mixing(), 1.0)?, crate::mixtures::quartic_charfn(1.0), 1e-8))
    });
    r.push("exp_power_alpha1_is_cauchy_charfn", 1e-6, || {
        let f = exp_power_mixing(1.0)?;
        let err = sup([0.1, 0.5, 1.0, 2.0, 4.0].iter().map(|&t| (smn_charfn(&f, t).unwrap_or(f64::NAN), (-t).exp())));
        Ok(CheckRecord::equal("exp_power_alpha1_is_cauchy_charfn", err, 0.0, 1e-6))
    });
    r.push("linnik_alpha2_is_laplace", 1e-6, || {
        let err = sup(linspace(-5.0, 5.0, 21).into_iter().map(|x| (linnik_density(2.0, x).map(|v| v.value).unwrap_or(f64::NAN), 0.5 * (-x.abs()).exp())));
        Ok(CheckRecord::equal("linnik_alpha2_is_laplace", err, 0.0, 1e-6))
    });
    for alpha in [0.5, 1.0, 1.5, 2.0] {
        let name = format!("linnik_alpha{alpha}_unit_mass");
        r.push(&name, 1e-6, || {
            let d = linnik_grid(alpha)?;
            Ok(CheckRecord::equal(&name, d.mass(), 1.0, 1e-6))
        });
        let name = format!("linnik_alpha{alpha}_symmetric");
        r.push(&name, 1e-6, || Ok(CheckRecord::equal(&name, linnik_grid(alpha)?.asymmetry(), 0.0, 1e-6)));
    }
    r.push("multivariate_quartic_n2", 1e-8, || {
        let eye = nalgebra::DMatrix::identity(2, 2);
        let rep = multivariate_quartic_check(2, &eye, &[1.0, 1.0])?;
        Ok(CheckRecord::equal("multivariate_quartic_n2", rep.lhs, rep.kappa * rep.rhs, 1e-8))
    });
    r.push("gneiting_normal", 1e-6, || {
        let g = gneiting_product(&normal_family())?.value().unwrap_or(f64::NAN);
        Ok(CheckRecord::equal("gneiting_normal", g, 1.0, 1e-6))
    });
    r.push("gneiting_normal_mixture", 1e-6, || {
        let g = gneiting_product(&normal_mixture_family())?.value().unwrap_or(f64::NAN);
        Ok(CheckRecord::at_least("gneiting_normal_mixture", g, 1.0, 1e-6))
    });
    for (name, fam) in [("gneiting_laplace", laplace_family()), ("gneiting_cauchy", cauchy_family())] {
        r.push(name, 0.0, || Ok(CheckRecord::marker(name, &spread_marker(gneiting_product(&fam)?), "+inf")));
    }
    r.push("gneiting_quartic", 0.0, || {
        Ok(CheckRecord::marker("gneiting_quartic", &spread_marker(gneiting_product(&quartic_family())?), "not-applicable"))
    });
    let _ = s;
}

/// Grid sizes that keep the edge values of the Linnik density small.
fn linnik_grid(alpha: f64) -> Result<GridDensity> {
    if alpha < 1.0 {
        linnik_density_grid(alpha, 2000.0, 65_537)
    } else {
        linnik_density_grid(alpha, 200.0, 16_385)
    }
}

pub fn spread_marker(s: Spread) -> String {
    match s {
        Spread::Finite(v) => crate::grid::fmt_num(v),
        Spread::Infinite => "+inf".into(),
        Spread::NotApplicable => "not-applicable".into(),
    }
}

fn quasibayes_suite(r: &mut Report, s: &Settings) {
    r.push("feynman_marginals", 1e-12, || {
        let m = total_probability(&feynman_table())?;
        Ok(CheckRecord::equal_vec("feynman_marginals", m.weights(), vec![0.09, 0.78, 0.13], 1e-12))
    });
    r.push("feynman_mass", 1e-12, || {
        Ok(CheckRecord::equal("feynman_mass", total_probability(&feynman_table())?.mass(), 1.0, 1e-12))
    });
    let prior = || SignedMixturePrior::exponentials(&[(1.0, 2.0), (2.0, -1.0)]);
    r.push("signed_bayes_marginal", 1e-12, || {
        let p = signed_posterior(&prior()?, &Likelihood::Exponential, 1.0)?;
        Ok(CheckRecord::equal("signed_bayes_marginal", p.marginal, 5.0 / 18.0, 1e-12))
    });
    r.push("signed_bayes_weights", 1e-12, || {
        let p = signed_posterior(&prior()?, &Likelihood::Exponential, 1.0)?;
        Ok(CheckRecord::equal_vec("signed_bayes_weights", p.posterior.weights(), vec![1.8, -0.8], 1e-12))
    });
    r.push("signed_bayes_posterior_nonnegative", 1e-10, || {
        let p = signed_posterior(&prior()?, &Likelihood::Exponential, 1.0)?;
        Ok(CheckRecord::at_least("signed_bayes_posterior_nonnegative", p.posterior.probe_min(), 0.0, 1e-10))
    });
    r.push("signed_bayes_direct_oracle", 1e-10, || {
        let pr = prior()?;
        let p = signed_posterior(&pr, &Likelihood::Exponential, 1.0)?;
        let err = sup(p.posterior.probe_grid().into_iter().map(|z| {
            (p.posterior.density(z), Likelihood::Exponential.eval(1.0, z) * pr.density(z) / p.marginal)
        }));
        Ok(CheckRecord::equal("signed_bayes_direct_oracle", err, 0.0, 1e-10))
    });
    r.push("diffusion_single_mode", 1e-12, || {
        let sol = SineSeriesSolution::new(vec![1.0]);
        let err = sup(linspace(0.0, PI, 65).into_iter().map(|x| {
            (crate::quasibayes::evolve_and_eval(&sol, x, 1.0).unwrap_or(f64::NAN), (-1.0f64).exp() * x.sin())
        }));
        Ok(CheckRecord::equal("diffusion_single_mode", err, 0.0, 1e-12))
    });
    let bump = bump_coeffs(s.series_order.max(400));
    for t in [0.01, 0.1, 1.0] {
        let name = format!("diffusion_bump_nonnegative_t{t}");
        r.push(&name, 1e-6, || {
            let min = bump.at_time(t)?.sample(2049).iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
            Ok(CheckRecord::at_least(&name, min, 0.0, 1e-6))
        });
    }
    r.push("diffusion_mass_nonincreasing", 1e-6, || {
        let masses: Vec<f64> = [0.0, 0.01, 0.1, 1.0].iter().map(|&t| bump.at_time(t).map(|s| s.mass())).collect::<Result<_>>()?;
        let worst = masses.windows(2).map(|w| (w[1] - w[0]).max(0.0)).fold(0.0, f64::max);
        Ok(CheckRecord::equal("diffusion_mass_nonincreasing", worst, 0.0, 1e-6))
    });
}

fn wigner_suite(r: &mut Report) {
    for (label, state) in [("gaussian", State::Gaussian), ("hermite1", State::Hermite1), ("squeezed2", State::Squeezed(2.0))] {
        let w = match wigner_of_state(state) {
            Ok(w) => w,
            Err(e) => {
                r.records.push(CheckRecord::failed(&format!("wigner_{label}"), &e, 0.0));
                continue;
            }
        };
        r.records.push(CheckRecord::equal(&format!("wigner_{label}_mass"), w.total(), 1.0, 1e-6));
        r.records.push(CheckRecord::equal(&format!("wigner_{label}_imag_residue"), w.imag_residue(), 0.0, 1e-10));
        r.push(&format!("wigner_{label}_marginals"), 1e-6, || {
            let psi = Wavefunction::from_fn(*w.x_grid(), |x| state.eval(x))?;
            let ex = sup(w.x_marginal().into_iter().zip(psi.values().iter().map(|v| v.norm_sqr())));
            let ep = sup(w.p_marginal().into_iter().zip(psi.momentum_density(w.p_grid())));
            Ok(CheckRecord::equal(&format!("wigner_{label}_marginals"), ex.max(ep), 0.0, 1e-6))
        });
        let h = hudson_check(&w);
        match state {
            State::Hermite1 => {
                r.records.push(CheckRecord::equal("wigner_hermite1_origin", w.value_at(0.0, 0.0).unwrap_or(f64::NAN), -1.0 / PI, 1e-4));
                r.records.push(CheckRecord::equal("wigner_hermite1_negative", if h.nonnegative { 0.0 } else { 1.0 }, 1.0, 0.0));
                r.push("wigner_hermite1_uncertainty", 1e-3, || {
                    Ok(CheckRecord::equal("wigner_hermite1_uncertainty", uncertainty_product(&w)?, 1.5, 1e-3))
                });
            }
            State::Gaussian => {
                r.records.push(CheckRecord::at_least("wigner_gaussian_min", h.min, 0.0, 1e-10));
                r.push("wigner_gaussian_uncertainty", 1e-6, || {
                    Ok(CheckRecord::equal("wigner_gaussian_uncertainty", uncertainty_product(&w)?, 0.5, 1e-6))
                });
            }
            State::Squeezed(_) => {
                r.records.push(CheckRecord::at_least("wigner_squeezed2_min", h.min, 0.0, 1e-10));
                r.push("wigner_squeezed2_uncertainty", 1e-6, || {
                    Ok(CheckRecord::at_least("wigner_squeezed2_uncertainty", uncertainty_product(&w)?, 0.5, 1e-6))
                });
            }
        }
    }
}
