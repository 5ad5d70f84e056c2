//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always print. Exits non-zero if
//! a criterion's outcome differs from the expected one.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;

use quasiprob::grid::{GridDensity, UniformGrid};
use quasiprob::measure::SignedMixingMeasure;
use quasiprob::mixtures::{
    catalog, cauchy_family, gneiting_product, laplace_family, laplace_mixing, linnik_density, linnik_density_grid,
    normal_family, quartic_density, quartic_mixing, smn_density, Spread,
};
use quasiprob::quad::{half_line, QuadOptions};
use quasiprob::quasibayes::{bump, bump_coeffs, feynman_table, signed_posterior, total_probability, Likelihood, SignedMixturePrior, SineSeriesSolution};
use quasiprob::series::{
    binomial_pgf, halfcoin_coeffs, pg_convention_resolution, series_mul, series_reciprocal, series_sqrt, PowerSeries,
};
use quasiprob::transforms::{
    completely_monotone_test, dual_density, dual_mixing, laplace_transform, levy_half_density, levy_half_identity_check,
};
use quasiprob::wigner::{hudson_check, uncertainty_product, wigner_of_state, State, Wavefunction};
use quasiprob::Result;

/// Outcome of one criterion: sub-checks with their measured errors.
struct Outcome {
    checks: Vec<(String, f64, f64)>,
}

impl Outcome {
    fn new() -> Self {
        Outcome { checks: Vec::new() }
    }

    /// Records `err ≤ tol`.
    fn check(&mut self, name: &str, err: f64, tol: f64) {
        let err = if err.is_nan() { f64::INFINITY } else { err };
        self.checks.push((name.to_string(), err, tol));
    }

    fn flag(&mut self, name: &str, ok: bool) {
        self.check(name, if ok { 0.0 } else { 1.0 }, 0.0);
    }

    fn pass(&self) -> bool {
        self.checks.iter().all(|(_, e, t)| e <= t)
    }

    fn summary(&self) -> String {
        self.checks
            .iter()
            .map(|(n, e, t)| format!("{n}={e:.2e}{}{t:.0e}", if e <= t { "<=" } else { ">" }))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn sup(pairs: impl IntoIterator<Item = (f64, f64)>) -> f64 {
    pairs.into_iter().map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn cauchy(x: f64) -> f64 {
    1.0 / (PI * (1.0 + x * x))
}

fn laplace(x: f64) -> f64 {
    0.5 * (-x.abs()).exp()
}

fn grid_sup(d: &GridDensity, f: impl Fn(f64) -> f64, range: f64) -> f64 {
    sup(d.grid().points().into_iter().zip(d.values()).filter(|(x, _)| x.abs() <= range).map(|(x, &v)| (v, f(x))))
}

fn c1_feynman() -> Result<Outcome> {
    let mut o = Outcome::new();
    let m = total_probability(&feynman_table())?.weights();
    o.check("marginals", sup(m.into_iter().zip([0.09, 0.78, 0.13])), 1e-12);
    Ok(o)
}

fn c2_halfcoin() -> Result<Outcome> {
    let mut o = Outcome::new();
    let h = halfcoin_coeffs(64);
    let sq = series_mul(&h, &h);
    o.check("c0", (sq.coeff(0) - 0.5).abs(), 1e-12);
    o.check("c1", (sq.coeff(1) - 0.5).abs(), 1e-12);
    o.check("tail", sq.coeffs()[2..].iter().fold(0.0f64, |a, c| a.max(c.abs())), 1e-10);
    let newton = series_sqrt(&PowerSeries::new(vec![0.5, 0.5], 64)?)?;
    let cat = common::scaled_catalan(63);
    let oracle: Vec<f64> = (0..=64)
        .map(|n| {
            if n == 0 {
                std::f64::consts::FRAC_1_SQRT_2
            } else {
                let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
                sign * 2f64.sqrt() * cat[n - 1] / 4.0
            }
        })
        .collect();
    o.check("catalan_vs_newton", sup(oracle.iter().copied().zip(newton.coeffs().iter().copied())), 1e-9);
    o.check("catalan_vs_halfcoin", sup(oracle.into_iter().zip(h.coeffs().iter().copied())), 1e-9);
    Ok(o)
}

fn c3_bartlett() -> Result<Outcome> {
    let mut o = Outcome::new();
    let b = binomial_pgf(1, 0.3, 64)?;
    let inv = series_reciprocal(&b)?;
    let prod = series_mul(&b, &inv.series);
    let resid = prod.coeffs().iter().enumerate().map(|(k, c)| (c - if k == 0 { 1.0 } else { 0.0 }).abs()).fold(0.0, f64::max);
    o.check("delta0", resid, 1e-10);
    o.flag("stable_no_warning", !inv.divergent);
    o.flag("p0.7_warns", series_reciprocal(&binomial_pgf(1, 0.7, 64)?)?.divergent);
    Ok(o)
}

fn c4_dual() -> Result<Outcome> {
    let mut o = Outcome::new();
    let lap = GridDensity::from_fn(UniformGrid::new(-40.0, 1.0 / 1024.0, 81_921)?, laplace)?;
    let ph = dual_density(&lap)?;
    o.check("dual_vs_cauchy", grid_sup(&ph, cauchy, 8.0), 1e-6);
    let back = dual_density(&ph)?;
    o.check("double_dual_vs_laplace", grid_sup(&back, laplace, 8.0), 1e-6);
    Ok(o)
}

fn c5_dual_mixing() -> Result<Outcome> {
    let mut o = Outcome::new();
    let f = laplace_mixing();
    let fh = dual_mixing(&f, 0.5)?;
    let err = linspace(-5.0, 5.0, 201).into_iter().map(|x| (smn_density(&fh, x).unwrap_or(f64::NAN) - cauchy(x)).abs()).fold(0.0, f64::max);
    o.check("smn_vs_cauchy", err, 1e-6);
    let back = dual_mixing(&fh, 1.0 / PI)?;
    let rel = linspace(0.1, 10.0, 199)
        .into_iter()
        .map(|v| {
            let a = f.density_at(v).unwrap_or(f64::NAN);
            ((back.density_at(v).unwrap_or(f64::NAN) - a) / a).abs()
        })
        .fold(0.0, f64::max);
    o.check("involution_rel", rel, 1e-8);
    Ok(o)
}

fn c6_quartic() -> Result<Outcome> {
    let mut o = Outcome::new();
    let f = quartic_mixing();
    let oracle = |x: f64| (4.0 / PI) / (4.0 + x.powi(4));
    let xs = linspace(-5.0, 5.0, 201);
    let vals: Vec<f64> = xs.iter().map(|&x| smn_density(&f, x).unwrap_or(f64::NAN)).collect();
    o.check("reconstruction", sup(vals.iter().copied().zip(xs.iter().map(|&x| oracle(x)))), 1e-6);
    o.check("closed_form", sup(xs.iter().map(|&x| (quartic_density(x), oracle(x)))), 1e-15);
    let hl = half_line(|x| 1.0 / (4.0 + x.powi(4)), &QuadOptions::default())?.value;
    o.check("half_line", (hl - PI / 8.0).abs(), 1e-6);
    o.check("half_line_simpson", (common::simpson(|x| 1.0 / (4.0 + x.powi(4)), 0.0, 400.0, 400_000) - PI / 8.0).abs(), 1e-6);
    let signed = linspace(0.05, 5.0, 400).into_iter().any(|v| f.density_at(v).unwrap_or(0.0) < 0.0);
    o.flag("mixing_signed", signed);
    let min = vals.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    o.check("density_nonneg", (-min).max(0.0), 1e-10);
    Ok(o)
}

fn c7_cm() -> Result<Outcome> {
    let mut o = Outcome::new();
    let fs: [(&str, fn(f64) -> f64); 3] = [
        ("exp", |x| (-x).exp()),
        ("exp_sqrt", |x| (-x.sqrt()).exp()),
        ("rational", |x| 1.0 / (1.0 + x)),
    ];
    for (name, f) in fs {
        o.flag(name, completely_monotone_test(f, (0.1, 10.0), 8)?.pass);
    }
    let g = completely_monotone_test(|x| (-x * x).exp(), (0.1, 10.0), 8)?;
    o.flag("gaussian_fails_j2", !g.pass && g.violation.map(|v| v.1) == Some(2));
    Ok(o)
}

fn c8_levy() -> Result<Outcome> {
    let mut o = Outcome::new();
    for t in [0.25, 1.0, 4.0] {
        let r = levy_half_identity_check(t)?;
        o.check(&format!("identity_t{t}"), r.abs_err, 1e-8);
    }
    let phi = SignedMixingMeasure::density(levy_half_density, None);
    for x in [1.0, 4.0, 9.0] {
        o.check(&format!("laplace_x{x}"), (laplace_transform(&phi, x)? - (-x.sqrt()).exp()).abs(), 1e-8);
    }
    Ok(o)
}

fn c9_linnik() -> Result<Outcome> {
    let mut o = Outcome::new();
    let err = sup(linspace(-6.0, 6.0, 121).into_iter().map(|x| (linnik_density(2.0, x).map(|v| v.value).unwrap_or(f64::NAN), laplace(x))));
    o.check("alpha2_laplace", err, 1e-6);
    for alpha in [0.5, 1.0, 1.5, 2.0] {
        let d = if alpha < 1.0 { linnik_density_grid(alpha, 2000.0, 65_537)? } else { linnik_density_grid(alpha, 200.0, 16_385)? };
        o.check(&format!("a{alpha}_mass"), (d.mass() - 1.0).abs(), 1e-6);
        o.check(&format!("a{alpha}_sym"), d.asymmetry(), 1e-6);
    }
    Ok(o)
}

fn c10_gneiting() -> Result<Outcome> {
    let mut o = Outcome::new();
    let normal = gneiting_product(&normal_family())?.value().unwrap_or(f64::NAN);
    o.check("normal", (normal - 1.0).abs(), 1e-6);
    for fam in catalog() {
        if let Spread::Finite(v) = gneiting_product(&fam)? {
            o.check(&format!("{}_ge1", fam.name), (1.0 - 1e-6 - v).max(0.0), 0.0);
        }
    }
    o.flag("laplace_inf", gneiting_product(&laplace_family())?.is_infinite());
    o.flag("cauchy_inf", gneiting_product(&cauchy_family())?.is_infinite());
    Ok(o)
}

fn c11_bayes() -> Result<Outcome> {
    let mut o = Outcome::new();
    let prior = SignedMixturePrior::exponentials(&[(1.0, 2.0), (2.0, -1.0)])?;
    let post = signed_posterior(&prior, &Likelihood::Exponential, 1.0)?;
    o.check("marginal", (post.marginal - 5.0 / 18.0).abs(), 1e-12);
    o.check("weights", sup(post.posterior.weights().into_iter().zip([1.8, -0.8])), 1e-12);
    let grid = post.posterior.probe_grid();
    o.check("grid_points", (grid.len() as f64 - 2049.0).abs(), 0.0);
    o.check("posterior_nonneg", (-post.posterior.probe_min()).max(0.0), 1e-10);
    let lik = |z: f64| z * (-z).exp();
    let prior_fn = |z: f64| 2.0 * (-z).exp() - 2.0 * (-2.0 * z).exp();
    let m = common::direct_evidence(lik, prior_fn, 60.0);
    o.check("evidence_oracle", (m - post.marginal).abs(), 1e-10);
    o.check("posterior_oracle", sup(grid.iter().map(|&z| (post.posterior.density(z), lik(z) * prior_fn(z) / m))), 1e-10);
    Ok(o)
}

fn c12_diffusion() -> Result<Outcome> {
    let mut o = Outcome::new();
    let single = SineSeriesSolution::new(vec![1.0]).at_time(0.5)?;
    o.check("single_mode", sup(linspace(0.0, PI, 257).into_iter().map(|x| (single.eval(x), (-0.5f64).exp() * x.sin()))), 1e-12);
    let sol = bump_coeffs(400).at_time(0.1)?;
    let (xs, u) = common::crank_nicolson(bump, &[PI / 4.0, 3.0 * PI / 4.0], 512, 1e-4, 0.1);
    o.check("bump_vs_cn", sup(xs.iter().zip(&u).map(|(&x, &v)| (sol.eval(x), v))), 1e-4);
    let mut min = f64::INFINITY;
    for t in [0.001, 0.01, 0.1, 1.0] {
        min = bump_coeffs(400).at_time(t)?.sample(2049).iter().fold(min, |a, p| a.min(p.1));
    }
    o.check("nonneg", (-min).max(0.0), 1e-6);
    Ok(o)
}

fn c13_wigner() -> Result<Outcome> {
    let mut o = Outcome::new();
    for (label, state, oracle) in [
        ("gaussian", State::Gaussian, common::wigner_gaussian as fn(f64, f64) -> f64),
        ("hermite1", State::Hermite1, common::wigner_hermite1),
    ] {
        let w = wigner_of_state(state)?;
        o.check(&format!("{label}_grid"), (w.x_grid().len() as f64 - 1024.0).abs() + (w.p_grid().len() as f64 - 1024.0).abs(), 0.0);
        let xs = w.x_grid().points();
        let ps = w.p_grid().points();
        let mut err: f64 = 0.0;
        for i in (0..xs.len()).step_by(7) {
            for j in (0..ps.len()).step_by(7) {
                err = err.max((w.get(i, j) - oracle(xs[i], ps[j])).abs());
            }
        }
        o.check(&format!("{label}_closed_form"), err, 1e-10);
        let psi = Wavefunction::from_fn(*w.x_grid(), |x| state.eval(x))?;
        let ex = sup(w.x_marginal().into_iter().zip(psi.values().iter().map(|v| v.norm_sqr())));
        let ep = sup(w.p_marginal().into_iter().zip(ps.iter().map(|&p| state.momentum(p).norm_sqr())));
        o.check(&format!("{label}_marginals"), ex.max(ep), 1e-6);
        let u = uncertainty_product(&w)?;
        match state {
            State::Gaussian => {
                o.check("gaussian_min", (-hudson_check(&w).min).max(0.0), 1e-10);
                o.check("gaussian_product", (u - 0.5).abs(), 1e-6);
            }
            _ => {
                o.check("hermite1_origin", (w.value_at(0.0, 0.0).unwrap_or(f64::NAN) + 1.0 / PI).abs(), 1e-4);
                o.check("hermite1_product", (u - 1.5).abs(), 1e-3);
            }
        }
    }
    Ok(o)
}

fn c14_polya_gamma() -> Result<Outcome> {
    let mut o = Outcome::new();
    let ts = linspace(0.1, 5.0, 50);
    let res = pg_convention_resolution(1.0, &ts, 1e-6)?;
    // Simpson on [1e-3, 60]; the mixing density is below 1e-12 under 1e-3
    let panels = 60_000;
    let (a, b) = (1e-3, 60.0);
    let h = (b - a) / panels as f64;
    let dens: Vec<f64> = (0..=panels)
        .map(|i| quasiprob::series::bn_mixing_density(1.0, a + i as f64 * h, 20_000).map(|s| s.value).unwrap_or(f64::NAN))
        .collect();
    let oracle = sup(ts.iter().map(|&t| {
        let bn = common::simpson(|u| dens[((u - a) / h).round() as usize] * (-t * u).exp(), a, b, panels);
        let r = (2.0 * t).sqrt();
        (bn, PI * r / (PI * r).sinh())
    }));
    o.check("bn_transform_oracle", oracle, 1e-6);
    o.check("full_argument_convention", res.full_argument_max_err, 1e-6);
    o.check("half_argument_convention", res.half_argument_max_err, 1e-6);
    o.flag("exactly_one_convention", res.resolved().is_some());
    Ok(o)
}

type Criterion = fn() -> Result<Outcome>;

fn main() -> ExitCode {
    let criteria: [(u32, &str, Criterion, bool); 14] = [
        (1, "feynman marginals", c1_feynman, true),
        (2, "half-coin square and Catalan/Newton agreement", c2_halfcoin, true),
        (3, "Bernoulli reciprocal and divergence warning", c3_bartlett, true),
        (4, "Laplace/Cauchy duality and double dual", c4_dual, true),
        (5, "dual mixing and involution", c5_dual_mixing, true),
        (6, "quartic signed mixing", c6_quartic, true),
        (7, "complete monotonicity to order 8", c7_cm, true),
        (8, "Levy half-stable identities", c8_levy, true),
        (9, "Linnik densities", c9_linnik, true),
        (10, "Gneiting products", c10_gneiting, true),
        (11, "signed Bayes update", c11_bayes, true),
        (12, "diffusion positivity", c12_diffusion, true),
        (13, "Wigner functions", c13_wigner, true),
        // Known failure: the δ = 1 transform is πa/sinh(πa), a = √(2t); neither
        // cosh^{-2} convention matches it.
        (14, "Polya-Gamma convention", c14_polya_gamma, false),
    ];
    let mut unexpected = 0;
    for (id, label, run, expected) in criteria {
        let (pass, detail) = match run() {
            Ok(o) => (o.pass(), o.summary()),
            Err(e) => (false, format!("error: {e}")),
        };
        println!("{} criterion {id:>2} {label}: {detail}", if pass { "PASS" } else { "FAIL" });
        if pass != expected {
            unexpected += 1;
            println!("     criterion {id} outcome differs from the expected {}", if expected { "PASS" } else { "FAIL" });
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
