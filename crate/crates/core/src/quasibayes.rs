//! Signed conditional tables, Bayes updates of signed mixture priors and the
//! sine series for diffusion on a rod with absorbing ends.

use std::f64::consts::PI;
use std::sync::Arc;

use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Error, Result};
use crate::measure::{ConditionalTable, SignedPmf};
use crate::quad::{adaptive, half_line, QuadOptions};
use crate::tol::{MASS_TOL, PROBE_POINTS};

/// `p(state) = Σ_c p(state | c) p(c)`, indexed by state position.
///
/// A negative marginal is not an error but is logged.
pub fn total_probability(tbl: &ConditionalTable) -> Result<SignedPmf> {
    let marginal: Vec<f64> = tbl
        .entries()
        .iter()
        .map(|row| row.iter().zip(tbl.base()).map(|(e, b)| e * b).sum())
        .collect();
    let pmf = SignedPmf::from_weights(&marginal)?;
    if !pmf.is_ordinary() {
        log::warn!("marginal distribution has negative entries: {marginal:?}");
    }
    Ok(pmf)
}

/// The three-state, two-condition table with a negative entry and an entry above 1.
pub fn feynman_table() -> ConditionalTable {
    ConditionalTable::new(
        vec!["1".into(), "2".into(), "3".into()],
        vec!["A".into(), "B".into()],
        vec![vec![0.3, -0.4], vec![0.6, 1.2], vec![0.1, 0.2]],
        vec![0.7, 0.3],
    )
    .expect("table is well formed")
}

fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

pub type Kernel = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A normalized density on `z > 0` used as a mixture component.
#[derive(Clone)]
pub enum Component {
    /// `s e^{-sz}`.
    Exponential { rate: f64 },
    /// `b^a z^{a-1} e^{-bz} / Γ(a)`.
    Gamma { shape: f64, rate: f64 },
    /// Normal `(mean, sd)` restricted to `z > 0` and renormalized.
    TruncatedNormal { mean: f64, sd: f64 },
    /// Any other normalized density, with a rough upper end of its support for probing.
    Custom { density: Kernel, scale: f64 },
}

impl std::fmt::Debug for Component {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Component::Exponential { rate } => write!(f, "Exponential({rate})"),
            Component::Gamma { shape, rate } => write!(f, "Gamma({shape}, {rate})"),
            Component::TruncatedNormal { mean, sd } => write!(f, "TruncatedNormal({mean}, {sd})"),
            Component::Custom { scale, .. } => write!(f, "Custom(scale {scale})"),
        }
    }
}

impl Component {
    pub fn density(&self, z: f64) -> f64 {
        if z < 0.0 {
            return 0.0;
        }
        match self {
            Component::Exponential { rate } => rate * (-rate * z).exp(),
            Component::Gamma { shape, rate } => {
                if z == 0.0 {
                    return match shape.partial_cmp(&1.0) {
                        Some(std::cmp::Ordering::Equal) => *rate,
                        Some(std::cmp::Ordering::Greater) => 0.0,
                        _ => f64::INFINITY,
                    };
                }
                (shape * rate.ln() + (shape - 1.0) * z.ln() - rate * z - ln_gamma(*shape)).exp()
            }
            Component::TruncatedNormal { mean, sd } => {
                let u = (z - mean) / sd;
                (-0.5 * u * u).exp() / ((2.0 * PI).sqrt() * sd * std_normal_cdf(mean / sd))
            }
            Component::Custom { density, .. } => density(z),
        }
    }

    /// A point beyond which the component is negligible.
    fn extent(&self) -> f64 {
        match self {
            Component::Exponential { rate } => 40.0 / rate,
            Component::Gamma { shape, rate } => (shape + 12.0 * shape.sqrt() + 40.0) / rate,
            Component::TruncatedNormal { mean, sd } => mean.max(0.0) + 12.0 * sd,
            Component::Custom { scale, .. } => *scale,
        }
    }
}

/// `p(z) = Σ w_i k_i(z)` with `Σ w_i = 1` and weights of either sign.
#[derive(Debug, Clone)]
pub struct SignedMixturePrior {
    components: Vec<(f64, Component)>,
}

impl SignedMixturePrior {
    /// Components as `(weight, density)`; the weights must sum to 1.
    pub fn new(components: Vec<(f64, Component)>) -> Result<Self> {
        if components.is_empty() {
            return Err(invalid("mixture needs at least one component"));
        }
        let mass: f64 = components.iter().map(|c| c.0).sum();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::Mass {
                expected: 1.0,
                actual: mass,
                tol: MASS_TOL,
            });
        }
        for (_, c) in &components {
            let ok = match c {
                Component::Exponential { rate } => *rate > 0.0,
                Component::Gamma { shape, rate } => *shape > 0.0 && *rate > 0.0,
                Component::TruncatedNormal { sd, .. } => *sd > 0.0,
                Component::Custom { scale, .. } => *scale > 0.0,
            };
            if !ok {
                return Err(invalid(format!("invalid component {c:?}")));
            }
        }
        Ok(SignedMixturePrior { components })
    }

    /// Weights on exponential components `(rate, weight)`.
    pub fn exponentials(components: &[(f64, f64)]) -> Result<Self> {
        Self::new(components.iter().map(|&(s, w)| (w, Component::Exponential { rate: s })).collect())
    }

    pub fn components(&self) -> &[(f64, Component)] {
        &self.components
    }

    pub fn weights(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.0).collect()
    }

    pub fn density(&self, z: f64) -> f64 {
        self.components.iter().map(|(w, c)| w * c.density(z)).sum()
    }

    /// Upper end of the probe grid.
    pub fn extent(&self) -> f64 {
        self.components.iter().map(|c| c.1.extent()).fold(0.0, f64::max)
    }

    /// The [`PROBE_POINTS`] probe locations on `[0, extent]`.
    pub fn probe_grid(&self) -> Vec<f64> {
        let z_max = self.extent();
        (0..PROBE_POINTS)
            .map(|i| z_max * i as f64 / (PROBE_POINTS - 1) as f64)
            .collect()
    }

    /// Smallest mixture density value on the probe grid.
    pub fn probe_min(&self) -> f64 {
        self.probe_grid()
            .into_iter()
            .map(|z| self.density(z))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_ordinary(&self, tol: f64) -> bool {
        self.probe_min() >= -tol
    }
}

/// Observation models `f(y | z)` for `z > 0`.
#[derive(Clone)]
pub enum Likelihood {
    /// `z e^{-zy}`, `y ≥ 0`.
    Exponential,
    /// `z^y e^{-z} / y!`, `y` a nonnegative integer.
    Poisson,
    /// `N(y; z, σ²)`.
    Normal { sigma: f64 },
    /// Any kernel `f(y, z)`, integrated numerically.
    Custom(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for Likelihood {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Likelihood::Exponential => write!(f, "Exponential"),
            Likelihood::Poisson => write!(f, "Poisson"),
            Likelihood::Normal { sigma } => write!(f, "Normal({sigma})"),
            Likelihood::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl Likelihood {
    pub fn eval(&self, y: f64, z: f64) -> f64 {
        if z <= 0.0 {
            return 0.0;
        }
        match self {
            Likelihood::Exponential => z * (-z * y).exp(),
            Likelihood::Poisson => (y * z.ln() - z - ln_gamma(y + 1.0)).exp(),
            Likelihood::Normal { sigma } => {
                let u = (y - z) / sigma;
                (-0.5 * u * u).exp() / ((2.0 * PI).sqrt() * sigma)
            }
            Likelihood::Custom(f) => f(y, z),
        }
    }

    fn validate(&self, y: f64) -> Result<()> {
        match self {
            Likelihood::Exponential if y < 0.0 => Err(invalid(format!("exponential observation must be ≥ 0, got {y}"))),
            Likelihood::Poisson if !(y >= 0.0 && y.fract() == 0.0) => {
                Err(invalid(format!("Poisson observation must be a nonnegative integer, got {y}")))
            }
            Likelihood::Normal { sigma } if !(*sigma > 0.0) => Err(invalid(format!("σ must be positive, got {sigma}"))),
            _ => Ok(()),
        }
    }

    /// Evidence `c = ∫ f(y|z) k(z) dz` and the conditional component `f(y|z) k(z) / c`.
    fn update(&self, y: f64, k: &Component) -> Result<(f64, Component)> {
        match (self, k) {
            (Likelihood::Exponential, Component::Exponential { rate: s }) => {
                Ok((s / (s + y).powi(2), Component::Gamma { shape: 2.0, rate: s + y }))
            }
            (Likelihood::Exponential, Component::Gamma { shape: a, rate: b }) => Ok((
                (a.ln() + a * b.ln() - (a + 1.0) * (b + y).ln()).exp(),
                Component::Gamma {
                    shape: a + 1.0,
                    rate: b + y,
                },
            )),
            (Likelihood::Poisson, Component::Exponential { rate: s }) => Ok((
                s / (1.0 + s).powf(y + 1.0),
                Component::Gamma {
                    shape: y + 1.0,
                    rate: s + 1.0,
                },
            )),
            (Likelihood::Poisson, Component::Gamma { shape: a, rate: b }) => Ok((
                (a * b.ln() + ln_gamma(a + y) - ln_gamma(*a) - ln_gamma(y + 1.0) - (a + y) * (b + 1.0).ln()).exp(),
                Component::Gamma {
                    shape: a + y,
                    rate: b + 1.0,
                },
            )),
            (Likelihood::Normal { sigma }, Component::Exponential { rate: s }) => {
                let mean = y - s * sigma * sigma;
                let c = s * (-s * y + s * s * sigma * sigma / 2.0).exp() * std_normal_cdf(mean / sigma);
                Ok((c, Component::TruncatedNormal { mean, sd: *sigma }))
            }
            _ => self.update_numeric(y, k),
        }
    }

    fn update_numeric(&self, y: f64, k: &Component) -> Result<(f64, Component)> {
        let lik = self.clone();
        let k = k.clone();
        let scale = k.extent();
        let c = half_line(|z| lik.eval(y, z) * k.density(z), &QuadOptions::with_tolerances(1e-15, 1e-12))?.value;
        let density: Kernel = Arc::new(move |z| if c != 0.0 { lik.eval(y, z) * k.density(z) / c } else { 0.0 });
        Ok((c, Component::Custom { density, scale }))
    }
}

/// Posterior mixture and marginal likelihood `m(y)`.
#[derive(Debug, Clone)]
pub struct Posterior {
    pub posterior: SignedMixturePrior,
    pub marginal: f64,
    /// Per-component evidences `c_i(y)`.
    pub evidence: Vec<f64>,
}

/// Bayes update of a signed mixture: `m(y) = Σ w_i c_i(y)`, weights `w_i c_i / m`,
/// components the per-component conditionals.
///
/// `m(y) ≤ 0` means the prior is not a valid extraordinary prior for this likelihood.
pub fn signed_posterior(prior: &SignedMixturePrior, likelihood: &Likelihood, y: f64) -> Result<Posterior> {
    likelihood.validate(y)?;
    let mut updated = Vec::with_capacity(prior.components.len());
    let mut evidence = Vec::with_capacity(prior.components.len());
    for (w, k) in &prior.components {
        let (c, post) = likelihood.update(y, k)?;
        evidence.push(c);
        updated.push((*w, c, post));
    }
    let marginal: f64 = updated.iter().map(|(w, c, _)| w * c).sum();
    if !(marginal > 0.0) {
        return Err(Error::NonPositiveEvidence(marginal));
    }
    let components = updated.into_iter().map(|(w, c, k)| (w * c / marginal, k)).collect();
    Ok(Posterior {
        posterior: SignedMixturePrior { components },
        marginal,
        evidence,
    })
}

/// `P(x, t) = Σ p_n sin(nx) e^{-n²t}` on `[0, π]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SineSeriesSolution {
    /// `p_1, ..., p_N`.
    pub coeffs: Vec<f64>,
    pub time: f64,
}

impl SineSeriesSolution {
    pub fn new(coeffs: Vec<f64>) -> Self {
        SineSeriesSolution { coeffs, time: 0.0 }
    }

    /// The same series at time `t`.
    pub fn at_time(&self, t: f64) -> Result<Self> {
        if !(t >= 0.0) {
            return Err(invalid(format!("time must be ≥ 0, got {t}")));
        }
        Ok(SineSeriesSolution {
            coeffs: self.coeffs.clone(),
            time: t,
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        eval_series(&self.coeffs, x, self.time)
    }

    /// `∫₀^π P(x, t) dx = Σ p_n e^{-n²t} (1 - cos nπ) / n`.
    pub fn mass(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(i, _)| i % 2 == 0)
            .map(|(i, p)| {
                let n = (i + 1) as f64;
                2.0 * p * (-n * n * self.time).exp() / n
            })
            .sum()
    }

    /// Samples on `points` equally spaced nodes of `[0, π]`.
    pub fn sample(&self, points: usize) -> Vec<(f64, f64)> {
        (0..points)
            .map(|i| {
                let x = PI * i as f64 / (points - 1) as f64;
                (x, self.eval(x))
            })
            .collect()
    }
}

fn eval_series(coeffs: &[f64], x: f64, t: f64) -> f64 {
    let mut acc = 0.0;
    for (i, p) in coeffs.iter().enumerate() {
        let n = (i + 1) as f64;
        let decay = (-n * n * t).exp();
        if decay == 0.0 {
            break;
        }
        acc += p * (n * x).sin() * decay;
    }
    acc
}

/// Number of panels used per coefficient; jumps at multiples of π/64 fall on panel edges.
const SINE_PANELS: usize = 64;

/// `p_n = (2/π) ∫₀^π f(x) sin(nx) dx` for `n = 1..=n_max`.
pub fn sine_coeffs(f: impl Fn(f64) -> f64, n_max: usize) -> Result<SineSeriesSolution> {
    let opts = QuadOptions::with_tolerances(1e-15, 1e-13);
    let h = PI / SINE_PANELS as f64;
    let mut coeffs = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let nf = n as f64;
        let mut acc = 0.0;
        for k in 0..SINE_PANELS {
            acc += adaptive(|x| f(x) * (nf * x).sin(), k as f64 * h, (k + 1) as f64 * h, &opts)?.value;
        }
        coeffs.push(2.0 / PI * acc);
    }
    Ok(SineSeriesSolution::new(coeffs))
}

/// `P(x, t)` for the series coefficients of `sol`, at absolute time `t`.
pub fn evolve_and_eval(sol: &SineSeriesSolution, x: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(invalid(format!("time must be ≥ 0, got {t}")));
    }
    Ok(eval_series(&sol.coeffs, x, t))
}

/// The unit-mass bump `(2/π) 1[π/4, 3π/4]`.
pub fn bump(x: f64) -> f64 {
    if (PI / 4.0..=3.0 * PI / 4.0).contains(&x) {
        2.0 / PI
    } else {
        0.0
    }
}

/// Closed-form coefficients of [`bump`]: `(4/π²) (cos(nπ/4) - cos(3nπ/4)) / n`.
pub fn bump_coeffs(n_max: usize) -> SineSeriesSolution {
    SineSeriesSolution::new(
        (1..=n_max)
            .map(|n| {
                let nf = n as f64;
                4.0 / (PI * PI) * ((nf * PI / 4.0).cos() - (3.0 * nf * PI / 4.0).cos()) / nf
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn feynman_marginals() {
        let m = total_probability(&feynman_table()).unwrap();
        for (got, want) in m.weights().iter().zip([0.09, 0.78, 0.13]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(m.is_ordinary());
        assert!(!feynman_table().is_ordinary());
        assert_eq!(feynman_table().entry(1, 1), 1.2);
    }

    #[test]
    fn ordinary_table_is_a_standard_mixture() {
        let t = ConditionalTable::new(
            vec!["x".into(), "y".into()],
            vec!["a".into(), "b".into()],
            vec![vec![0.2, 0.9], vec![0.8, 0.1]],
            vec![0.5, 0.5],
        )
        .unwrap();
        let m = total_probability(&t).unwrap();
        assert!((m.weight(0) - 0.55).abs() < 1e-15);
        assert!((m.weight(1) - 0.45).abs() < 1e-15);
    }

    fn worked_prior() -> SignedMixturePrior {
        SignedMixturePrior::exponentials(&[(1.0, 2.0), (2.0, -1.0)]).unwrap()
    }

    #[test]
    fn signed_bayes_worked_example() {
        let prior = worked_prior();
        assert!(prior.is_ordinary(1e-12));
        let post = signed_posterior(&prior, &Likelihood::Exponential, 1.0).unwrap();
        assert!((post.marginal - 5.0 / 18.0).abs() < 1e-15);
        let w = post.posterior.weights();
        assert!((w[0] - 1.8).abs() < 1e-12 && (w[1] + 0.8).abs() < 1e-12);
        assert!(matches!(post.posterior.components()[0].1, Component::Gamma { shape, rate } if shape == 2.0 && rate == 2.0));
        assert!(matches!(post.posterior.components()[1].1, Component::Gamma { shape, rate } if shape == 2.0 && rate == 3.0));
        for z in [0.0, 0.1, 0.7, 2.0, 9.0] {
            let direct = Likelihood::Exponential.eval(1.0, z) * prior.density(z) / post.marginal;
            assert!((post.posterior.density(z) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn single_component_is_conjugate_bayes() {
        let prior = SignedMixturePrior::exponentials(&[(1.5, 1.0)]).unwrap();
        let post = signed_posterior(&prior, &Likelihood::Exponential, 0.5).unwrap();
        assert!((post.posterior.weights()[0] - 1.0).abs() < 1e-15);
        assert!(matches!(post.posterior.components()[0].1, Component::Gamma { shape, rate } if shape == 2.0 && rate == 2.0));
    }

    #[test]
    fn closed_forms_match_numeric_evidence() {
        let cases = [
            (Likelihood::Exponential, 0.7, Component::Exponential { rate: 1.3 }),
            (Likelihood::Exponential, 0.7, Component::Gamma { shape: 2.5, rate: 1.3 }),
            (Likelihood::Poisson, 3.0, Component::Exponential { rate: 0.8 }),
            (Likelihood::Poisson, 2.0, Component::Gamma { shape: 1.7, rate: 0.8 }),
            (Likelihood::Normal { sigma: 0.6 }, 1.1, Component::Exponential { rate: 2.0 }),
        ];
        for (lik, y, k) in cases {
            let (c, post) = lik.update(y, &k).unwrap();
            let (cn, _) = lik.update_numeric(y, &k).unwrap();
            assert!((c - cn).abs() < 1e-10 * c, "{lik:?} {k:?}: {c} vs {cn}");
            for z in [0.2, 1.0, 2.5] {
                let direct = lik.eval(y, z) * k.density(z) / c;
                assert!((post.density(z) - direct).abs() < 1e-10 * (1.0 + direct), "{lik:?} {k:?} at {z}");
            }
        }
    }

    #[test]
    fn custom_likelihood_uses_quadrature() {
        let lik = Likelihood::Custom(Arc::new(|y, z| z * (-z * y).exp()));
        let post = signed_posterior(&worked_prior(), &lik, 1.0).unwrap();
        assert!((post.marginal - 5.0 / 18.0).abs() < 1e-12);
        let w = post.posterior.weights();
        assert!((w[0] - 1.8).abs() < 1e-11 && (w[1] + 0.8).abs() < 1e-11);
        assert!(matches!(post.posterior.components()[0].1, Component::Custom { .. }));
    }

    #[test]
    fn invalid_signed_prior_is_reported() {
        // p(z) = 3 e^{-z} - 6 e^{-3z} is negative near 0, and m(y) < 0 once Σ w s / y² dominates
        let prior = SignedMixturePrior::exponentials(&[(1.0, 3.0), (3.0, -2.0)]).unwrap();
        assert!(!prior.is_ordinary(1e-10));
        assert!(matches!(
            signed_posterior(&prior, &Likelihood::Exponential, 5.0),
            Err(Error::NonPositiveEvidence(_))
        ));
    }

    #[test]
    fn sine_coefficient_examples() {
        let s = sine_coeffs(|x| x.sin(), 6).unwrap();
        assert!((s.coeffs[0] - 1.0).abs() < 1e-13);
        assert!(s.coeffs[1..].iter().all(|c| c.abs() < 1e-13));
        let s = sine_coeffs(|x| (2.0 * x).sin(), 4).unwrap();
        assert!((s.coeffs[1] - 1.0).abs() < 1e-13 && s.coeffs[0].abs() < 1e-13);
        let b = sine_coeffs(bump, 40).unwrap();
        let exact = bump_coeffs(40);
        for (a, e) in b.coeffs.iter().zip(&exact.coeffs) {
            assert!((a - e).abs() < 1e-12);
        }
        assert!(exact.coeffs[1].abs() < 1e-15);
        assert!(exact.coeffs[2] < 0.0);
    }

    #[test]
    fn single_mode_and_boundaries() {
        let s = SineSeriesSolution::new(vec![1.0]);
        assert!((evolve_and_eval(&s, PI / 2.0, 1.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        let b = bump_coeffs(200);
        for t in [0.0, 0.01, 0.5] {
            assert!(evolve_and_eval(&b, 0.0, t).unwrap().abs() < 1e-15);
            assert!(evolve_and_eval(&b, PI, t).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn bump_stays_nonnegative_and_loses_mass() {
        let b = bump_coeffs(400);
        let mut last = f64::INFINITY;
        for t in [0.01, 0.1, 1.0] {
            let s = b.at_time(t).unwrap();
            let min = s.sample(2049).iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
            assert!(min >= -1e-6, "t = {t}: {min}");
            let m = s.mass();
            assert!(m <= last);
            last = m;
        }
    }

    proptest! {
        #[test]
        fn posterior_weights_sum_to_one(a in 0.2f64..3.0, b in 0.2f64..3.0, w in -1.0f64..2.0, y in 0.0f64..4.0) {
            prop_assume!((a - b).abs() > 1e-3);
            let prior = SignedMixturePrior::exponentials(&[(a, w), (b, 1.0 - w)]).unwrap();
            if let Ok(post) = signed_posterior(&prior, &Likelihood::Exponential, y) {
                let total: f64 = post.posterior.weights().iter().sum();
                prop_assert!((total - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn ordinary_priors_give_ordinary_posteriors(w in 1.0f64..2.0, y in 0.0f64..5.0) {
            // 2 e^{-z} - 2 e^{-2z} style priors: weight w on Exp(1), 1 - w on Exp(2)
            let prior = SignedMixturePrior::exponentials(&[(1.0, w), (2.0, 1.0 - w)]).unwrap();
            prop_assume!(prior.is_ordinary(0.0));
            let post = signed_posterior(&prior, &Likelihood::Exponential, y).unwrap();
            prop_assert!(post.posterior.probe_min() >= -1e-10);
        }

        #[test]
        fn diffusion_mass_is_nonincreasing(t1 in 0.001f64..2.0, dt in 0.0f64..2.0) {
            let b = bump_coeffs(300);
            let m1 = b.at_time(t1).unwrap().mass();
            let m2 = b.at_time(t1 + dt).unwrap().mass();
            prop_assert!(m2 <= m1 + 1e-15);
        }
    }
}
