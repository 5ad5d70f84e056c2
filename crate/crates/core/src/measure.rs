//! Signed discrete distributions, signed mixing measures on `(0, ∞)` and
//! signed conditional tables.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::quad::{self, OscillatoryOptions, QuadEstimate, QuadOptions};
use crate::tol::{MASS_TOL, PROBE_POINTS};

/// A discrete distribution on the integers whose weights may be negative.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedPmf {
    atoms: Vec<(i64, f64)>,
}

impl SignedPmf {
    /// Requires `Σ weight = 1` within [`MASS_TOL`].
    pub fn new(atoms: Vec<(i64, f64)>) -> Result<Self> {
        Self::with_tol(atoms, MASS_TOL)
    }

    pub fn with_tol(atoms: Vec<(i64, f64)>, tol: f64) -> Result<Self> {
        if atoms.is_empty() {
            return Err(invalid("a signed PMF needs at least one atom"));
        }
        if atoms.iter().any(|(_, w)| !w.is_finite()) {
            return Err(invalid("non-finite PMF weight"));
        }
        let mut sorted = atoms;
        sorted.sort_by_key(|a| a.0);
        if sorted.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(invalid("duplicate PMF index"));
        }
        let pmf = SignedPmf { atoms: sorted };
        let m = pmf.mass();
        if (m - 1.0).abs() > tol {
            return Err(Error::Mass {
                expected: 1.0,
                actual: m,
                tol,
            });
        }
        Ok(pmf)
    }

    /// Weights `p_0, p_1, ...` on consecutive indices from 0.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        Self::new(weights.iter().enumerate().map(|(i, &w)| (i as i64, w)).collect())
    }

    pub fn atoms(&self) -> &[(i64, f64)] {
        &self.atoms
    }

    pub fn weights(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.1).collect()
    }

    pub fn weight(&self, index: i64) -> f64 {
        self.atoms
            .binary_search_by_key(&index, |a| a.0)
            .map(|k| self.atoms[k].1)
            .unwrap_or(0.0)
    }

    pub fn mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    /// `Σ |weight|`; equals 1 exactly when the distribution is ordinary.
    pub fn total_variation(&self) -> f64 {
        self.atoms.iter().map(|a| a.1.abs()).sum()
    }

    pub fn is_ordinary(&self) -> bool {
        self.is_ordinary_with(MASS_TOL)
    }

    pub fn is_ordinary_with(&self, tol: f64) -> bool {
        self.atoms.iter().all(|a| a.1 >= -tol)
    }
}

/// Where the sign changes of an oscillating mixing density sit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Oscillation {
    /// Whether the zeros are periodic in `v` itself or in `1 / v`.
    pub variable: OscillationVariable,
    /// First positive zero in the oscillating variable.
    pub first_zero: f64,
    pub spacing: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OscillationVariable {
    Direct,
    Reciprocal,
}

impl Oscillation {
    pub fn direct(first_zero: f64, spacing: f64) -> Self {
        Oscillation {
            variable: OscillationVariable::Direct,
            first_zero,
            spacing,
        }
    }

    pub fn reciprocal(first_zero: f64, spacing: f64) -> Self {
        Oscillation {
            variable: OscillationVariable::Reciprocal,
            first_zero,
            spacing,
        }
    }

    /// Panel boundaries `0, z_0, z_0 + d, ...` in the oscillating variable.
    fn breakpoints(&self) -> impl Fn(usize) -> f64 {
        let (z0, d) = (self.first_zero, self.spacing);
        move |k| {
            if z0 <= 0.0 {
                k as f64 * d
            } else if k == 0 {
                0.0
            } else {
                z0 + (k - 1) as f64 * d
            }
        }
    }
}

pub type DensityFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// The three representations of a signed mixing measure.
#[derive(Clone)]
pub enum MixingForm {
    /// Point masses `(location > 0, weight)`.
    Atoms(Vec<(f64, f64)>),
    /// A density on `(0, ∞)`, possibly oscillating.
    Density {
        f: DensityFn,
        oscillation: Option<Oscillation>,
    },
    /// Samples of a density on a uniform grid of positive locations.
    Grid { v: crate::grid::UniformGrid, values: Vec<f64> },
}

impl fmt::Debug for MixingForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MixingForm::Atoms(a) => f.debug_tuple("Atoms").field(a).finish(),
            MixingForm::Density { oscillation, .. } => {
                f.debug_struct("Density").field("oscillation", oscillation).finish_non_exhaustive()
            }
            MixingForm::Grid { v, .. } => f.debug_struct("Grid").field("v", v).finish_non_exhaustive(),
        }
    }
}

/// A signed measure on `(0, ∞)` used as mixing weights over variances or rates.
#[derive(Debug, Clone)]
pub struct SignedMixingMeasure {
    form: MixingForm,
    normalized: bool,
}

impl SignedMixingMeasure {
    /// Point masses; flagged normalized when the weights sum to 1.
    pub fn atoms(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(invalid("mixing measure needs at least one atom"));
        }
        if let Some((v, _)) = atoms.iter().find(|(v, w)| !(*v > 0.0 && v.is_finite()) || !w.is_finite()) {
            return Err(invalid(format!("atom location {v} is not a positive finite number")));
        }
        let mass: f64 = atoms.iter().map(|a| a.1).sum();
        Ok(SignedMixingMeasure {
            form: MixingForm::Atoms(atoms),
            normalized: (mass - 1.0).abs() <= MASS_TOL,
        })
    }

    pub fn point_mass(v: f64) -> Result<Self> {
        Self::atoms(vec![(v, 1.0)])
    }

    /// A density, not yet flagged normalized; see [`SignedMixingMeasure::checked`].
    pub fn density(f: impl Fn(f64) -> f64 + Send + Sync + 'static, oscillation: Option<Oscillation>) -> Self {
        SignedMixingMeasure {
            form: MixingForm::Density {
                f: Arc::new(f),
                oscillation,
            },
            normalized: false,
        }
    }

    pub fn grid(v: crate::grid::UniformGrid, values: Vec<f64>) -> Result<Self> {
        if v.start() <= 0.0 {
            return Err(invalid("mixing grid locations must be positive"));
        }
        if values.len() != v.len() || values.iter().any(|x| !x.is_finite()) {
            return Err(invalid("mixing grid values must be finite and match the grid"));
        }
        Ok(SignedMixingMeasure {
            form: MixingForm::Grid { v, values },
            normalized: false,
        })
    }

    /// Computes the total mass and sets the `normalized` flag if it is 1 within `tol`.
    pub fn checked(mut self, tol: f64) -> Result<Self> {
        let m = self.mass()?;
        if (m - 1.0).abs() > tol {
            return Err(Error::Mass {
                expected: 1.0,
                actual: m,
                tol,
            });
        }
        self.normalized = true;
        Ok(self)
    }

    /// Divides by the total mass.
    pub fn renormalize(&self) -> Result<Self> {
        let m = self.mass()?;
        if m == 0.0 || !m.is_finite() {
            return Err(Error::Mass {
                expected: 1.0,
                actual: m,
                tol: MASS_TOL,
            });
        }
        let form = match &self.form {
            MixingForm::Atoms(a) => MixingForm::Atoms(a.iter().map(|&(v, w)| (v, w / m)).collect()),
            MixingForm::Density { f, oscillation } => {
                let f = f.clone();
                MixingForm::Density {
                    f: Arc::new(move |v| f(v) / m),
                    oscillation: *oscillation,
                }
            }
            MixingForm::Grid { v, values } => MixingForm::Grid {
                v: *v,
                values: values.iter().map(|x| x / m).collect(),
            },
        };
        Ok(SignedMixingMeasure { form, normalized: true })
    }

    pub fn form(&self) -> &MixingForm {
        &self.form
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Density value at `v` for density and grid forms.
    pub fn density_at(&self, v: f64) -> Option<f64> {
        match &self.form {
            MixingForm::Atoms(_) => None,
            MixingForm::Density { f, .. } => Some(f(v)),
            MixingForm::Grid { v: g, values } => {
                let d = crate::grid::GridDensity::new(*g, values.clone()).ok()?;
                d.value_at(v)
            }
        }
    }

    /// Total signed mass `∫ dF`.
    pub fn mass(&self) -> Result<f64> {
        self.integrate(|_| 1.0).map(|q| q.value)
    }

    /// `∫ k(v) dF(v)` with adaptive, half-line or oscillatory quadrature as the form requires.
    pub fn integrate<K: Fn(f64) -> f64>(&self, kernel: K) -> Result<QuadEstimate> {
        self.integrate_with(kernel, &QuadOptions::with_tolerances(1e-14, 1e-12), &OscillatoryOptions::default())
    }

    pub fn integrate_with<K: Fn(f64) -> f64>(
        &self,
        kernel: K,
        opts: &QuadOptions,
        osc: &OscillatoryOptions,
    ) -> Result<QuadEstimate> {
        match &self.form {
            MixingForm::Atoms(a) => Ok(QuadEstimate {
                value: a.iter().map(|&(v, w)| w * kernel(v)).sum(),
                error: 0.0,
                evaluations: a.len(),
            }),
            MixingForm::Grid { v, values } => {
                let samples: Vec<f64> = values.iter().enumerate().map(|(i, w)| w * kernel(v.point(i))).collect();
                Ok(QuadEstimate {
                    value: quad::trapezoid(v.step(), &samples),
                    error: 0.0,
                    evaluations: samples.len(),
                })
            }
            MixingForm::Density { f, oscillation: None } => quad::half_line(|v| nonzero_product(f(v), &kernel, v), opts),
            MixingForm::Density {
                f,
                oscillation: Some(osc_spec),
            } => match osc_spec.variable {
                OscillationVariable::Direct => {
                    quad::oscillatory(|v| nonzero_product(f(v), &kernel, v), osc_spec.breakpoints(), osc)
                }
                OscillationVariable::Reciprocal => quad::oscillatory(
                    |t| {
                        if t <= 0.0 {
                            return 0.0;
                        }
                        let v = 1.0 / t;
                        nonzero_product(f(v), &kernel, v) * v * v
                    },
                    osc_spec.breakpoints(),
                    osc,
                ),
            },
        }
    }

    /// Whether all weights (atoms) or sampled density values on a probe grid are ≥ `-tol`.
    ///
    /// Density forms are probed at [`PROBE_POINTS`] log-spaced points on `[1e-4, 1e4]`.
    pub fn is_ordinary(&self, tol: f64) -> bool {
        match &self.form {
            MixingForm::Atoms(a) => a.iter().all(|a| a.1 >= -tol),
            MixingForm::Grid { values, .. } => values.iter().all(|&w| w >= -tol),
            MixingForm::Density { f, .. } => (0..PROBE_POINTS).all(|i| {
                let v = 10f64.powf(-4.0 + 8.0 * i as f64 / (PROBE_POINTS - 1) as f64);
                f(v) >= -tol
            }),
        }
    }
}

// Skip kernel evaluation where the density vanishes, so `0 * inf` never arises
// from kernels like `v^{-1/2}` at the far ends of the half-line map.
fn nonzero_product<K: Fn(f64) -> f64>(fv: f64, kernel: &K, v: f64) -> f64 {
    if fv == 0.0 {
        0.0
    } else {
        fv * kernel(v)
    }
}

/// `p(state | condition)` with signed entries, plus nonnegative base rates `p(condition)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalTable {
    states: Vec<String>,
    conditions: Vec<String>,
    /// Row-major: `entries[state][condition]`.
    entries: Vec<Vec<f64>>,
    base: Vec<f64>,
}

impl ConditionalTable {
    pub fn new(states: Vec<String>, conditions: Vec<String>, entries: Vec<Vec<f64>>, base: Vec<f64>) -> Result<Self> {
        if states.is_empty() || conditions.is_empty() {
            return Err(Error::MalformedTable("table needs at least one state and one condition".into()));
        }
        if entries.len() != states.len() || entries.iter().any(|r| r.len() != conditions.len()) {
            return Err(Error::MalformedTable(format!(
                "entries must be {} x {}",
                states.len(),
                conditions.len()
            )));
        }
        if base.len() != conditions.len() {
            return Err(Error::MalformedTable(format!(
                "{} base rates for {} conditions",
                base.len(),
                conditions.len()
            )));
        }
        if entries.iter().flatten().chain(&base).any(|v| !v.is_finite()) {
            return Err(Error::MalformedTable("non-finite entry".into()));
        }
        if let Some(b) = base.iter().find(|&&b| b < 0.0) {
            return Err(Error::MalformedTable(format!("negative base rate {b}")));
        }
        let base_sum: f64 = base.iter().sum();
        if (base_sum - 1.0).abs() > MASS_TOL {
            return Err(Error::MalformedTable(format!("base rates sum to {base_sum}")));
        }
        for (j, c) in conditions.iter().enumerate() {
            let col: f64 = entries.iter().map(|r| r[j]).sum();
            if (col - 1.0).abs() > MASS_TOL {
                return Err(Error::MalformedTable(format!("column `{c}` sums to {col}")));
            }
        }
        Ok(ConditionalTable {
            states,
            conditions,
            entries,
            base,
        })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }
    pub fn conditions(&self) -> &[String] {
        &self.conditions
    }
    pub fn entries(&self) -> &[Vec<f64>] {
        &self.entries
    }
    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn entry(&self, state: usize, condition: usize) -> f64 {
        self.entries[state][condition]
    }

    pub fn is_ordinary(&self) -> bool {
        self.entries.iter().flatten().all(|&v| v >= -MASS_TOL)
    }
}
