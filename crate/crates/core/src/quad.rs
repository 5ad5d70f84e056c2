//! Quadrature primitives: adaptive Gauss-Kronrod on finite intervals, the
//! half line via `v = u / (1 - u)`, and oscillatory integrals summed panel by
//! panel between sign changes with Euler-accelerated partial sums.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Result of a quadrature: value, absolute error estimate and the number of
/// integrand evaluations (or panels, for oscillatory sums).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadEstimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-13,
            rel_tol: 1e-11,
            max_intervals: 4000,
        }
    }
}

impl QuadOptions {
    pub fn with_tolerances(abs_tol: f64, rel_tol: f64) -> Self {
        QuadOptions {
            abs_tol,
            rel_tol,
            ..Default::default()
        }
    }
}

/// One application of the 15-point Kronrod rule on `[a, b]`, returning
/// `(integral, error estimate, integral of |f|)`.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_g = fc * WG[3];
    let mut res_k = fc * WGK[7];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let integral = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (1.0_f64).min((200.0 * err / res_asc).powf(1.5));
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (integral, err, res_abs)
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive Gauss-Kronrod quadrature on a finite interval.
///
/// The interval with the largest error estimate is bisected until the total
/// error meets `max(abs_tol, rel_tol * |value|)`.
pub fn adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadEstimate> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(crate::error::invalid(format!("non-finite limits [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadEstimate {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let (v, e, _) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value: v, error: e });
    let mut total = v;
    let mut total_err = e;
    let mut evaluations = 15;
    let min_width = (b - a).abs() * 1e-15;
    loop {
        let tol = opts.abs_tol.max(opts.rel_tol * total.abs());
        if !total.is_finite() {
            return Err(Error::Divergent(format!("integrand is not finite on [{a}, {b}]")));
        }
        if total_err <= tol {
            break;
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::NotConverged {
                panels: heap.len(),
                estimate: total,
                error: total_err,
            });
        }
        let seg = heap.pop().expect("heap is never empty");
        if (seg.b - seg.a).abs() <= min_width {
            // cannot refine further; accept what we have
            heap.push(seg);
            break;
        }
        let mid = 0.5 * (seg.a + seg.b);
        let (v1, e1, _) = gk15(&f, seg.a, mid);
        let (v2, e2, _) = gk15(&f, mid, seg.b);
        evaluations += 30;
        total += v1 + v2 - seg.value;
        total_err += e1 + e2 - seg.error;
        heap.push(Segment { a: seg.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: seg.b, value: v2, error: e2 });
    }
    // re-sum in a fixed order so the result does not depend on heap history
    let mut segs: Vec<Segment> = heap.into_vec();
    segs.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = segs.iter().map(|s| s.value).sum();
    let error = segs.iter().map(|s| s.error).sum();
    Ok(QuadEstimate { value, error, evaluations })
}

/// `∫₀^∞ f(v) dv` through the substitution `v = (u / (1 - u))²` onto `(0, 1)`.
///
/// The square keeps integrands like `v^{-1/2}` near 0 and `v^{-3/2}` at infinity
/// bounded in `u`.
pub fn half_line<F: Fn(f64) -> f64>(f: F, opts: &QuadOptions) -> Result<QuadEstimate> {
    adaptive(
        |u| {
            let w = 1.0 - u;
            let r = u / w;
            let fv = f(r * r);
            if fv == 0.0 {
                0.0
            } else {
                fv * 2.0 * r / (w * w)
            }
        },
        0.0,
        1.0,
        opts,
    )
}

/// Options for [`oscillatory`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatoryOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
    /// Number of trailing partial sums fed to the Euler transform.
    pub euler_depth: usize,
}

impl Default for OscillatoryOptions {
    fn default() -> Self {
        OscillatoryOptions {
            abs_tol: 1e-12,
            rel_tol: 1e-11,
            max_panels: 20_000,
            euler_depth: 24,
        }
    }
}

/// Breakpoints `start + k * spacing`, e.g. the zeros of `sin` for `start = 0, spacing = π`.
pub fn linear_breakpoints(start: f64, spacing: f64) -> impl Fn(usize) -> f64 {
    move |k| start + k as f64 * spacing
}

/// Euler transform of an alternating tail: repeated pairwise averaging of the
/// given partial sums, i.e. binomial weights `C(n, i) / 2^n`.
pub fn euler_average(partial_sums: &[f64]) -> f64 {
    let mut row = partial_sums.to_vec();
    while row.len() > 1 {
        for i in 0..row.len() - 1 {
            row[i] = 0.5 * (row[i] + row[i + 1]);
        }
        row.pop();
    }
    row.first().copied().unwrap_or(0.0)
}

/// `∫_{b(0)}^∞ f(t) dt` for an oscillatory integrand.
///
/// `breakpoint(k)` must be increasing and should sit at the sign changes of the
/// oscillating factor, so that panel integrals alternate in sign. The partial
/// sums are accelerated with the Euler transform; conditionally convergent and
/// Abel-summable integrals (e.g. `∫₀^∞ sin t dt = 1`) converge to their Euler
/// value.
pub fn oscillatory<F, B>(f: F, breakpoint: B, opts: &OscillatoryOptions) -> Result<QuadEstimate>
where
    F: Fn(f64) -> f64,
    B: Fn(usize) -> f64,
{
    const MIN_PANELS: usize = 10;
    const GROWTH_WINDOW: usize = 8;
    let panel_opts = QuadOptions {
        abs_tol: opts.abs_tol * 1e-2,
        rel_tol: opts.rel_tol * 1e-2,
        max_intervals: 2000,
    };
    let mut partial = 0.0;
    let mut sums: Vec<f64> = Vec::new();
    let mut terms: Vec<f64> = Vec::new();
    let mut prev_estimate: Option<f64> = None;
    let mut stable = 0;
    let mut evaluations = 0;
    let mut last_change = f64::INFINITY;
    for k in 0..opts.max_panels {
        let lo = breakpoint(k);
        let hi = breakpoint(k + 1);
        if !(hi > lo) {
            return Err(crate::error::invalid(format!(
                "breakpoints must increase: b({k}) = {lo}, b({}) = {hi}",
                k + 1
            )));
        }
        let panel = adaptive(&f, lo, hi, &panel_opts)?;
        evaluations += panel.evaluations;
        partial += panel.value;
        sums.push(partial);
        terms.push(panel.value);
        if !partial.is_finite() {
            return Err(Error::Divergent("oscillatory partial sums are not finite".into()));
        }
        if sums.len() < MIN_PANELS {
            continue;
        }
        let n = terms.len();
        let window = &terms[n - GROWTH_WINDOW..];
        let growing = window.windows(2).all(|w| w[1].abs() > w[0].abs());
        if growing && window[GROWTH_WINDOW - 1].abs() > 1.5 * window[0].abs() {
            return Err(Error::Divergent(format!(
                "panel contributions grow from {:e} to {:e}",
                window[0].abs(),
                window[GROWTH_WINDOW - 1].abs()
            )));
        }
        let tol = opts.abs_tol.max(opts.rel_tol * partial.abs());
        let recent = terms[n - 1].abs() + terms[n - 2].abs();
        if recent <= 0.1 * tol {
            return Ok(QuadEstimate {
                value: partial,
                error: recent,
                evaluations,
            });
        }
        let depth = opts.euler_depth.min(sums.len() - 1);
        let estimate = euler_average(&sums[sums.len() - 1 - depth..]);
        if let Some(prev) = prev_estimate {
            let change = (estimate - prev).abs();
            let tol = opts.abs_tol.max(opts.rel_tol * estimate.abs());
            if change <= tol {
                stable += 1;
                if stable >= 2 {
                    return Ok(QuadEstimate {
                        value: estimate,
                        error: change.max(last_change.min(tol)),
                        evaluations,
                    });
                }
            } else {
                stable = 0;
            }
            last_change = change;
        }
        prev_estimate = Some(estimate);
    }
    Err(Error::NotConverged {
        panels: opts.max_panels,
        estimate: prev_estimate.unwrap_or(partial),
        error: last_change,
    })
}

/// Composite trapezoid rule on equally spaced samples.
pub fn trapezoid(step: f64, values: &[f64]) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let interior: f64 = values[1..n - 1].iter().sum();
            step * (interior + 0.5 * (values[0] + values[n - 1]))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn kronrod_rule_is_exact_for_polynomials() {
        for k in 0..=20 {
            let (v, _, _) = gk15(&|x: f64| x.powi(k), -1.0, 1.0);
            let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
            assert!((v - exact).abs() < 1e-14, "degree {k}: {v} vs {exact}");
        }
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let r = adaptive(|x: f64| x.powf(-0.5), 0.0, 1.0, &QuadOptions::default()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-8, "{}", r.value);
    }

    #[test]
    fn half_line_gaussian() {
        let r = half_line(|x: f64| (-x * x / 2.0).exp(), &QuadOptions::default()).unwrap();
        assert!((r.value - (PI / 2.0).sqrt()).abs() < 1e-11);
    }

    #[test]
    fn damped_sine_integrals() {
        let o = OscillatoryOptions::default();
        let r = oscillatory(|t: f64| (-t).exp() * t.sin(), linear_breakpoints(0.0, PI), &o).unwrap();
        assert!((r.value - 0.5).abs() < 1e-10);
        let r = oscillatory(|t: f64| (-2.0 * t).exp() * t.sin(), linear_breakpoints(0.0, PI), &o).unwrap();
        assert!((r.value - 0.2).abs() < 1e-10);
    }

    #[test]
    fn slowly_decaying_sine_integral() {
        // ∫₀^∞ sin t / √t dt = √(π/2)
        let o = OscillatoryOptions::default();
        let r = oscillatory(|t: f64| t.sin() / t.sqrt(), linear_breakpoints(0.0, PI), &o).unwrap();
        assert!((r.value - (PI / 2.0).sqrt()).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn abel_summable_sine() {
        let o = OscillatoryOptions::default();
        let r = oscillatory(|t: f64| t.sin(), linear_breakpoints(0.0, PI), &o).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn growing_integrand_is_divergent() {
        let o = OscillatoryOptions::default();
        let r = oscillatory(|t: f64| t * t.sin(), linear_breakpoints(0.0, PI), &o);
        assert!(matches!(r, Err(Error::Divergent(_))), "{r:?}");
    }

    #[test]
    fn panel_budget_exhaustion_is_reported() {
        let o = OscillatoryOptions {
            max_panels: 8,
            ..Default::default()
        };
        let r = oscillatory(|t: f64| t.sin() / t.sqrt().sqrt(), linear_breakpoints(0.0, PI), &o);
        assert!(matches!(r, Err(Error::NotConverged { .. })), "{r:?}");
    }

    #[test]
    fn euler_average_of_constant_sequence() {
        assert_eq!(euler_average(&[3.0; 7]), 3.0);
        assert_eq!(euler_average(&[1.0, 0.0, 1.0, 0.0, 1.0]), 0.5);
    }

    #[test]
    fn trapezoid_degenerate() {
        assert_eq!(trapezoid(0.1, &[]), 0.0);
        assert_eq!(trapezoid(0.1, &[1.0]), 0.0);
        assert!((trapezoid(0.5, &[1.0, 1.0, 1.0]) - 1.0).abs() < 1e-15);
    }
}
