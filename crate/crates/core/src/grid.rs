//! Uniform grids, sampled densities and sampled characteristic functions.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quad::trapezoid;
use crate::tol::{GRID_HALF_WIDTH, GRID_POINTS, MASS_TOL};

/// Relative deviation of a spacing from the mean step tolerated as "uniform".
const UNIFORM_RTOL: f64 = 1e-9;

/// `start + i * step` for `i < len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGrid {
    start: f64,
    step: f64,
    len: usize,
}

impl UniformGrid {
    pub fn new(start: f64, step: f64, len: usize) -> Result<Self> {
        if !(start.is_finite() && step.is_finite()) || step <= 0.0 {
            return Err(invalid(format!("grid needs finite start and positive step, got ({start}, {step})")));
        }
        if len < 2 {
            return Err(invalid(format!("grid needs at least 2 points, got {len}")));
        }
        Ok(UniformGrid { start, step, len })
    }

    /// `len` points from `a` to `b` inclusive.
    pub fn linspace(a: f64, b: f64, len: usize) -> Result<Self> {
        if len < 2 || !(b > a) {
            return Err(invalid(format!("linspace needs a < b and len ≥ 2, got [{a}, {b}], {len}")));
        }
        Self::new(a, (b - a) / (len - 1) as f64, len)
    }

    /// `len` points on `[-half_width, half_width]`; odd `len` puts a node at 0.
    pub fn symmetric(half_width: f64, len: usize) -> Result<Self> {
        Self::linspace(-half_width, half_width, len)
    }

    /// Default density grid: 4097 points on `[-8σ, 8σ]`.
    pub fn standard(scale: f64) -> Result<Self> {
        Self::symmetric(GRID_HALF_WIDTH * scale, GRID_POINTS)
    }

    /// Validates that explicit abscissae are strictly increasing and equally spaced.
    pub fn from_points(points: &[f64]) -> Result<Self> {
        if points.len() < 2 {
            return Err(invalid("grid needs at least 2 points"));
        }
        let n = points.len();
        let step = (points[n - 1] - points[0]) / (n - 1) as f64;
        if !(step > 0.0) {
            return Err(Error::NonUniformGrid("abscissae are not strictly increasing".into()));
        }
        for (i, w) in points.windows(2).enumerate() {
            let d = w[1] - w[0];
            if !(d > 0.0) {
                return Err(Error::NonUniformGrid(format!("abscissae not increasing at index {}", i + 1)));
            }
            if (d - step).abs() > UNIFORM_RTOL * step.max(points[i].abs() * f64::EPSILON * 1e3) {
                return Err(Error::NonUniformGrid(format!(
                    "spacing {d} at index {} differs from mean step {step}",
                    i + 1
                )));
            }
        }
        Self::new(points[0], step, n)
    }

    pub fn start(&self) -> f64 {
        self.start
    }
    pub fn step(&self) -> f64 {
        self.step
    }
    pub fn len(&self) -> usize {
        self.len
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn end(&self) -> f64 {
        self.point(self.len - 1)
    }
    pub fn point(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }
    pub fn points(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.point(i)).collect()
    }

    /// Index of the node at `x`, if `x` is a node up to rounding.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let r = (x - self.start) / self.step;
        let i = r.round();
        if i >= 0.0 && (i as usize) < self.len && (r - i).abs() < 1e-6 {
            Some(i as usize)
        } else {
            None
        }
    }

    fn interpolate<T>(&self, values: &[T], x: f64) -> Option<T>
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
    {
        let r = (x - self.start) / self.step;
        if r < -1e-9 || r > (self.len - 1) as f64 + 1e-9 {
            return None;
        }
        let r = r.clamp(0.0, (self.len - 1) as f64);
        let i = (r.floor() as usize).min(self.len - 2);
        let f = r - i as f64;
        Some(values[i] * (1.0 - f) + values[i + 1] * f)
    }
}

/// A real, possibly signed density sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    grid: UniformGrid,
    values: Vec<f64>,
    normalized: bool,
}

/// Trapezoid-rule integral of a sampled density.
pub fn integrate(d: &GridDensity) -> f64 {
    trapezoid(d.grid.step, &d.values)
}

/// Trapezoid-rule integral of samples at explicit abscissae, which must be uniform.
pub fn integrate_samples(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(invalid(format!("{} abscissae but {} values", x.len(), y.len())));
    }
    let grid = UniformGrid::from_points(x)?;
    Ok(trapezoid(grid.step, y))
}

impl GridDensity {
    /// Unnormalized density; call [`GridDensity::check_normalized`] to set the flag.
    pub fn new(grid: UniformGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid(format!("{} values for a grid of {} points", values.len(), grid.len())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite density value at {}", grid.point(i))));
        }
        Ok(GridDensity {
            grid,
            values,
            normalized: false,
        })
    }

    pub fn from_fn(grid: UniformGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.points().into_iter().map(f).collect();
        Self::new(grid, values)
    }

    /// Sets the `normalized` flag after verifying unit mass within `tol`.
    pub fn check_normalized(mut self, tol: f64) -> Result<Self> {
        let m = integrate(&self);
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

    /// Same as `check_normalized(MASS_TOL)`.
    pub fn normalized(self) -> Result<Self> {
        self.check_normalized(MASS_TOL)
    }

    /// Divides by the trapezoid mass and sets the flag.
    pub fn renormalize(&self) -> Result<Self> {
        let m = integrate(self);
        if m == 0.0 || !m.is_finite() {
            return Err(Error::Mass {
                expected: 1.0,
                actual: m,
                tol: MASS_TOL,
            });
        }
        Ok(GridDensity {
            grid: self.grid,
            values: self.values.iter().map(|v| v / m).collect(),
            normalized: true,
        })
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }
    pub fn mass(&self) -> f64 {
        integrate(self)
    }

    /// Linear interpolation; `None` outside the grid.
    pub fn value_at(&self, x: f64) -> Option<f64> {
        self.grid.interpolate(&self.values, x)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest `|p(x) - p(-x)|` over mirrored node pairs.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.values.len() {
            if let Some(j) = self.grid.index_of(-self.grid.point(i)) {
                worst = worst.max((self.values[i] - self.values[j]).abs());
            }
        }
        worst
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["abscissa", "value"])?;
        for (i, v) in self.values.iter().enumerate() {
            wtr.write_record([fmt_num(self.grid.point(i)), fmt_num(*v)])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let (x, re, _) = read_columns(r, false)?;
        let grid = UniformGrid::from_points(&x)?;
        Self::new(grid, re)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&DensityJson {
            grid: self.grid.points(),
            values: self.values.clone(),
            normalized: self.normalized,
        })?)
    }

    /// Parses the JSON form; a `normalized: true` document is re-verified.
    pub fn from_json(s: &str) -> Result<Self> {
        let doc: DensityJson = serde_json::from_str(s)?;
        let d = Self::new(UniformGrid::from_points(&doc.grid)?, doc.values)?;
        if doc.normalized {
            d.normalized()
        } else {
            Ok(d)
        }
    }

    pub fn save(&self, path: &Path, format: Format) -> Result<()> {
        let file = std::fs::File::create(path)?;
        match format {
            Format::Csv => self.write_csv(file),
            Format::Json => {
                let mut file = file;
                file.write_all(self.to_json()?.as_bytes())?;
                Ok(())
            }
        }
    }
}

/// Output file formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// A complex characteristic function sampled on a uniform frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CharFn {
    grid: UniformGrid,
    values: Vec<Complex64>,
    periodic: bool,
}

impl CharFn {
    pub fn new(grid: UniformGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid(format!("{} values for a grid of {} points", values.len(), grid.len())));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(invalid("non-finite characteristic function value"));
        }
        Ok(CharFn {
            grid,
            values,
            periodic: false,
        })
    }

    pub fn from_fn(grid: UniformGrid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = grid.points().into_iter().map(f).collect();
        Self::new(grid, values)
    }

    pub fn from_real_fn(grid: UniformGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_fn(grid, |t| Complex64::new(f(t), 0.0))
    }

    /// Marks the samples as the exact discrete transform of a grid density,
    /// so inversion may use the matching discrete inverse.
    pub(crate) fn with_periodic(mut self, periodic: bool) -> Self {
        self.periodic = periodic;
        self
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }
    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn value_at(&self, t: f64) -> Option<Complex64> {
        self.grid.interpolate(&self.values, t)
    }

    /// `φ(0)`, which equals the total mass.
    pub fn at_zero(&self) -> Option<Complex64> {
        self.grid.index_of(0.0).map(|i| self.values[i]).or_else(|| self.value_at(0.0))
    }

    /// Largest `|φ(-t) - conj φ(t)|` over mirrored nodes.
    pub fn hermitian_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.values.len() {
            if let Some(j) = self.grid.index_of(-self.grid.point(i)) {
                worst = worst.max((self.values[j] - self.values[i].conj()).norm());
            }
        }
        worst
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["abscissa", "value", "imag"])?;
        for (i, v) in self.values.iter().enumerate() {
            wtr.write_record([fmt_num(self.grid.point(i)), fmt_num(v.re), fmt_num(v.im)])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let (t, re, im) = read_columns(r, true)?;
        let values = re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect();
        Self::new(UniformGrid::from_points(&t)?, values)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&CharFnJson {
            grid: self.grid.points(),
            values: self.values.iter().map(|v| v.re).collect(),
            imag: self.values.iter().map(|v| v.im).collect(),
            normalized: self.at_zero().map(|z| (z - 1.0).norm() <= MASS_TOL).unwrap_or(false),
        })?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: CharFnJson = serde_json::from_str(s)?;
        if doc.imag.len() != doc.values.len() {
            return Err(invalid("`imag` and `values` differ in length"));
        }
        let values = doc.values.into_iter().zip(doc.imag).map(|(a, b)| Complex64::new(a, b)).collect();
        Self::new(UniformGrid::from_points(&doc.grid)?, values)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DensityJson {
    grid: Vec<f64>,
    values: Vec<f64>,
    normalized: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CharFnJson {
    grid: Vec<f64>,
    values: Vec<f64>,
    imag: Vec<f64>,
    normalized: bool,
}

/// Fixed 17-significant-digit formatting, so output files are byte-stable.
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        // avoid "-0" vs "0" differences between equivalent runs
        return format!("{:.16e}", 0.0);
    }
    format!("{v:.16e}")
}

fn read_columns<R: Read>(r: R, complex: bool) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let headers = rdr.headers()?.clone();
    let want = if complex { 3 } else { 2 };
    if headers.len() < want || &headers[0] != "abscissa" || &headers[1] != "value" {
        return Err(Error::MalformedTable(format!(
            "expected header `abscissa,value{}`, got `{}`",
            if complex { ",imag" } else { "" },
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let (mut x, mut re, mut im) = (Vec::new(), Vec::new(), Vec::new());
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parse = |k: usize| -> Result<f64> {
            rec.get(k)
                .ok_or_else(|| Error::MalformedTable(format!("row {} has too few columns", line + 2)))?
                .parse::<f64>()
                .map_err(|e| Error::MalformedTable(format!("row {}: {e}", line + 2)))
        };
        x.push(parse(0)?);
        re.push(parse(1)?);
        if complex {
            im.push(parse(2)?);
        }
    }
    Ok((x, re, im))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn normal(x: f64) -> f64 {
        (-x * x / 2.0).exp() / (2.0 * PI).sqrt()
    }

    #[test]
    fn standard_normal_has_unit_mass() {
        let d = GridDensity::from_fn(UniformGrid::standard(1.0).unwrap(), normal).unwrap();
        assert!((integrate(&d) - 1.0).abs() < 1e-8);
        assert!(d.normalized().unwrap().is_normalized());
    }

    #[test]
    fn zero_density_integrates_to_zero() {
        let d = GridDensity::from_fn(UniformGrid::standard(1.0).unwrap(), |_| 0.0).unwrap();
        assert_eq!(integrate(&d), 0.0);
        assert!(matches!(d.normalized(), Err(Error::Mass { .. })));
    }

    #[test]
    fn non_uniform_abscissae_rejected() {
        let x = [0.0, 0.1, 0.25, 0.3];
        assert!(matches!(integrate_samples(&x, &[1.0; 4]), Err(Error::NonUniformGrid(_))));
        let x = [0.0, 0.1, 0.1, 0.3];
        assert!(matches!(UniformGrid::from_points(&x), Err(Error::NonUniformGrid(_))));
    }

    #[test]
    fn csv_round_trip() {
        let d = GridDensity::from_fn(UniformGrid::symmetric(4.0, 33).unwrap(), normal).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("abscissa,value\n"));
        let back = GridDensity::read_csv(&buf[..]).unwrap();
        assert_eq!(back.values(), d.values());
    }

    #[test]
    fn json_round_trip_keeps_flag() {
        let d = GridDensity::from_fn(UniformGrid::standard(1.0).unwrap(), normal)
            .unwrap()
            .normalized()
            .unwrap();
        let back = GridDensity::from_json(&d.to_json().unwrap()).unwrap();
        assert!(back.is_normalized());
        assert_eq!(back.values(), d.values());
    }

    #[test]
    fn charfn_csv_has_imag_column() {
        let g = UniformGrid::symmetric(2.0, 5).unwrap();
        let phi = CharFn::from_fn(g, |t| Complex64::new(0.0, t).exp()).unwrap();
        let mut buf = Vec::new();
        phi.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("abscissa,value,imag\n"));
        let back = CharFn::read_csv(&buf[..]).unwrap();
        assert_eq!(back.values(), phi.values());
        assert!(phi.hermitian_residual() < 1e-15);
    }

    #[test]
    fn interpolation_and_nodes() {
        let g = UniformGrid::linspace(0.0, 1.0, 11).unwrap();
        assert_eq!(g.index_of(0.3), Some(3));
        assert_eq!(g.index_of(0.35), None);
        let d = GridDensity::from_fn(g, |x| 2.0 * x).unwrap();
        assert!((d.value_at(0.35).unwrap() - 0.7).abs() < 1e-15);
        assert!(d.value_at(1.5).is_none());
    }
}
