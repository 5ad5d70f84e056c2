//! Library-wide tolerances and defaults.

use serde::{Deserialize, Serialize};

/// Tolerance for every unit-mass check (signed PMFs, grid densities, mixing measures).
pub const MASS_TOL: f64 = 1e-8;

/// Default truncation order of power series.
pub const SERIES_ORDER: usize = 64;

/// Default number of points of a density grid.
pub const GRID_POINTS: usize = 4097;

/// Default half-width of a density grid, in units of the scale parameter.
pub const GRID_HALF_WIDTH: f64 = 8.0;

/// Number of points of the probe grids used by nonnegativity checks.
pub const PROBE_POINTS: usize = 2049;

/// Overridable defaults, e.g. from a `quasiprob.json` configuration file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    pub grid_points: usize,
    pub mass_tol: f64,
    pub series_order: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            grid_points: GRID_POINTS,
            mass_tol: MASS_TOL,
            series_order: SERIES_ORDER,
        }
    }
}
