//! Settings resolution: flags, then the configuration file, then defaults.

use std::fmt;
use std::path::{Path, PathBuf};

use quasiprob::tol::Settings;

use crate::Common;

/// Default configuration file, looked up in the working directory.
pub const CONFIG_FILE: &str = "quasiprob.json";

/// A bad configuration file, flag value or suite name; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn resolve(c: &Common) -> Result<Settings, ConfigError> {
    let mut s = match &c.config {
        // an explicit path must exist
        Some(p) => load(p)?,
        None if Path::new(CONFIG_FILE).exists() => load(&PathBuf::from(CONFIG_FILE))?,
        None => Settings::default(),
    };
    if let Some(g) = c.grid {
        s.grid_points = g;
    }
    if let Some(o) = c.order {
        s.series_order = o;
    }
    if let Some(t) = c.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(ConfigError(format!("--tol must be positive, got {t}")));
        }
        s.mass_tol = t;
    }
    validate(&s)?;
    Ok(s)
}

fn load(path: &Path) -> Result<Settings, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
}

fn validate(s: &Settings) -> Result<(), ConfigError> {
    if s.grid_points < 3 {
        return Err(ConfigError(format!("grid_points must be at least 3, got {}", s.grid_points)));
    }
    if !(s.mass_tol > 0.0 && s.mass_tol.is_finite()) {
        return Err(ConfigError(format!("mass_tol must be positive, got {}", s.mass_tol)));
    }
    if s.series_order == 0 {
        return Err(ConfigError("series_order must be positive".into()));
    }
    Ok(())
}
