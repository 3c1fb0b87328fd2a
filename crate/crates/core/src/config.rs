//! Run configuration: JSON ingestion, defaults and validation.
//!
//! An empty object `{}` is a complete configuration (the default parameter
//! point with default grids). Unknown keys are rejected everywhere.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Eigen,
    Spectrum,
    Map,
    Raman,
    Classify,
    Verify,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Eigen => "eigen",
            Task::Spectrum => "spectrum",
            Task::Map => "map",
            Task::Raman => "raman",
            Task::Classify => "classify",
            Task::Verify => "verify",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Linspace {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

/// A grid given either as explicit values or as `{start, stop, points}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Values(Vec<f64>),
    Range(Linspace),
}

impl GridSpec {
    pub fn linspace(start: f64, stop: f64, points: usize) -> Self {
        GridSpec::Range(Linspace { start, stop, points })
    }

    pub fn len(&self) -> usize {
        match self {
            GridSpec::Values(v) => v.len(),
            GridSpec::Range(r) => r.points,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn resolve(&self, name: &str) -> Result<Vec<f64>> {
        check_points(name, self.len())?;
        let grid = match self {
            GridSpec::Values(v) => v.clone(),
            GridSpec::Range(r) => linspace(r.start, r.stop, r.points),
        };
        crate::spectrum::check_grid(name, &grid)?;
        Ok(grid)
    }
}

/// Upper bound on the number of points in any one grid.
pub const MAX_GRID_POINTS: usize = 1 << 20;

fn check_points(name: &str, n: usize) -> Result<()> {
    if n > MAX_GRID_POINTS {
        return Err(Error::config(name, format!("{n} points exceeds the limit of {MAX_GRID_POINTS}")));
    }
    Ok(())
}

/// `points` values from `start` to `stop` inclusive; each value is computed
/// directly from its index so grids do not accumulate rounding.
pub fn linspace(start: f64, stop: f64, points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![start],
        n => (0..n)
            .map(|k| {
                if k == n - 1 {
                    stop
                } else {
                    start + (stop - start) * k as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Grids {
    pub omega_s: GridSpec,
    #[serde(rename = "omega_L")]
    pub omega_l: GridSpec,
}

impl Default for Grids {
    fn default() -> Self {
        Self {
            omega_s: GridSpec::linspace(0.2, 2.2, 220),
            omega_l: GridSpec::linspace(0.9, 1.6, 71),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RamanOptions {
    pub n_states: usize,
}

impl Default for RamanOptions {
    fn default() -> Self {
        Self { n_states: 12 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Query {
    #[serde(rename = "omega_L")]
    pub omega_l: f64,
    pub omega_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifyOptions {
    pub queries: Vec<Query>,
    /// Matching tolerance; defaults to `3Γ`.
    pub tol: Option<f64>,
    pub n_states: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            queries: Vec::new(),
            tol: None,
            n_states: 12,
        }
    }
}

/// Detection window `center ± half_width` replacing the `ω_s` grid span.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Zoom {
    pub center: f64,
    pub half_width: f64,
}

impl Zoom {
    fn check(self) -> Result<Self> {
        if !self.center.is_finite() || !self.half_width.is_finite() {
            return Err(Error::config("zoom", "center and half width must be finite"));
        }
        if self.half_width <= 0.0 {
            return Err(Error::config("zoom", "half width must be positive"));
        }
        if self.center - self.half_width <= 0.0 {
            return Err(Error::config("zoom", "window must stay at positive frequencies"));
        }
        Ok(self)
    }
}

impl FromStr for Zoom {
    type Err = Error;

    /// Parses `"center,halfwidth"`.
    fn from_str(s: &str) -> Result<Self> {
        let (c, w) = s
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("zoom `{s}` is not of the form center,halfwidth")))?;
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("zoom component `{}`: {e}", t.trim())))
        };
        Zoom {
            center: num(c)?,
            half_width: num(w)?,
        }
        .check()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelParams,
    pub task: Option<Task>,
    pub grids: Grids,
    pub workers: usize,
    pub output_path: Option<String>,
    pub raman: RamanOptions,
    pub classify: ClassifyOptions,
    pub zoom: Option<Zoom>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelParams::default(),
            task: None,
            grids: Grids::default(),
            workers: 1,
            output_path: None,
            raman: RamanOptions::default(),
            classify: ClassifyOptions::default(),
            zoom: None,
        }
    }
}

impl RunConfig {
    /// Checks every invariant; returns warnings for legal but doubtful settings.
    pub fn validate(&self) -> Result<Vec<String>> {
        let warnings = self.model.validate()?;
        if self.workers == 0 {
            return Err(Error::config("workers", "must be at least 1"));
        }
        if let Some(z) = self.zoom {
            z.check()?;
        }
        self.omega_s_grid()?;
        self.grids.omega_l.resolve("grids.omega_L")?;
        if self.raman.n_states < 2 {
            return Err(Error::config("raman.n_states", "must be at least 2"));
        }
        if self.classify.n_states < 2 {
            return Err(Error::config("classify.n_states", "must be at least 2"));
        }
        if let Some(t) = self.classify.tol {
            if !(t > 0.0) || !t.is_finite() {
                return Err(Error::config("classify.tol", "must be positive and finite"));
            }
        }
        for q in &self.classify.queries {
            if !q.omega_l.is_finite() || !q.omega_s.is_finite() {
                return Err(Error::config("classify.queries", "frequencies must be finite"));
            }
        }
        Ok(warnings)
    }

    /// The detection grid, with the zoom window applied when set.
    pub fn omega_s_grid(&self) -> Result<Vec<f64>> {
        match self.zoom {
            Some(z) => {
                let n = self.grids.omega_s.len().max(2);
                check_points("zoom", n)?;
                let grid = linspace(z.center - z.half_width, z.center + z.half_width, n);
                crate::spectrum::check_grid("zoom", &grid)?;
                Ok(grid)
            }
            None => self.grids.omega_s.resolve("grids.omega_s"),
        }
    }

    pub fn omega_l_grid(&self) -> Result<Vec<f64>> {
        self.grids.omega_l.resolve("grids.omega_L")
    }

    pub fn classify_tol(&self) -> f64 {
        self.classify.tol.unwrap_or(3.0 * self.model.sensor_decay)
    }
}

/// Parses and validates a JSON configuration document.
pub fn parse_config(text: &str) -> Result<(RunConfig, Vec<String>)> {
    let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let warnings = cfg.validate()?;
    Ok((cfg, warnings))
}

pub fn load_config(path: &Path) -> Result<(RunConfig, Vec<String>)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config("config", format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Parses a JSON array of `{"omega_L": .., "omega_s": ..}` queries.
pub fn parse_queries(text: &str) -> Result<Vec<Query>> {
    let qs: Vec<Query> = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if qs.iter().any(|q| !q.omega_l.is_finite() || !q.omega_s.is_finite()) {
        return Err(Error::config("queries", "frequencies must be finite"));
    }
    Ok(qs)
}
