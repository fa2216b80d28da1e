//! JSON run configuration: one flat `params` object plus a section per
//! command. Every section is optional.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::model::ModelParams;
use crate::normalform::FormulaVariant;
use crate::simulate::Quadrature;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub params: ModelParams,
    pub equilibrium: EquilibriumOptions,
    pub stability: StabilityOptions,
    pub normalform: NormalFormOptions,
    pub simulate: SimulateOptions,
    pub scan: ScanOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EquilibriumOptions {
    pub tolerance: f64,
}

impl Default for EquilibriumOptions {
    fn default() -> Self {
        EquilibriumOptions { tolerance: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StabilityOptions {
    pub grid_size: usize,
}

impl Default for StabilityOptions {
    fn default() -> Self {
        StabilityOptions { grid_size: 4000 }
    }
}

/// A frequency/delay pair supplied by hand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GivenPair {
    pub omega: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormalFormOptions {
    pub variant: FormulaVariant,
    /// Evaluate at this pair instead of the smallest certified Hopf point.
    /// The pair is not certified.
    pub evaluate_at: Option<GivenPair>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateOptions {
    pub dt: f64,
    pub t_end: f64,
    /// Relative offset applied to `y1` and its constant history.
    pub perturbation: f64,
    /// Absolute delay, replacing `params.tau`.
    pub tau: Option<f64>,
    /// Delay as a multiple of the smallest certified `τ₀`; wins over `tau`.
    pub tau_factor: Option<f64>,
    pub decimation: usize,
    pub quadrature: Quadrature,
    /// Overlay the center-manifold waveform started at `|z(0)| = overlay_z0`.
    pub overlay_waveform: bool,
    pub overlay_z0: f64,
}

impl Default for SimulateOptions {
    fn default() -> Self {
        SimulateOptions {
            dt: 1e-3,
            t_end: 500.0,
            perturbation: 0.01,
            tau: None,
            tau_factor: None,
            decimation: 10,
            quadrature: Quadrature::default(),
            overlay_waveform: false,
            overlay_z0: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TauRange {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
    /// Interpret `lo` and `hi` as multiples of the smallest certified `τ₀`.
    #[serde(default)]
    pub relative_to_tau0: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanOptions {
    pub tau_range: TauRange,
    pub dt: f64,
    pub t_end: f64,
    pub perturbation: f64,
    pub quadrature: Quadrature,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            tau_range: TauRange { lo: 0.2, hi: 2.0, steps: 40, relative_to_tau0: true },
            dt: 1e-3,
            t_end: 500.0,
            perturbation: 0.01,
            quadrature: Quadrature::default(),
        }
    }
}

impl TauRange {
    /// Evenly spaced delays from `lo` to `hi`; a single step gives `lo`.
    pub fn points(&self, scale: f64) -> Vec<f64> {
        let (lo, hi) = (self.lo * scale, self.hi * scale);
        if self.steps <= 1 {
            return vec![lo];
        }
        let h = (hi - lo) / (self.steps - 1) as f64;
        (0..self.steps).map(|k| lo + k as f64 * h).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Line of the first occurrence of `"key"` in the raw text, 1-based.
fn line_of_key(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&needle)).map(|i| i + 1)
}

fn field_error(text: &str, section: &str, field: &str, reason: &str) -> ConfigError {
    match line_of_key(text, field) {
        Some(line) => ConfigError(format!("line {line}: `{section}.{field}` {reason}")),
        None => ConfigError(format!("`{section}.{field}` {reason}")),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let (line, column) = (inner.line(), inner.column());
            let text = inner.to_string();
            let reason = text.rsplit_once(" at line ").map_or(text.as_str(), |(r, _)| r);
            match (path.as_str(), line) {
                (_, 0) => ConfigError(format!("invalid config: {reason}")),
                (".", _) => ConfigError(format!("line {line}, column {column}: {reason}")),
                (path, _) => ConfigError(format!("line {line}, column {column}: `{path}` {reason}")),
            }
        })?;
        cfg.validate(text)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        RunConfig::parse(&text)
    }

    fn validate(&self, text: &str) -> Result<(), ConfigError> {
        if let Err(Error::InvalidParameter { field, reason }) = self.params.validate() {
            return Err(field_error(text, "params", field, &reason));
        }
        let tol = self.equilibrium.tolerance;
        if !(1e-14..=1e-6).contains(&tol) {
            return Err(field_error(text, "equilibrium", "tolerance", &format!("must lie in [1e-14, 1e-6], got {tol}")));
        }
        if self.stability.grid_size < 100 {
            return Err(field_error(text, "stability", "grid_size", "must be >= 100"));
        }
        if let Some(g) = self.normalform.evaluate_at {
            if !(g.omega > 0.0 && g.tau > 0.0) {
                return Err(field_error(text, "normalform", "evaluate_at", "needs omega > 0 and tau > 0"));
            }
        }
        let s = &self.simulate;
        let positive = [("dt", s.dt), ("t_end", s.t_end)];
        for (k, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(field_error(text, "simulate", k, &format!("must be > 0, got {v}")));
            }
        }
        if !(s.perturbation > -1.0 && s.perturbation.is_finite()) {
            return Err(field_error(text, "simulate", "perturbation", "must be > -1"));
        }
        if let Some(t) = s.tau {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(field_error(text, "simulate", "tau", "must be >= 0"));
            }
        }
        if let Some(f) = s.tau_factor {
            if !(f >= 0.0 && f.is_finite()) {
                return Err(field_error(text, "simulate", "tau_factor", "must be >= 0"));
            }
        }
        if s.decimation == 0 {
            return Err(field_error(text, "simulate", "decimation", "must be >= 1"));
        }
        if s.quadrature.subdivisions == 0 || self.scan.quadrature.subdivisions == 0 {
            return Err(field_error(text, "quadrature", "subdivisions", "must be >= 1"));
        }
        let sc = &self.scan;
        let r = sc.tau_range;
        if !(r.lo >= 0.0 && r.hi >= r.lo && r.steps >= 1) {
            return Err(field_error(text, "scan", "tau_range", "needs 0 <= lo <= hi and steps >= 1"));
        }
        for (k, v) in [("dt", sc.dt), ("t_end", sc.t_end)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(field_error(text, "scan", k, &format!("must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}
