//! JSON experiment configuration.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{wavelength, ElementKind, Vec3, DEFAULT_MAX_ELEMENTS};
use crate::metrics::{LinkBudget, DEFAULT_QUAD_TOL};
use crate::precision::Precision;
use crate::precoding::Scheme;

/// Element spacing, either absolute or relative to the wavelength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpacingRepr", into = "SpacingRepr")]
pub enum Spacing {
    Meters(f64),
    Wavelengths(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SpacingRepr {
    Number(f64),
    Text(String),
}

impl Spacing {
    pub fn meters(&self, lambda: f64) -> f64 {
        match *self {
            Spacing::Meters(m) => m,
            Spacing::Wavelengths(w) => w * lambda,
        }
    }

    fn value(&self) -> f64 {
        match *self {
            Spacing::Meters(v) | Spacing::Wavelengths(v) => v,
        }
    }
}

impl FromStr for Spacing {
    type Err = Error;

    /// `"0.3 λ"`, `"0.3λ"`, `"0.3 lambda"`, `"0.05 m"` or a bare number of metres.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let (num, ctor): (&str, fn(f64) -> Spacing) = if let Some(v) = t.strip_suffix('λ') {
            (v, Spacing::Wavelengths)
        } else if let Some(v) = t.strip_suffix("lambda") {
            (v, Spacing::Wavelengths)
        } else if let Some(v) = t.strip_suffix('m') {
            (v, Spacing::Meters)
        } else {
            (t, Spacing::Meters)
        };
        let v: f64 = num
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("cannot read spacing {s:?}")))?;
        let sp = ctor(v);
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Config(format!("spacing must be positive, got {s:?}")));
        }
        Ok(sp)
    }
}

impl TryFrom<SpacingRepr> for Spacing {
    type Error = Error;
    fn try_from(r: SpacingRepr) -> Result<Self> {
        match r {
            SpacingRepr::Number(v) if v > 0.0 && v.is_finite() => Ok(Spacing::Meters(v)),
            SpacingRepr::Number(v) => Err(Error::Config(format!("spacing must be positive, got {v}"))),
            SpacingRepr::Text(s) => s.parse(),
        }
    }
}

impl From<Spacing> for SpacingRepr {
    fn from(s: Spacing) -> Self {
        match s {
            Spacing::Meters(m) => SpacingRepr::Number(m),
            Spacing::Wavelengths(_) => SpacingRepr::Text(s.to_string()),
        }
    }
}

impl fmt::Display for Spacing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Spacing::Meters(m) => write!(f, "{m} m"),
            Spacing::Wavelengths(w) => write!(f, "{w} λ"),
        }
    }
}

fn default_frequency() -> f64 {
    2.6e9
}
fn default_panel() -> f64 {
    0.5
}
fn default_kinds() -> Vec<ElementKind> {
    vec![ElementKind::Isotropic, ElementKind::Planar]
}
fn default_linear_elements() -> usize {
    20
}
fn default_ue() -> [f64; 3] {
    [10.0, 0.0, 0.0]
}
fn default_schemes() -> Vec<Scheme> {
    vec![Scheme::NcaMf, Scheme::CaMf, Scheme::CaPmf]
}
fn default_threshold() -> f64 {
    1e-9
}
fn default_max_elements() -> usize {
    DEFAULT_MAX_ELEMENTS
}
fn default_hp_max_elements() -> usize {
    2000
}
fn default_quad_tol() -> f64 {
    DEFAULT_QUAD_TOL
}
fn yes() -> bool {
    true
}

/// Everything an experiment run needs. Every field has a default, so `{}`
/// is a valid config; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Carrier frequency in Hz.
    #[serde(default = "default_frequency")]
    pub frequency: f64,
    /// Panel extent along y, metres.
    #[serde(default = "default_panel")]
    pub panel_width: f64,
    /// Panel extent along z, metres.
    #[serde(default = "default_panel")]
    pub panel_height: f64,
    #[serde(default = "default_kinds")]
    pub element_kinds: Vec<ElementKind>,
    /// Spacing grid; each experiment has its own default when absent.
    #[serde(default)]
    pub spacings: Option<Vec<Spacing>>,
    /// Element count of the linear array used by the conditioning, profile
    /// and truncation experiments.
    #[serde(default = "default_linear_elements")]
    pub linear_elements: usize,
    /// User position in metres.
    #[serde(default = "default_ue")]
    pub ue_position: [f64; 3],
    #[serde(default = "default_schemes")]
    pub schemes: Vec<Scheme>,
    /// Eigenvalue threshold of CA-pMF (modes strictly above it are kept).
    #[serde(default = "default_threshold")]
    pub svd_threshold: f64,
    #[serde(default)]
    pub precision: Precision,
    #[serde(default)]
    pub link_budget: LinkBudget,
    /// CSV destination; the command line may override it.
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default = "default_max_elements")]
    pub max_elements: usize,
    /// Largest array evaluated by the extended-precision scheme.
    #[serde(default = "default_hp_max_elements")]
    pub hp_max_elements: usize,
    /// Integrate the continuous-aperture reference over twice the panel.
    #[serde(default)]
    pub paper_literal_limits: bool,
    #[serde(default = "default_quad_tol")]
    pub quad_tol: f64,
    /// Emit the wall-time column; switch off for byte-stable output.
    #[serde(default = "yes")]
    pub wall_time: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config is valid")
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        positive("frequency", self.frequency)?;
        positive("panel_width", self.panel_width)?;
        positive("panel_height", self.panel_height)?;
        positive("quad_tol", self.quad_tol)?;
        if !(self.svd_threshold >= 0.0 && self.svd_threshold.is_finite()) {
            return Err(Error::Config(format!(
                "svd_threshold must be non-negative, got {}",
                self.svd_threshold
            )));
        }
        if self.element_kinds.is_empty() {
            return Err(Error::Config("element_kinds must not be empty".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::Config("schemes must not be empty".into()));
        }
        if self.schemes.contains(&Scheme::HpCaMf) && !self.precision.is_extended() {
            return Err(Error::Config(
                "the HP-CA-MF scheme needs an extended precision such as \"ext:256\"".into(),
            ));
        }
        if self.linear_elements == 0 {
            return Err(Error::Config("linear_elements must be at least 1".into()));
        }
        if let Some(sp) = &self.spacings {
            if sp.is_empty() {
                return Err(Error::Config("spacings must not be empty when given".into()));
            }
            if let Some(s) = sp.iter().find(|s| !(s.value() > 0.0)) {
                return Err(Error::Config(format!("spacing must be positive, got {s}")));
            }
        }
        if !self.ue_position.iter().all(|v| v.is_finite()) {
            return Err(Error::Config("ue_position must be finite".into()));
        }
        self.link_budget
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        wavelength(self.frequency)
    }

    pub fn ue(&self) -> Vec3 {
        let [x, y, z] = self.ue_position;
        Vec3::new(x, y, z)
    }

    /// The configured spacings in metres, or `default_fractions` of λ.
    pub fn spacings_m(&self, default_fractions: &[f64]) -> Vec<f64> {
        let lambda = self.wavelength();
        match &self.spacings {
            Some(sp) => sp.iter().map(|s| s.meters(lambda)).collect(),
            None => default_fractions.iter().map(|f| f * lambda).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_takes_defaults() {
        let cfg = ExperimentConfig::from_json("{}").unwrap();
        assert_eq!(cfg.frequency, 2.6e9);
        assert_eq!(cfg.panel_width, 0.5);
        assert_eq!(cfg.linear_elements, 20);
        assert_eq!(cfg.ue(), Vec3::new(10.0, 0.0, 0.0));
        assert_eq!(cfg.svd_threshold, 1e-9);
        assert_eq!(cfg.precision, Precision::MachineDouble);
        assert_eq!(cfg, ExperimentConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ExperimentConfig::from_json(r#"{"frequncy": 1e9}"#).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn spacings_in_metres_and_wavelengths() {
        let cfg = ExperimentConfig::from_json(
            r#"{"frequency": 3e8, "spacings": [0.25, "0.5 λ", "0.3λ", "0.1 lambda", "0.02 m"]}"#,
        )
        .unwrap();
        let lambda = cfg.wavelength();
        assert!((lambda - 299_792_458.0 / 3e8).abs() < 1e-15);
        let m = cfg.spacings_m(&[]);
        let expected = [0.25, 0.5 * lambda, 0.3 * lambda, 0.1 * lambda, 0.02];
        for (a, b) in m.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(cfg.spacings_m(&[1.0]).len(), 5);
        let none = ExperimentConfig::default();
        assert_eq!(none.spacings_m(&[0.5, 0.25]).len(), 2);
    }

    #[test]
    fn bad_values_are_config_errors() {
        for text in [
            r#"{"spacings": ["-0.3 λ"]}"#,
            r#"{"spacings": [0]}"#,
            r#"{"spacings": ["fast"]}"#,
            r#"{"spacings": []}"#,
            r#"{"frequency": -1}"#,
            r#"{"schemes": []}"#,
            r#"{"schemes": ["HP-CA-MF"]}"#,
            r#"{"precision": "ext:32"}"#,
            r#"{"svd_threshold": -1e-9}"#,
            r#"{"link_budget": {"ptx": 0, "noise_var": 1}}"#,
            r#"{"element_kinds": ["dipole"]}"#,
        ] {
            let err = ExperimentConfig::from_json(text).unwrap_err();
            assert!(matches!(err, Error::Config(_)), "{text}: {err}");
        }
    }

    #[test]
    fn round_trips_through_json() {
        let cfg = ExperimentConfig::from_json(
            r#"{"spacings": ["0.25 λ", 0.01], "precision": "ext:128", "schemes": ["nCA-MF", "HP-CA-MF"]}"#,
        )
        .unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
    }
}
