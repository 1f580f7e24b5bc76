//! Suite configuration: a line-oriented `key = value` file whose values are
//! JSON literals (numbers, strings, arrays, objects). `#` starts a comment.
//!
//! ```text
//! seed = 42
//! horizon = 1.0
//! steps = 1000
//! ensemble_size = 1000
//! generator_id = "sigma_g"
//! reset_times = [0.3, 0.7]
//! injection_times = [0.2, 0.6]
//! injection_sizes = [1.0, 1.0]
//! suites = ["classify", "characterize"]
//! tolerances = {"z_threshold": 4.0}
//! output_dir = "reports"
//! ```
//!
//! Unknown keys are rejected.

use crate::generators::{GeneratorKind, GeneratorSpec};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteKind {
    Classify,
    Characterize,
    Tanaka,
    Balayage,
    Product,
    Multdecomp,
    Recovery,
    Supremum,
}

impl SuiteKind {
    pub fn id(&self) -> &'static str {
        match self {
            SuiteKind::Classify => "classify",
            SuiteKind::Characterize => "characterize",
            SuiteKind::Tanaka => "tanaka",
            SuiteKind::Balayage => "balayage",
            SuiteKind::Product => "product",
            SuiteKind::Multdecomp => "multdecomp",
            SuiteKind::Recovery => "recovery",
            SuiteKind::Supremum => "supremum",
        }
    }

    pub fn from_id(s: &str) -> Result<Self> {
        Ok(match s {
            "classify" => SuiteKind::Classify,
            "characterize" => SuiteKind::Characterize,
            "tanaka" => SuiteKind::Tanaka,
            "balayage" => SuiteKind::Balayage,
            "product" => SuiteKind::Product,
            "multdecomp" => SuiteKind::Multdecomp,
            "recovery" => SuiteKind::Recovery,
            "supremum" => SuiteKind::Supremum,
            other => return Err(Error::Config(format!("unknown suite '{other}'"))),
        })
    }
}

/// Which characterization functional the characterize suite applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionalChoice {
    /// Match the generator: continuous-drift form for the continuous
    /// examples, post/left/mixed forms for the jump examples.
    Auto,
    SigmaNik,
    Sigma,
    SigmaR,
    SigmaG,
}

impl FunctionalChoice {
    pub fn from_id(s: &str) -> Result<Self> {
        Ok(match s {
            "auto" => FunctionalChoice::Auto,
            "sigma_nik" => FunctionalChoice::SigmaNik,
            "sigma" => FunctionalChoice::Sigma,
            "sigma_r" => FunctionalChoice::SigmaR,
            "sigma_g" => FunctionalChoice::SigmaG,
            other => return Err(Error::Config(format!("unknown functional '{other}'"))),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub horizon: f64,
    pub steps: usize,
    pub ensemble_size: usize,
    pub generator: GeneratorSpec,
    pub suites: Vec<SuiteKind>,
    pub functional: FunctionalChoice,
    pub test_functions: Vec<crate::characterize::TestFunctionId>,
    /// Zero-set tolerance for diagnostics; `None` selects 0 for the
    /// exact-zero generators and `2 sqrt(dt)` for the continuous ones.
    pub zero_tol: Option<f64>,
    pub z_threshold: f64,
    pub level_k: f64,
    pub n_outer: usize,
    pub n_inner: usize,
    pub output_dir: PathBuf,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            schema_version: SCHEMA_VERSION,
            seed: 42,
            horizon: 1.0,
            steps: 1000,
            ensemble_size: 1000,
            generator: GeneratorSpec::new(GeneratorKind::SigmaG),
            suites: Vec::new(),
            functional: FunctionalChoice::Auto,
            test_functions: vec![
                crate::characterize::TestFunctionId::Poly2,
                crate::characterize::TestFunctionId::Poly3,
                crate::characterize::TestFunctionId::Exp,
            ],
            zero_tol: None,
            z_threshold: 4.0,
            level_k: 2.0,
            n_outer: 200,
            n_inner: 2000,
            output_dir: PathBuf::from("reports"),
        }
    }
}

fn as_f64(key: &str, v: &Value) -> Result<f64> {
    v.as_f64()
        .ok_or_else(|| Error::Config(format!("{key}: expected a number, got {v}")))
}

fn as_usize(key: &str, v: &Value) -> Result<usize> {
    v.as_u64()
        .map(|u| u as usize)
        .ok_or_else(|| Error::Config(format!("{key}: expected a non-negative integer, got {v}")))
}

fn as_str<'v>(key: &str, v: &'v Value) -> Result<&'v str> {
    v.as_str()
        .ok_or_else(|| Error::Config(format!("{key}: expected a JSON string, got {v}")))
}

fn as_f64_array(key: &str, v: &Value) -> Result<Vec<f64>> {
    v.as_array()
        .ok_or_else(|| Error::Config(format!("{key}: expected an array, got {v}")))?
        .iter()
        .map(|x| as_f64(key, x))
        .collect()
}

impl SuiteConfig {
    pub fn parse_str(text: &str) -> Result<SuiteConfig> {
        let mut cfg = SuiteConfig::default();
        let mut seen: Vec<String> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value_text) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            let key = key.trim();
            let value: Value = serde_json::from_str(value_text.trim()).map_err(|e| {
                Error::Config(format!("line {}: bad JSON value for '{key}': {e}", lineno + 1))
            })?;
            if seen.iter().any(|k| k == key) {
                return Err(Error::Config(format!(
                    "line {}: duplicate key '{key}'",
                    lineno + 1
                )));
            }
            seen.push(key.to_string());
            cfg.apply(key, &value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn parse_file(path: &Path) -> Result<SuiteConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse_str(&text)
    }

    fn apply(&mut self, key: &str, v: &Value) -> Result<()> {
        match key {
            "schema_version" => {
                let ver = as_usize(key, v)? as u32;
                if ver != SCHEMA_VERSION {
                    return Err(Error::Config(format!(
                        "unsupported schema_version {ver} (this build understands {SCHEMA_VERSION})"
                    )));
                }
            }
            "seed" => {
                self.seed = v
                    .as_u64()
                    .ok_or_else(|| Error::Config(format!("seed: expected an integer, got {v}")))?
            }
            "horizon" => self.horizon = as_f64(key, v)?,
            "steps" => self.steps = as_usize(key, v)?,
            "ensemble_size" => self.ensemble_size = as_usize(key, v)?,
            "generator_id" => {
                self.generator.generator_id = GeneratorKind::from_id(as_str(key, v)?)
                    .map_err(|e| Error::Config(e.to_string()))?
            }
            "reset_times" => self.generator.reset_times = as_f64_array(key, v)?,
            "injection_times" => self.generator.injection_times = as_f64_array(key, v)?,
            "injection_sizes" => self.generator.injection_sizes = as_f64_array(key, v)?,
            "start_level" => self.generator.start_level = as_f64(key, v)?,
            "suites" => {
                let arr = v
                    .as_array()
                    .ok_or_else(|| Error::Config(format!("suites: expected an array, got {v}")))?;
                self.suites = arr
                    .iter()
                    .map(|x| SuiteKind::from_id(as_str("suites", x)?))
                    .collect::<Result<_>>()?;
            }
            "functional" => self.functional = FunctionalChoice::from_id(as_str(key, v)?)?,
            "test_functions" => {
                let arr = v.as_array().ok_or_else(|| {
                    Error::Config(format!("test_functions: expected an array, got {v}"))
                })?;
                self.test_functions = arr
                    .iter()
                    .map(|x| {
                        crate::characterize::TestFunctionId::from_id(as_str("test_functions", x)?)
                            .map_err(|e| Error::Config(e.to_string()))
                    })
                    .collect::<Result<_>>()?;
            }
            "tolerances" => {
                let obj = v.as_object().ok_or_else(|| {
                    Error::Config(format!("tolerances: expected an object, got {v}"))
                })?;
                for (tk, tv) in obj {
                    match tk.as_str() {
                        "zero_tol" => self.zero_tol = Some(as_f64("tolerances.zero_tol", tv)?),
                        "z_threshold" => {
                            self.z_threshold = as_f64("tolerances.z_threshold", tv)?
                        }
                        other => {
                            return Err(Error::Config(format!(
                                "unknown tolerance override '{other}'"
                            )))
                        }
                    }
                }
            }
            "level_k" => self.level_k = as_f64(key, v)?,
            "n_outer" => self.n_outer = as_usize(key, v)?,
            "n_inner" => self.n_inner = as_usize(key, v)?,
            "output_dir" => self.output_dir = PathBuf::from(as_str(key, v)?),
            other => {
                return Err(Error::Config(format!(
                    "unknown key '{other}' (see the config format section of the README)"
                )))
            }
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        if !self.horizon.is_finite() || self.horizon <= 0.0 {
            return Err(Error::Config(format!("horizon must be positive, got {}", self.horizon)));
        }
        if self.steps < 1 {
            return Err(Error::Config("steps must be at least 1".into()));
        }
        if self.ensemble_size < 1 {
            return Err(Error::Config("ensemble_size must be at least 1".into()));
        }
        if let Some(tol) = self.zero_tol {
            if tol.is_nan() || tol < 0.0 {
                return Err(Error::Config(format!("zero_tol must be >= 0, got {tol}")));
            }
        }
        if self.z_threshold.is_nan() || self.z_threshold <= 0.0 {
            return Err(Error::Config(format!(
                "z_threshold must be positive, got {}",
                self.z_threshold
            )));
        }
        if self.n_outer < 1 || self.n_inner < 1 {
            return Err(Error::Config("n_outer and n_inner must be at least 1".into()));
        }
        Ok(())
    }

    /// Effective zero-set tolerance: explicit override, else 0 for the
    /// exact-zero generators and `2 sqrt(dt)` for the continuous ones.
    pub fn effective_zero_tol(&self) -> f64 {
        if let Some(t) = self.zero_tol {
            return t;
        }
        match self.generator.generator_id {
            GeneratorKind::AbsBm | GeneratorKind::Drawdown => {
                2.0 * (self.horizon / self.steps as f64).sqrt()
            }
            _ => 0.0,
        }
    }
}
