//! Run configuration: flat `key = value` files plus `--set` overrides.

use std::fs;
use std::path::{Path, PathBuf};

use mif_core::{Boundary, ConvolutionStrategy, FilterKind, FpParams, MifConfig, StopCriteria, SupportRule};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterChoice {
    FokkerPlanck,
    DoubleAverage,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub fp: FpParams,
    pub filter: FilterChoice,
    pub support: SupportRule,
    pub stop: StopCriteria,
    pub boundary: Boundary,
    pub convolution: ConvolutionStrategy,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub ace_ridge: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            fp: FpParams::default(),
            filter: FilterChoice::FokkerPlanck,
            support: SupportRule::default(),
            stop: StopCriteria::default(),
            boundary: Boundary::Symmetric,
            convolution: ConvolutionStrategy::Auto,
            seed: 7,
            output_dir: PathBuf::from("."),
            ace_ridge: 1e-6,
        }
    }
}

pub const KEYS: &[&str] = &[
    "fp.alpha",
    "fp.beta",
    "fp.grid_points",
    "filter.kind",
    "support.xi",
    "support.spherical",
    "stop.inner_delta",
    "stop.max_inner_iters",
    "stop.max_imfs",
    "boundary",
    "convolution",
    "seed",
    "output.dir",
    "ace.ridge",
];

fn invalid(key: &str, value: &str, expected: &str) -> CliError {
    CliError::Config(format!("{key} = {value:?}: expected {expected}"))
}

fn number<T: std::str::FromStr>(key: &str, value: &str, expected: &str) -> Result<T, CliError> {
    value.parse().map_err(|_| invalid(key, value, expected))
}

impl RunConfig {
    /// Defaults, then the file (if any), then overrides in order.
    pub fn load(file: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut config = RunConfig::default();
        if let Some(path) = file {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
            config.apply_text(&text, &path.display().to_string())?;
        }
        for item in overrides {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("--set expects key=value, got {item:?}")))?;
            config.set(key.trim(), value.trim())?;
        }
        config.validate()?;
        Ok(config)
    }

    /// Blank lines and lines starting with `#` are ignored.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), CliError> {
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("{origin}:{}: expected key = value", n + 1)))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| CliError::Config(format!("{origin}:{}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "fp.alpha" => self.fp.alpha = number(key, value, "a positive number")?,
            "fp.beta" => self.fp.beta = number(key, value, "a positive number")?,
            "fp.grid_points" => self.fp.grid_points = number(key, value, "an odd integer >= 33")?,
            "filter.kind" => {
                self.filter = match value {
                    "fp" => FilterChoice::FokkerPlanck,
                    "double-average" => FilterChoice::DoubleAverage,
                    _ => return Err(invalid(key, value, "fp or double-average")),
                }
            }
            "support.xi" => self.support.xi = number(key, value, "a positive number")?,
            "support.spherical" => self.support.spherical = number(key, value, "true or false")?,
            "stop.inner_delta" => self.stop.inner_delta = number(key, value, "a number in (0, 1)")?,
            "stop.max_inner_iters" => self.stop.max_inner_iters = number(key, value, "a positive integer")?,
            "stop.max_imfs" => self.stop.max_imfs = number(key, value, "a positive integer")?,
            "boundary" => {
                self.boundary = match value {
                    "symmetric" => Boundary::Symmetric,
                    "periodic" => Boundary::Periodic,
                    _ => return Err(invalid(key, value, "symmetric or periodic")),
                }
            }
            "convolution" => {
                self.convolution = match value {
                    "auto" => ConvolutionStrategy::Auto,
                    "direct" => ConvolutionStrategy::Direct,
                    "spectral" => ConvolutionStrategy::Spectral,
                    _ => return Err(invalid(key, value, "auto, direct or spectral")),
                }
            }
            "seed" => self.seed = number(key, value, "an unsigned integer")?,
            "output.dir" => self.output_dir = PathBuf::from(value),
            "ace.ridge" => self.ace_ridge = number(key, value, "a nonnegative number")?,
            _ => {
                return Err(CliError::Config(format!(
                    "unknown key {key:?}; known keys: {}",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(CliError::Config(format!("{name} must be positive, got {v}")))
            }
        };
        positive("fp.alpha", self.fp.alpha)?;
        positive("fp.beta", self.fp.beta)?;
        positive("support.xi", self.support.xi)?;
        if self.fp.grid_points < 33 || self.fp.grid_points % 2 == 0 {
            return Err(CliError::Config(format!(
                "fp.grid_points must be odd and >= 33, got {}",
                self.fp.grid_points
            )));
        }
        if !(self.ace_ridge.is_finite() && self.ace_ridge >= 0.0) {
            return Err(CliError::Config(format!("ace.ridge must be nonnegative, got {}", self.ace_ridge)));
        }
        self.stop.validate().map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn mif_config(&self) -> MifConfig {
        MifConfig {
            filter: match self.filter {
                FilterChoice::FokkerPlanck => FilterKind::FokkerPlanck(self.fp),
                FilterChoice::DoubleAverage => FilterKind::DoubleAverage,
            },
            support: self.support,
            stop: self.stop,
            boundary: self.boundary,
            strategy: self.convolution,
        }
    }
}
