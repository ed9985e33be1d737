//! Run configuration, read from flat `key=value` files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::affinity::{MatchMode, MatchRule};
use crate::detectors::GenerationParams;
use crate::error::{Error, Result};

/// Default threshold for token lists.
pub const DEFAULT_TOKEN_THETA: f64 = 0.5;

/// Default threshold for numeric vectors. Normalized Spambase rows share most
/// of their near-zero attributes, so a numeric detector has to agree on at
/// least 55 of 57 attributes before it says anything useful.
pub const DEFAULT_NUMERIC_THETA: f64 = 0.95;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub mode: MatchMode,
    /// Unset means the per-mode default.
    pub theta: Option<f64>,
    pub tau: f64,
    /// Unset means `theta`.
    pub cross_theta: Option<f64>,
    pub min_separation: f64,
    pub target_count: usize,
    pub max_attempts: usize,
    pub split_ratio: f64,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            mode: MatchMode::AttributeInterval,
            theta: None,
            tau: 0.1,
            cross_theta: None,
            min_separation: 0.05,
            target_count: 100,
            max_attempts: 5000,
            split_ratio: 0.6,
            seed: 1,
        }
    }
}

fn parse_mode(value: &str) -> Option<MatchMode> {
    match value.to_ascii_lowercase().as_str() {
        "tokenoverlap" | "token" | "tokens" => Some(MatchMode::TokenOverlap),
        "attributeinterval" | "numeric" => Some(MatchMode::AttributeInterval),
        _ => None,
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("line {line}: bad value `{value}` for {key}")))
}

impl Config {
    pub fn theta(&self) -> f64 {
        self.theta.unwrap_or(match self.mode {
            MatchMode::TokenOverlap => DEFAULT_TOKEN_THETA,
            MatchMode::AttributeInterval => DEFAULT_NUMERIC_THETA,
        })
    }

    pub fn cross_theta(&self) -> f64 {
        self.cross_theta.unwrap_or_else(|| self.theta())
    }

    /// Copy with every defaulted field filled in.
    pub fn resolved(&self) -> Config {
        Config {
            theta: Some(self.theta()),
            cross_theta: Some(self.cross_theta()),
            ..self.clone()
        }
    }

    pub fn with_mode(mut self, mode: MatchMode) -> Config {
        self.mode = mode;
        self
    }

    pub fn rule(&self) -> Result<MatchRule> {
        MatchRule::new(self.mode, self.theta(), self.tau, self.min_separation)
    }

    pub fn generation(&self, seed: u64) -> GenerationParams {
        GenerationParams {
            target_count: self.target_count,
            max_attempts: self.max_attempts,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.rule()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        let cross = self.cross_theta();
        if !(0.0..=1.0).contains(&cross) {
            return Err(Error::InvalidConfig(format!(
                "cross_theta {cross} outside [0,1]"
            )));
        }
        if self.target_count == 0 {
            return Err(Error::InvalidConfig("target_count must be >= 1".into()));
        }
        if self.max_attempts < self.target_count {
            return Err(Error::InvalidConfig(format!(
                "max_attempts {} is below target_count {}",
                self.max_attempts, self.target_count
            )));
        }
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "split_ratio {} must lie strictly between 0 and 1",
                self.split_ratio
            )));
        }
        Ok(())
    }

    /// Parses `key=value` lines over the defaults. Blank lines and `#`
    /// comments are ignored; unknown keys are an error.
    pub fn parse(text: &str) -> Result<Config> {
        let mut config = Config::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("line {line_no}: expected key=value"))
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "mode" => {
                    config.mode = parse_mode(value).ok_or_else(|| {
                        Error::InvalidConfig(format!("line {line_no}: unknown mode `{value}`"))
                    })?
                }
                "theta" => config.theta = Some(parse_value(key, value, line_no)?),
                "tau" => config.tau = parse_value(key, value, line_no)?,
                "cross_theta" => config.cross_theta = Some(parse_value(key, value, line_no)?),
                "min_separation" => config.min_separation = parse_value(key, value, line_no)?,
                "target_count" => config.target_count = parse_value(key, value, line_no)?,
                "max_attempts" => config.max_attempts = parse_value(key, value, line_no)?,
                "split_ratio" => config.split_ratio = parse_value(key, value, line_no)?,
                "seed" => config.seed = parse_value(key, value, line_no)?,
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "line {line_no}: unknown key `{other}`"
                    )))
                }
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Config> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Config::parse(&text)
    }

    /// Renders the resolved config in the same `key=value` form `parse` reads.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let mode = match self.mode {
            MatchMode::TokenOverlap => "TokenOverlap",
            MatchMode::AttributeInterval => "AttributeInterval",
        };
        let _ = writeln!(out, "mode={mode}");
        let _ = writeln!(out, "theta={}", self.theta());
        let _ = writeln!(out, "tau={}", self.tau);
        let _ = writeln!(out, "cross_theta={}", self.cross_theta());
        let _ = writeln!(out, "min_separation={}", self.min_separation);
        let _ = writeln!(out, "target_count={}", self.target_count);
        let _ = writeln!(out, "max_attempts={}", self.max_attempts);
        let _ = writeln!(out, "split_ratio={}", self.split_ratio);
        let _ = writeln!(out, "seed={}", self.seed);
        out
    }
}
