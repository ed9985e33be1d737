//! Match and affinity functions over variable-length token lists and
//! fixed-length numeric vectors.
//!
//! Affinity is the number of matching elements divided by the length of the
//! shorter vector, so it always lies in [0,1] and is symmetric. Token lists
//! match as multisets; numeric vectors match per attribute when the two values
//! lie within `tau` of each other.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{FeatureVector, VectorKind};
use crate::detectors::Detector;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MatchMode {
    TokenOverlap,
    AttributeInterval,
}

impl MatchMode {
    pub fn vector_kind(self) -> VectorKind {
        match self {
            MatchMode::TokenOverlap => VectorKind::Tokens,
            MatchMode::AttributeInterval => VectorKind::Numeric,
        }
    }
}

/// Matching parameters shared by every detector of a set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchRule {
    pub mode: MatchMode,
    /// Affinity threshold; a detector matches when affinity is strictly greater.
    pub theta: f64,
    /// Per-attribute tolerance in normalized units (numeric mode only).
    pub tau: f64,
    /// Minimum center distance between two detectors of one set.
    pub min_separation: f64,
}

impl MatchRule {
    pub fn new(mode: MatchMode, theta: f64, tau: f64, min_separation: f64) -> Result<MatchRule> {
        let rule = MatchRule {
            mode,
            theta,
            tau,
            min_separation,
        };
        rule.validate()?;
        Ok(rule)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::InvalidRule(format!(
                "theta {} outside [0,1]",
                self.theta
            )));
        }
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidRule(format!("tau {} must be >= 0", self.tau)));
        }
        if !(self.min_separation >= 0.0 && self.min_separation.is_finite()) {
            return Err(Error::InvalidRule(format!(
                "min_separation {} must be >= 0",
                self.min_separation
            )));
        }
        Ok(())
    }
}

/// One `(x, y, affinity)` triple.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffinityRecord {
    pub x_id: String,
    pub y_id: String,
    pub affinity: f64,
}

fn check_mode(rule: &MatchRule, v: &FeatureVector) -> Result<()> {
    let expected = rule.mode.vector_kind();
    if v.kind() != expected {
        return Err(Error::VariantMismatch {
            left: expected,
            right: v.kind(),
        });
    }
    Ok(())
}

/// Size of the multiset intersection of two token lists.
fn token_matches(x: &[String], y: &[String]) -> usize {
    let (small, large) = if x.len() <= y.len() { (x, y) } else { (y, x) };
    let mut counts: HashMap<&str, usize> = HashMap::with_capacity(small.len());
    for t in small {
        *counts.entry(t.as_str()).or_default() += 1;
    }
    let mut matches = 0;
    for t in large {
        if let Some(c) = counts.get_mut(t.as_str()) {
            if *c > 0 {
                *c -= 1;
                matches += 1;
            }
        }
    }
    matches
}

fn token_affinity(x: &[String], y: &[String]) -> Result<f64> {
    let shortest = x.len().min(y.len());
    if shortest == 0 {
        return Err(Error::EmptyVector);
    }
    Ok(token_matches(x, y) as f64 / shortest as f64)
}

fn interval_affinity(x: &[f64], y: &[f64], tau: f64) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptyVector);
    }
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let matches = x
        .iter()
        .zip(y)
        .filter(|(a, b)| (*a - *b).abs() <= tau)
        .count();
    Ok(matches as f64 / x.len() as f64)
}

pub fn affinity(x: &FeatureVector, y: &FeatureVector, rule: &MatchRule) -> Result<f64> {
    check_mode(rule, x)?;
    check_mode(rule, y)?;
    match (x, y) {
        (FeatureVector::Tokens(a), FeatureVector::Tokens(b)) => token_affinity(a, b),
        (FeatureVector::Numeric(a), FeatureVector::Numeric(b)) => interval_affinity(a, b, rule.tau),
        _ => unreachable!("both vectors checked against the rule's mode"),
    }
}

/// True when the affinity between the detector's center and `v` is strictly
/// above the detector's threshold (its own radius if set, else `rule.theta`).
pub fn detector_matches(d: &Detector, v: &FeatureVector, rule: &MatchRule) -> Result<bool> {
    Ok(affinity(&d.center, v, rule)? > d.effective_threshold(rule))
}

/// Distance between two centers in [0,1]: one minus token affinity for token
/// lists, Euclidean distance scaled by `1/sqrt(dimension)` for numeric vectors.
pub fn center_distance(a: &FeatureVector, b: &FeatureVector) -> Result<f64> {
    match (a, b) {
        (FeatureVector::Tokens(x), FeatureVector::Tokens(y)) => Ok(1.0 - token_affinity(x, y)?),
        (FeatureVector::Numeric(x), FeatureVector::Numeric(y)) => {
            if x.is_empty() || y.is_empty() {
                return Err(Error::EmptyVector);
            }
            if x.len() != y.len() {
                return Err(Error::LengthMismatch {
                    left: x.len(),
                    right: y.len(),
                });
            }
            let sq: f64 = x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum();
            Ok((sq / x.len() as f64).sqrt())
        }
        _ => Err(Error::VariantMismatch {
            left: a.kind(),
            right: b.kind(),
        }),
    }
}
