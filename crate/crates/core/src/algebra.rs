//! Reliability arithmetic.
//!
//! A reliability is a real in `[-1, 1]`: `1` is maximal reliability and `-1`
//! maximal uncertainty. Dimensioned reliabilities carry one such scalar per
//! named dimension and are combined elementwise after filling missing
//! dimensions with a default value.
//!
//! Everything here is a pure function of its arguments.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Absolute tolerance for every floating comparison in the crate.
pub const TOLERANCE: f64 = 1e-9;

/// Dimension name used when a reliability is given as a single scalar.
pub const DEFAULT_DIMENSION: &str = "default";

/// A scalar reliability, always within `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Reliability(f64);

impl Reliability {
    pub const MAX: Reliability = Reliability(1.0);
    pub const MIN: Reliability = Reliability(-1.0);
    pub const ZERO: Reliability = Reliability(0.0);

    /// Clamps `x` into `[-1, 1]`. Non-finite input is rejected.
    pub fn new(x: f64) -> Result<Self> {
        clamp(x)
    }

    /// Clamps a value that is finite by construction.
    pub(crate) fn saturating(x: f64) -> Self {
        debug_assert!(x.is_finite(), "saturating called with {x}");
        Reliability(x.clamp(-1.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `(1 + r) / 2`: maps the reliability onto `[0, 1]`.
    pub fn confidence(self) -> f64 {
        (1.0 + self.0) / 2.0
    }

    /// `(1 - r) / 2`: the room left below maximal reliability, in `[0, 1]`.
    pub fn spread(self) -> f64 {
        (1.0 - self.0) / 2.0
    }
}

impl fmt::Display for Reliability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// Clamps a finite real into `[-1, 1]`.
pub fn clamp(x: f64) -> Result<Reliability> {
    if !x.is_finite() {
        return Err(Error::InvalidNumeric(x));
    }
    Ok(Reliability(x.clamp(-1.0, 1.0)))
}

/// A reliability per named dimension. The empty map is a clean slate.
///
/// Dimension names are case-sensitive opaque tokens; iteration order is the
/// lexicographic order of the names.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DimensionedReliability {
    entries: BTreeMap<String, Reliability>,
}

impl DimensionedReliability {
    pub fn new() -> Self {
        Self::default()
    }

    /// Scalar mode: a single [`DEFAULT_DIMENSION`] entry.
    pub fn scalar(value: Reliability) -> Self {
        let mut entries = BTreeMap::new();
        entries.insert(DEFAULT_DIMENSION.to_string(), value);
        Self { entries }
    }

    pub fn from_entries<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = (S, Reliability)>,
        S: Into<String>,
    {
        Self {
            entries: entries.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }

    pub fn get(&self, dimension: &str) -> Option<Reliability> {
        self.entries.get(dimension).copied()
    }

    pub fn get_or(&self, dimension: &str, default: Reliability) -> Reliability {
        self.get(dimension).unwrap_or(default)
    }

    pub fn insert(&mut self, dimension: impl Into<String>, value: Reliability) {
        self.entries.insert(dimension.into(), value);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Reliability)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn dimensions(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn average(&self) -> Result<Reliability> {
        average(self)
    }
}

impl fmt::Display for DimensionedReliability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.len() == 1 {
            if let Some(r) = self.entries.get(DEFAULT_DIMENSION) {
                return write!(f, "{r}");
            }
        }
        let mut first = true;
        for (dim, r) in &self.entries {
            if !first {
                f.write_str(",")?;
            }
            first = false;
            write!(f, "{dim}:{r}")?;
        }
        Ok(())
    }
}

/// Non-negative weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidWeights(format!("weight {w} is negative or non-finite")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > TOLERANCE {
            return Err(Error::InvalidWeights(format!("weights sum to {sum}, expected 1")));
        }
        Ok(Self(weights))
    }

    /// Scales non-negative raw weights so they sum to one.
    /// Fails when every raw weight is zero.
    pub fn normalize(raw: &[f64]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(w) = raw.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidWeights(format!("weight {w} is negative or non-finite")));
        }
        let total: f64 = raw.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidWeights("all weights are zero".into()));
        }
        Ok(Self(raw.iter().map(|w| w / total).collect()))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
        });
    }
    Ok(())
}

/// AND: `alpha * min(r1, r2)`. Modus ponens uses the same rule.
pub fn and_combine(r1: Reliability, r2: Reliability, alpha: f64) -> Result<Reliability> {
    check_alpha(alpha)?;
    Ok(Reliability::saturating(alpha * r1.0.min(r2.0)))
}

/// OR: the lower bound `max(r1, r2)`.
pub fn or_combine(r1: Reliability, r2: Reliability) -> Reliability {
    Reliability(r1.0.max(r2.0))
}

/// `sum(weight_i * value_i)` for weights forming a [`WeightVector`].
pub fn weighted_mean(pairs: &[(f64, Reliability)]) -> Result<Reliability> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let weights = WeightVector::new(pairs.iter().map(|(w, _)| *w).collect())?;
    Ok(mean_with(&weights, pairs.iter().map(|(_, r)| *r)))
}

pub(crate) fn mean_with(
    weights: &WeightVector,
    values: impl Iterator<Item = Reliability>,
) -> Reliability {
    let sum: f64 = weights
        .as_slice()
        .iter()
        .zip(values)
        .map(|(w, r)| w * r.0)
        .sum();
    Reliability::saturating(sum)
}

/// Arithmetic mean over all dimensions.
pub fn average(rho: &DimensionedReliability) -> Result<Reliability> {
    if rho.is_empty() {
        return Err(Error::EmptyDimensions);
    }
    let sum: f64 = rho.entries.values().map(|r| r.0).sum();
    Ok(Reliability::saturating(sum / rho.len() as f64))
}

/// Weights favouring the reliability with the higher average.
///
/// The dominant side gets `d = 1/2 + 1/4 * |av(rho) - av(rho2)|`, the other
/// `1 - d`. The pair is returned in argument order: `(weight of rho, weight of
/// rho2)`, so the larger of the two is always `d`.
pub fn dominance_weights(
    rho: &DimensionedReliability,
    rho2: &DimensionedReliability,
) -> Result<(f64, f64)> {
    let a = average(rho)?.0;
    let b = average(rho2)?.0;
    if a >= b {
        let d = 0.5 + 0.25 * (a - b);
        Ok((d, 1.0 - d))
    } else {
        let d = 0.5 + 0.25 * (b - a);
        Ok((1.0 - d, d))
    }
}

/// Extends both reliabilities to the union of their dimensions, filling gaps
/// with `default`.
pub fn align_dimensions(
    rho: &DimensionedReliability,
    rho2: &DimensionedReliability,
    default: Reliability,
) -> (DimensionedReliability, DimensionedReliability) {
    let mut a = rho.clone();
    let mut b = rho2.clone();
    for dim in rho.dimensions() {
        b.entries.entry(dim.to_string()).or_insert(default);
    }
    for dim in rho2.dimensions() {
        a.entries.entry(dim.to_string()).or_insert(default);
    }
    (a, b)
}

/// Applies a binary scalar operation per dimension after aligning.
pub fn lift_elementwise<F>(
    op: F,
    rho: &DimensionedReliability,
    rho2: &DimensionedReliability,
    default: Reliability,
) -> Result<DimensionedReliability>
where
    F: Fn(Reliability, Reliability) -> Result<Reliability>,
{
    let (a, b) = align_dimensions(rho, rho2, default);
    let mut out = BTreeMap::new();
    for ((dim, x), y) in a.entries.into_iter().zip(b.entries.into_values()) {
        out.insert(dim, op(x, y)?);
    }
    Ok(DimensionedReliability { entries: out })
}
