//! Primitives on the probability simplex and the nonnegative orthant.
//!
//! Everything here is a pure function of its inputs. The `0 ln 0 = 0`
//! convention is used by every entropy and divergence.

use serde::{Deserialize, Serialize};

use crate::error::{check_unit_interval, Error, Result};

/// Slack accepted on the total mass of caller-supplied distributions before
/// they are renormalized.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `x ln(x / y)` with `0 ln 0 = 0`; `None` when `x > 0` and `y = 0`.
fn xlog_ratio(x: f64, y: f64) -> Option<f64> {
    if x == 0.0 {
        Some(0.0)
    } else if y == 0.0 {
        None
    } else {
        Some(x * (x / y).ln())
    }
}

fn validate_entries(entries: &[f64]) -> Result<()> {
    if entries.is_empty() {
        return Err(Error::EmptyVector);
    }
    for (index, &value) in entries.iter().enumerate() {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(Error::NegativeEntry { index, value });
        }
    }
    Ok(())
}

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// A vector of `R_+^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct NonNegVector(Vec<f64>);

impl NonNegVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        validate_entries(&entries)?;
        Ok(Self(entries))
    }

    pub fn zeros(d: usize) -> Self {
        Self(vec![0.0; d])
    }

    /// `scale * e_index` in dimension `d`.
    pub fn scaled_corner(d: usize, index: usize, scale: f64) -> Result<Self> {
        if index >= d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: index + 1,
            });
        }
        let mut entries = vec![0.0; d];
        entries[index] = scale;
        Self::new(entries)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn l1_norm(&self) -> f64 {
        compensated_sum(self.0.iter().copied())
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        compensated_sum(self.0.iter().zip(other).map(|(a, b)| a * b))
    }
}

impl TryFrom<Vec<f64>> for NonNegVector {
    type Error = Error;

    fn try_from(value: Vec<f64>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<NonNegVector> for Vec<f64> {
    fn from(value: NonNegVector) -> Self {
        value.0
    }
}

impl From<Distribution> for NonNegVector {
    fn from(value: Distribution) -> Self {
        Self(value.0)
    }
}

/// A point of the simplex `Δ_d`.
///
/// Construction always divides by the computed total mass, so the entries
/// sum to one up to a few ulps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Distribution(Vec<f64>);

impl Distribution {
    /// Accepts entries whose mass is within [`NORMALIZATION_TOLERANCE`] of one.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        validate_entries(&entries)?;
        let sum = compensated_sum(entries.iter().copied());
        if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self::normalized(entries, sum))
    }

    /// Normalizes arbitrary nonnegative weights with positive total mass.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        validate_entries(&weights)?;
        let sum = compensated_sum(weights.iter().copied());
        if !(sum > 0.0 && sum.is_finite()) {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self::normalized(weights, sum))
    }

    pub(crate) fn from_weights_unchecked(weights: Vec<f64>) -> Self {
        let sum = compensated_sum(weights.iter().copied());
        Self::normalized(weights, sum)
    }

    fn normalized(mut entries: Vec<f64>, sum: f64) -> Self {
        if sum != 1.0 {
            entries.iter_mut().for_each(|x| *x /= sum);
        }
        Self(entries)
    }

    pub fn uniform(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::EmptyVector);
        }
        Ok(Self(vec![1.0 / d as f64; d]))
    }

    pub fn corner(d: usize, index: usize) -> Result<Self> {
        if index >= d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: index + 1,
            });
        }
        let mut entries = vec![0.0; d];
        entries[index] = 1.0;
        Ok(Self(entries))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        compensated_sum(self.0.iter().zip(other).map(|(a, b)| a * b))
    }

    pub fn min_entry(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Index of the largest entry, lowest index on ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &x) in self.0.iter().enumerate() {
            if x > self.0[best] {
                best = i;
            }
        }
        best
    }
}

impl TryFrom<Vec<f64>> for Distribution {
    type Error = Error;

    fn try_from(value: Vec<f64>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<Distribution> for Vec<f64> {
    fn from(value: Distribution) -> Self {
        value.0
    }
}

/// Parameters of the clipped simplex `Δ_d^α = [α/d, 1]^d ∩ Δ_d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClippedSimplex {
    alpha: f64,
    d: usize,
}

impl ClippedSimplex {
    pub fn new(alpha: f64, d: usize) -> Result<Self> {
        check_unit_interval("alpha", alpha)?;
        if d == 0 {
            return Err(Error::EmptyVector);
        }
        Ok(Self { alpha, d })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Lower bound `α/d` on every coordinate.
    pub fn floor(&self) -> f64 {
        self.alpha / self.d as f64
    }

    pub fn contains(&self, x: &Distribution, tol: f64) -> bool {
        x.dim() == self.d && x.min_entry() >= self.floor() - tol
    }
}

/// Asymmetric total variation `Σ_{x_i ≥ y_i} (x_i − y_i)` on `R_+^d`.
pub fn total_variation(x: &[f64], y: &[f64]) -> Result<f64> {
    check_dims(x.len(), y.len())?;
    Ok(compensated_sum(
        x.iter().zip(y).filter(|(a, b)| a >= b).map(|(a, b)| a - b),
    ))
}

/// `K(x, y) = Σ x_i ln(x_i / y_i)`.
pub fn kl_divergence(x: &Distribution, y: &Distribution) -> Result<f64> {
    check_dims(x.dim(), y.dim())?;
    let mut terms = Vec::with_capacity(x.dim());
    for (index, (&a, &b)) in x.as_slice().iter().zip(y.as_slice()).enumerate() {
        match xlog_ratio(a, b) {
            Some(t) => terms.push(t),
            None => return Err(Error::SupportViolation { index, value: a }),
        }
    }
    // Rounding can leave tiny negative totals for x ≈ y.
    Ok(compensated_sum(terms).max(0.0))
}

/// Binary entropy `h(x) = −x ln x − (1−x) ln(1−x)` in nats.
pub fn binary_entropy(x: f64) -> Result<f64> {
    check_unit_interval("x", x)?;
    let term = |p: f64| if p == 0.0 { 0.0 } else { -p * p.ln() };
    Ok(term(x) + term(1.0 - x))
}

/// KL projection of `v` onto `Δ_d^α`.
///
/// Sorts the entries ascending and floors the `k` smallest at `α/d`,
/// rescaling the rest to fill the remaining mass; `k` is the smallest count
/// for which every rescaled entry still clears the floor. This is the
/// KKT solution of `argmin_{x ∈ Δ_d^α} K(x, v)`.
pub fn kl_project_clipped(v: &Distribution, params: &ClippedSimplex) -> Result<Distribution> {
    check_dims(params.dim(), v.dim())?;
    let d = v.dim();
    let floor = params.floor();
    let entries = v.as_slice();

    if entries.iter().all(|&x| x >= floor) {
        return Ok(v.clone());
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| entries[a].total_cmp(&entries[b]));

    // suffix[k] = mass of the d − k largest entries
    let mut suffix = vec![0.0; d + 1];
    for k in (0..d).rev() {
        suffix[k] = suffix[k + 1] + entries[order[k]];
    }

    let mut projected = vec![floor; d];
    for k in 1..d {
        let rest = suffix[k];
        let scale = (1.0 - k as f64 * floor) / rest;
        if entries[order[k]] * scale >= floor {
            for &i in &order[k..] {
                projected[i] = entries[i] * scale;
            }
            return Ok(Distribution::from_weights_unchecked(projected));
        }
    }
    // Only reachable when α = 1 and every entry is floored.
    Ok(Distribution::from_weights_unchecked(projected))
}
