//! Dense real vectors used for iterates, gradients and data.
//!
//! Entries are validated to be finite at construction; every arithmetic
//! helper therefore operates on finite inputs. Design envelope is desk
//! scale (n up to ~10^3), so everything is a plain `Vec<f64>`.

use serde::{Deserialize, Serialize};

use crate::CoreError;

/// A finite dense vector in R^n, n >= 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector(Vec<f64>);

impl Vector {
    /// Builds a vector, rejecting empty input and non-finite entries.
    pub fn new(entries: Vec<f64>) -> Result<Self, CoreError> {
        if entries.is_empty() {
            return Err(CoreError::EmptyVector);
        }
        if let Some(&bad) = entries.iter().find(|e| !e.is_finite()) {
            return Err(CoreError::NonFiniteEntry(bad));
        }
        Ok(Self(entries))
    }

    pub fn from_slice(entries: &[f64]) -> Result<Self, CoreError> {
        Self::new(entries.to_vec())
    }

    /// All-zero vector of dimension `dim`.
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "vector dimension must be >= 1");
        Self(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dot(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch in dot");
        dot(&self.0, &other.0)
    }

    pub fn norm_sq(&self) -> f64 {
        dot(&self.0, &self.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Euclidean distance to `other`.
    pub fn dist(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch in dist");
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Returns `self + scale * other`.
    pub fn add_scaled(&self, scale: f64, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch in add_scaled");
        Self(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + scale * b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add_scaled(-1.0, other)
    }

    pub fn scale(&self, scale: f64) -> Self {
        Self(self.0.iter().map(|a| a * scale).collect())
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = CoreError;

    fn try_from(entries: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(entries)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Inner product on raw slices, for hot accumulation loops.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}
