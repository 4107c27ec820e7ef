//! On-disk JSON shapes for spaces, product specifications and pairing lists.
//!
//! These structs only model the file contents; reading and writing the files
//! is the caller's business. Distances are stored as `f64` regardless of the
//! scalar type used for computation.

use serde::{Deserialize, Serialize};

use crate::exponent::Exponent;
use crate::scalar::Scalar;
use crate::space::FiniteMetricSpace;
use crate::Result;

/// A space file: a square distance matrix plus optional name and labels.
///
/// ```json
/// { "name": "square", "labels": ["a", "b"], "dist": [[0, 1], [1, 0]] }
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Defaults to `"0".."n-1"` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub dist: Vec<Vec<f64>>,
}

impl SpaceFile {
    /// Validates the matrix into a space, with `tol` for the triangle check.
    pub fn to_space<T: Scalar>(&self, tol: T) -> Result<FiniteMetricSpace<T>> {
        let matrix: Vec<Vec<T>> = self
            .dist
            .iter()
            .map(|row| row.iter().map(|&v| T::from_f64_lossy(v)).collect())
            .collect();
        let labels = match &self.labels {
            Some(l) => l.clone(),
            None => (0..self.dist.len()).map(|i| i.to_string()).collect(),
        };
        FiniteMetricSpace::with_tolerance(matrix, labels, tol)
    }

    pub fn from_space<T: Scalar>(space: &FiniteMetricSpace<T>, name: Option<String>) -> Self {
        let n = space.len();
        let dist = (0..n)
            .map(|i| (0..n).map(|j| space.d(i, j).to_f64_lossy()).collect())
            .collect();
        SpaceFile {
            name,
            labels: Some(space.labels().to_vec()),
            dist,
        }
    }
}

/// One factor of a product file: a space reference (a file path or a
/// generator spec such as `"simplex:4"`) and an optional weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductFactorFile {
    pub space: String,
    /// Defaults to 1.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
}

/// A product specification file.
///
/// ```json
/// { "p": 2, "factors": [{ "space": "cycle:8", "weight": 1.5 },
///                       { "space": "spaces/square.json" }] }
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductSpecFile {
    pub p: Exponent<f64>,
    pub factors: Vec<ProductFactorFile>,
}

/// One factor pair for the product bounds: space references as in
/// [`ProductFactorFile`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairEntry {
    pub x: String,
    pub y: String,
}

/// A pairing file: the factor pairs and, optionally, precomputed per-factor
/// distances (indexed like `pairs`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairsFile {
    pub pairs: Vec<PairEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dgh: Option<Vec<f64>>,
}
