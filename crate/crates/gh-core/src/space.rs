//! Finite metric spaces: validation, generators, scaling and l^p products.

use std::fmt;
use std::str::FromStr;

use crate::config::{Caps, DEFAULT_TRIANGLE_TOL};
use crate::error::GhError;
use crate::exponent::Exponent;
use crate::scalar::Scalar;
use crate::Result;

/// A finite pseudometric space with labelled points and a cached diameter.
///
/// The distance matrix is validated on construction: zero diagonal, symmetry,
/// nonnegativity and the triangle inequality (up to a tolerance). Distinct
/// points at distance zero are allowed; products with a zero weight produce
/// exactly that.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMetricSpace<T> {
    n: usize,
    labels: Vec<String>,
    dist: Vec<T>,
    diam: T,
}

impl<T: Scalar> FiniteMetricSpace<T> {
    /// Validates and builds a space with the default triangle tolerance
    /// (`1e-9`).
    pub fn new(matrix: Vec<Vec<T>>, labels: Vec<String>) -> Result<Self> {
        Self::with_tolerance(matrix, labels, T::from_f64_lossy(DEFAULT_TRIANGLE_TOL))
    }

    /// Like [`new`](Self::new) with the numeric labels `"0".."n-1"`.
    pub fn from_matrix(matrix: Vec<Vec<T>>) -> Result<Self> {
        let labels = (0..matrix.len()).map(|i| i.to_string()).collect();
        Self::new(matrix, labels)
    }

    /// Validates and builds a space. `tol` applies only to the triangle
    /// inequality check: a triple fails when
    /// `d(i,j) > d(i,k) + d(k,j) + tol`.
    pub fn with_tolerance(matrix: Vec<Vec<T>>, labels: Vec<String>, tol: T) -> Result<Self> {
        let n = matrix.len();
        if n == 0 {
            return Err(GhError::EmptySpace);
        }
        for (row, r) in matrix.iter().enumerate() {
            if r.len() != n {
                return Err(GhError::NotSquare {
                    n,
                    row,
                    cols: r.len(),
                });
            }
        }
        if labels.len() != n {
            return Err(GhError::LabelCount {
                labels: labels.len(),
                n,
            });
        }

        let mut dist = Vec::with_capacity(n * n);
        for r in &matrix {
            dist.extend_from_slice(r);
        }

        for i in 0..n {
            let dii = dist[i * n + i];
            if dii != T::zero() {
                return Err(GhError::NonzeroDiagonal {
                    i,
                    value: dii.to_f64_lossy(),
                });
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let dij = dist[i * n + j];
                let dji = dist[j * n + i];
                if dij.is_nan() || dji.is_nan() {
                    return Err(GhError::NegativeDistance {
                        i,
                        j,
                        value: f64::NAN,
                    });
                }
                if dij != dji {
                    return Err(GhError::Asymmetry {
                        i,
                        j,
                        forward: dij.to_f64_lossy(),
                        backward: dji.to_f64_lossy(),
                    });
                }
                if dij < T::zero() {
                    return Err(GhError::NegativeDistance {
                        i,
                        j,
                        value: dij.to_f64_lossy(),
                    });
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if j == i {
                    continue;
                }
                let dij = dist[i * n + j];
                for k in 0..n {
                    if k == i || k == j {
                        continue;
                    }
                    let via = dist[i * n + k] + dist[k * n + j];
                    if dij > via + tol {
                        return Err(GhError::TriangleViolation {
                            i,
                            j,
                            k,
                            defect: (dij - via).to_f64_lossy(),
                        });
                    }
                }
            }
        }

        Ok(Self::from_validated(n, labels, dist))
    }

    /// Builds without validation. Callers guarantee the matrix is a valid
    /// pseudometric (constructions like scaling and products preserve the
    /// axioms, so revalidating them would only burn O(n^3) time).
    fn from_validated(n: usize, labels: Vec<String>, dist: Vec<T>) -> Self {
        let mut diam = T::zero();
        for &d in &dist {
            diam = diam.max(d);
        }
        FiniteMetricSpace {
            n,
            labels,
            dist,
            diam,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Distance between points `i` and `j`.
    #[inline]
    pub fn d(&self, i: usize, j: usize) -> T {
        self.dist[i * self.n + j]
    }

    /// Cached diameter: the largest pairwise distance.
    #[inline]
    pub fn diameter(&self) -> T {
        self.diam
    }

    /// Lexicographically first pair realizing the diameter. For a one-point
    /// space this is `(0, 0)`.
    pub fn diametral_pair(&self) -> (usize, usize) {
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.d(i, j) == self.diam {
                    return (i, j);
                }
            }
        }
        (0, 0)
    }

    /// Rescales every distance by `lambda > 0` (NaN is rejected too).
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn scale(&self, lambda: T) -> Result<Self> {
        if !(lambda > T::zero()) {
            return Err(GhError::NonpositiveScale {
                value: lambda.to_f64_lossy(),
            });
        }
        Ok(self.scale_by_weight(lambda))
    }

    /// Rescale allowing zero (used when folding product weights; a zero
    /// weight collapses the factor to a pseudometric at distance 0).
    fn scale_by_weight(&self, w: T) -> Self {
        let dist = self.dist.iter().map(|&d| w * d).collect();
        Self::from_validated(self.n, self.labels.clone(), dist)
    }

    /// Largest entrywise deviation from `other` (same size required). Used
    /// for isometry-up-to-tolerance comparisons.
    pub fn max_matrix_deviation(&self, other: &Self) -> Result<T> {
        if self.n != other.n {
            return Err(GhError::SizeMismatch {
                what: "matrix comparison",
                expected: self.n,
                got: other.n,
            });
        }
        let mut worst = T::zero();
        for (a, b) in self.dist.iter().zip(other.dist.iter()) {
            worst = worst.max((*a - *b).abs());
        }
        Ok(worst)
    }
}

/// Built-in space generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorKind {
    Simplex,
    Cycle,
    Path,
    Point,
}

/// A parsed generator such as `simplex:3`, `cycle:8`, `path:5` or `point`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub size: usize,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, size: usize) -> Result<Self> {
        if size == 0 {
            return Err(GhError::ZeroGeneratorSize);
        }
        if kind == GeneratorKind::Cycle && !size.is_multiple_of(2) {
            return Err(GhError::OddCycleSize { size });
        }
        if kind == GeneratorKind::Point && size != 1 {
            return Err(GhError::InvalidGenerator {
                spec: format!("point:{size}"),
            });
        }
        Ok(GeneratorSpec { kind, size })
    }

    /// Builds the space. All generators are normalized to diameter 1
    /// (a one-point space has diameter 0).
    pub fn generate<T: Scalar>(&self) -> FiniteMetricSpace<T> {
        let n = self.size;
        let labels = (0..n).map(|i| i.to_string()).collect();
        let mut dist = vec![T::zero(); n * n];
        match self.kind {
            GeneratorKind::Point => {}
            GeneratorKind::Simplex => {
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            dist[i * n + j] = T::one();
                        }
                    }
                }
            }
            GeneratorKind::Cycle => {
                // Arc metric on n points of a circle, normalized so that
                // antipodes sit at distance exactly 1 (n is even).
                let half = T::from_usize(n / 2).unwrap();
                for i in 0..n {
                    for j in 0..n {
                        let a = i.abs_diff(j);
                        let arc = a.min(n - a);
                        dist[i * n + j] = T::from_usize(arc).unwrap() / half;
                    }
                }
            }
            GeneratorKind::Path => {
                // Evenly spaced points on a segment of length 1.
                if n > 1 {
                    let span = T::from_usize(n - 1).unwrap();
                    for i in 0..n {
                        for j in 0..n {
                            dist[i * n + j] = T::from_usize(i.abs_diff(j)).unwrap() / span;
                        }
                    }
                }
            }
        }
        FiniteMetricSpace::from_validated(n, labels, dist)
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GeneratorKind::Simplex => write!(f, "simplex:{}", self.size),
            GeneratorKind::Cycle => write!(f, "cycle:{}", self.size),
            GeneratorKind::Path => write!(f, "path:{}", self.size),
            GeneratorKind::Point => write!(f, "point"),
        }
    }
}

impl FromStr for GeneratorSpec {
    type Err = GhError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let bad = || GhError::InvalidGenerator { spec: s.to_string() };
        if t == "point" {
            return GeneratorSpec::new(GeneratorKind::Point, 1);
        }
        let (kind, size) = t.split_once(':').ok_or_else(bad)?;
        let size: usize = size.parse().map_err(|_| bad())?;
        let kind = match kind {
            "simplex" => GeneratorKind::Simplex,
            "cycle" => GeneratorKind::Cycle,
            "path" => GeneratorKind::Path,
            "point" => GeneratorKind::Point,
            _ => return Err(bad()),
        };
        GeneratorSpec::new(kind, size)
    }
}

/// Convenience constructors for the generated families.
pub fn simplex<T: Scalar>(n: usize) -> FiniteMetricSpace<T> {
    GeneratorSpec::new(GeneratorKind::Simplex, n)
        .expect("n >= 1")
        .generate()
}

pub fn point<T: Scalar>() -> FiniteMetricSpace<T> {
    GeneratorSpec::new(GeneratorKind::Point, 1)
        .expect("point")
        .generate()
}

pub fn cycle<T: Scalar>(n: usize) -> Result<FiniteMetricSpace<T>> {
    Ok(GeneratorSpec::new(GeneratorKind::Cycle, n)?.generate())
}

pub fn path<T: Scalar>(n: usize) -> FiniteMetricSpace<T> {
    GeneratorSpec::new(GeneratorKind::Path, n)
        .expect("n >= 1")
        .generate()
}

/// One factor of a product: a space and a nonnegative weight.
#[derive(Clone, Debug)]
pub struct ProductFactor<T> {
    pub space: FiniteMetricSpace<T>,
    pub weight: T,
}

/// Specification of a weighted l^p product.
#[derive(Clone, Debug)]
pub struct ProductSpec<T> {
    pub p: Exponent<T>,
    pub factors: Vec<ProductFactor<T>>,
}

impl<T: Scalar> ProductSpec<T> {
    /// Unweighted product (all weights 1).
    pub fn plain(p: Exponent<T>, spaces: Vec<FiniteMetricSpace<T>>) -> Self {
        ProductSpec {
            p,
            factors: spaces
                .into_iter()
                .map(|space| ProductFactor {
                    space,
                    weight: T::one(),
                })
                .collect(),
        }
    }

    pub fn weighted(p: Exponent<T>, pairs: Vec<(FiniteMetricSpace<T>, T)>) -> Self {
        ProductSpec {
            p,
            factors: pairs
                .into_iter()
                .map(|(space, weight)| ProductFactor { space, weight })
                .collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.factors.is_empty() {
            return Err(GhError::EmptyProduct);
        }
        for (index, f) in self.factors.iter().enumerate() {
            if f.weight.is_nan() || f.weight < T::zero() {
                return Err(GhError::NegativeWeight {
                    index,
                    value: f.weight.to_f64_lossy(),
                });
            }
        }
        Ok(())
    }

    /// Point count of the product without building it.
    pub fn cardinality(&self) -> Option<usize> {
        self.factors
            .iter()
            .try_fold(1usize, |acc, f| acc.checked_mul(f.space.len()))
    }

    /// Diameter of the product by the norm formula: the l^p norm of the
    /// weighted factor diameters. Agrees exactly with the diameter of the
    /// materialized product because rounding is monotone, so the maximal
    /// product distance is attained coordinatewise at scaled factor
    /// diameters.
    pub fn diameter_by_formula(&self) -> T {
        let parts: Vec<T> = self
            .factors
            .iter()
            .map(|f| f.weight * f.space.diameter())
            .collect();
        self.p.norm(&parts)
    }
}

/// Mixed-radix decoding of product point indices: the first factor varies
/// slowest, so tuples enumerate in lexicographic order.
pub(crate) struct TupleIndex {
    sizes: Vec<usize>,
    strides: Vec<usize>,
}

impl TupleIndex {
    pub(crate) fn new(sizes: Vec<usize>) -> Self {
        let mut strides = vec![1usize; sizes.len()];
        for k in (0..sizes.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * sizes[k + 1];
        }
        TupleIndex { sizes, strides }
    }

    #[inline]
    pub(crate) fn coord(&self, flat: usize, k: usize) -> usize {
        (flat / self.strides[k]) % self.sizes[k]
    }

    pub(crate) fn arity(&self) -> usize {
        self.sizes.len()
    }
}

pub(crate) fn product_index(sizes: &[usize]) -> TupleIndex {
    TupleIndex::new(sizes.to_vec())
}

/// Builds the weighted l^p product of the factors in `spec`.
///
/// Points are ordered lexicographically (first factor slowest) and labelled
/// by the tuple of factor labels. Weights are folded by rescaling each factor
/// before combining, so a weight of 0 collapses that factor's contribution.
pub fn lp_product<T: Scalar>(spec: &ProductSpec<T>, caps: &Caps) -> Result<FiniteMetricSpace<T>> {
    spec.validate()?;
    let total = spec.cardinality().unwrap_or(usize::MAX);
    if total > caps.product_points {
        return Err(GhError::CapExceeded {
            what: "lp_product points",
            required: spec
                .factors
                .iter()
                .map(|f| f.space.len() as f64)
                .product::<f64>(),
            cap: caps.product_points as f64,
        });
    }

    let scaled: Vec<FiniteMetricSpace<T>> = spec
        .factors
        .iter()
        .map(|f| f.space.scale_by_weight(f.weight))
        .collect();
    let idx = TupleIndex::new(scaled.iter().map(|s| s.len()).collect());

    let labels: Vec<String> = (0..total)
        .map(|u| {
            let parts: Vec<&str> = (0..idx.arity())
                .map(|k| scaled[k].labels()[idx.coord(u, k)].as_str())
                .collect();
            format!("({})", parts.join(","))
        })
        .collect();

    let mut dist = vec![T::zero(); total * total];
    for u in 0..total {
        for v in (u + 1)..total {
            let mut acc = spec.p.zero_acc();
            for (k, s) in scaled.iter().enumerate() {
                acc = spec.p.accumulate(acc, s.d(idx.coord(u, k), idx.coord(v, k)));
            }
            let d = spec.p.finish(acc);
            dist[u * total + v] = d;
            dist[v * total + u] = d;
        }
    }

    Ok(FiniteMetricSpace::from_validated(total, labels, dist))
}
