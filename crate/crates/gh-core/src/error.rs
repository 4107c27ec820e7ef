//! Error type shared by every module.

use thiserror::Error;

/// Everything that can go wrong when validating inputs or running a solver.
///
/// Values carried by variants are converted to `f64` so the enum stays
/// independent of the scalar parameter.
#[derive(Debug, Clone, Error)]
pub enum GhError {
    #[error("empty space: at least one point is required")]
    EmptySpace,

    #[error("distance matrix is not square: {n} rows but row {row} has {cols} entries")]
    NotSquare { n: usize, row: usize, cols: usize },

    #[error("{labels} labels given for a {n}-point space")]
    LabelCount { labels: usize, n: usize },

    #[error("asymmetric distances at ({i},{j}): {forward} vs {backward}")]
    Asymmetry {
        i: usize,
        j: usize,
        forward: f64,
        backward: f64,
    },

    #[error("negative distance {value} at ({i},{j})")]
    NegativeDistance { i: usize, j: usize, value: f64 },

    #[error("nonzero diagonal entry {value} at ({i},{i})")]
    NonzeroDiagonal { i: usize, value: f64 },

    #[error(
        "triangle inequality violated at (i={i}, j={j}, k={k}): \
         d(i,j) exceeds d(i,k)+d(k,j) by {defect}"
    )]
    TriangleViolation {
        i: usize,
        j: usize,
        k: usize,
        defect: f64,
    },

    #[error("scale factor must be positive, got {value}")]
    NonpositiveScale { value: f64 },

    #[error("exponent p must satisfy p >= 1, got {value}")]
    InvalidExponent { value: f64 },

    #[error("cycle size must be even, got {size}")]
    OddCycleSize { size: usize },

    #[error("generator size must be at least 1")]
    ZeroGeneratorSize,

    #[error("unknown generator spec {spec:?} (expected simplex:<n>, cycle:<n>, path:<n>, point)")]
    InvalidGenerator { spec: String },

    #[error("{what} requires {required} but the cap is {cap}")]
    CapExceeded {
        what: &'static str,
        required: f64,
        cap: f64,
    },

    #[error("size mismatch: {what} expected {expected} points, got {got}")]
    SizeMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("map value {value} out of range for a {n}-point target at index {index}")]
    MapOutOfRange {
        index: usize,
        value: usize,
        n: usize,
    },

    #[error("correspondence is not doubly surjective: {side} {index} is unmatched")]
    NotSurjective { side: &'static str, index: usize },

    #[error("correspondence does not carry product factor structure")]
    NotAProduct,

    #[error("factor index {index} out of range ({count} factors)")]
    FactorOutOfRange { index: usize, count: usize },

    #[error("weight vectors have different lengths: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },

    #[error("weight vectors have different exponents")]
    ExponentMismatch,

    #[error("negative weight {value} at index {index}")]
    NegativeWeight { index: usize, value: f64 },

    #[error("factor {factor} has diameter {diam}, expected exactly 1")]
    DiameterNotOne { factor: usize, diam: f64 },

    #[error("epsilon must be nonnegative, got {value}")]
    NegativeEpsilon { value: f64 },

    #[error(
        "clique search exhausted its node cap ({cap} nodes); \
         best clique found so far has {} vertices (bound uncertified)",
        best_found.len()
    )]
    SearchCapExceeded {
        nodes: u64,
        cap: u64,
        best_found: Vec<usize>,
    },

    #[error("product needs at least one factor")]
    EmptyProduct,

    #[error("no factor pairs given")]
    EmptyPairing,

    #[error("{count} supplied per-factor distances for {pairs} pairs")]
    SuppliedCountMismatch { count: usize, pairs: usize },

    #[error("grid must have at least 2 points per axis, got {got}")]
    GridTooSmall { got: usize },

    #[error("{name} must be nonnegative, got {value}")]
    NegativeConstant { name: &'static str, value: f64 },
}

impl GhError {
    /// True for errors that mean "the input was fine but a configured search
    /// cap was exhausted"; the CLI maps these to exit code 3.
    pub fn is_cap_exhaustion(&self) -> bool {
        matches!(
            self,
            GhError::CapExceeded { .. } | GhError::SearchCapExceeded { .. }
        )
    }
}
