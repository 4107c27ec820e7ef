//! Exact Gromov-Hausdorff distances between small finite metric spaces, plus
//! certified two-sided bounds for l^p products of metric spaces.
//!
//! The crate is organised around a few small pieces:
//!
//! * [`space`]: validated finite metric spaces, generators, scaling and l^p
//!   products.
//! * [`correspondence`]: correspondences, map pairs and their distortions.
//! * [`solver`]: exact GH solvers by exhaustive enumeration (two independent
//!   strategies that double as each other's oracle).
//! * [`bounds`]: sandwich, product and clique-based bounds with certificates.
//! * [`linear`]: the subset-supremum functional for products of rescaled
//!   unit-diameter factors, with attainability detection.
//! * [`xi`]: numerical falsification checks for the endpoint/corner maximum
//!   principle the product bounds rest on.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the type
//! aliases below fix the common `f64` instantiations used by the CLI.

pub mod bounds;
pub mod clique;
pub mod config;
pub mod correspondence;
pub mod error;
pub mod exponent;
pub mod io;
pub mod linear;
pub mod parallel;
pub mod scalar;
pub mod solver;
pub mod space;
pub mod xi;

pub use config::Caps;
pub use error::GhError;
pub use exponent::Exponent;
pub use scalar::Scalar;

/// `f64` metric space, the working precision of the CLI.
pub type Space64 = space::FiniteMetricSpace<f64>;
/// `f32` metric space, for callers that want the narrow instantiation.
pub type Space32 = space::FiniteMetricSpace<f32>;
/// `f64` exponent (`p` in `[1, inf]`).
pub type Exp64 = Exponent<f64>;
/// `f64` exact-solver result.
pub type GhResult64 = solver::GhResult<f64>;
/// `f64` bound report.
pub type BoundReport64 = bounds::BoundReport<f64>;
/// `f64` weight vector for linear products.
pub type WeightVector64 = linear::WeightVector<f64>;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, GhError>;
