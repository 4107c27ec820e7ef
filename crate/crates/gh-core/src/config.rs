//! Search and construction caps.

use serde::{Deserialize, Serialize};

/// Hard limits for the enumeration solvers and product constructions.
///
/// Every limit is a plain field so callers can raise or lower individual caps
/// without touching the rest. Exceeding a cap is always an error carrying the
/// requirement and the cap, never a silent truncation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Caps {
    /// Maximum `nx * ny` relation bits for the subset-enumeration solver.
    pub subset_bits: u32,
    /// Maximum nominal `ny^nx * nx^ny` state count for the map-pair solver.
    pub mappair_states: f64,
    /// Maximum point count of a constructed l^p product.
    pub product_points: usize,
    /// Maximum weight-vector length for exhaustive subset-supremum search.
    pub subset_sup_n: u32,
    /// Maximum search-tree nodes for the max-clique solver.
    pub clique_nodes: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            subset_bits: 25,
            mappair_states: 1e8,
            product_points: 20_000,
            subset_sup_n: 24,
            clique_nodes: 10_000_000,
        }
    }
}

/// Default tolerance for triangle-inequality validation.
pub const DEFAULT_TRIANGLE_TOL: f64 = 1e-9;
