//! Exact Gromov-Hausdorff solvers by exhaustive search.
//!
//! Two independent strategies are exposed so each can serve as the other's
//! oracle:
//!
//! * `subset-enum` scans every relation bitmask over `X x Y`, keeping the
//!   doubly surjective ones.
//! * `mappair-enum` searches the family of correspondences induced by map
//!   pairs `(f, g)`, which contains a distortion minimizer: any
//!   correspondence contains an induced one, and restricting a relation can
//!   only shrink its distortion. The search is a depth-first scan in
//!   lexicographic `(f, g)` order that prunes a branch as soon as its partial
//!   distortion reaches the best value found, which never discards a strictly
//!   better or lexicographically earlier optimum.
//!
//! Both strategies split their search space into chunks whose boundaries
//! depend only on the instance, so results (witness included) are identical
//! no matter how many worker threads run.

use serde::{Deserialize, Serialize};

use crate::config::Caps;
use crate::correspondence::{
    correspondence_from_maps, distortion, Correspondence, MapPair,
};
use crate::error::GhError;
use crate::parallel::map_chunks;
use crate::scalar::Scalar;
use crate::space::FiniteMetricSpace;
use crate::Result;

/// Which search to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Pick the strategy with the smaller nominal state count that fits its
    /// cap (ties prefer `subset-enum`).
    Auto,
    SubsetEnum,
    MapPairEnum,
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "auto" => Ok(Strategy::Auto),
            "subset" | "subset-enum" => Ok(Strategy::SubsetEnum),
            "mappair" | "mappair-enum" => Ok(Strategy::MapPairEnum),
            other => Err(format!(
                "unknown strategy {other:?} (expected auto, subset or mappair)"
            )),
        }
    }
}

/// The strategy that actually produced a result.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "subset-enum")]
    SubsetEnum,
    #[serde(rename = "mappair-enum")]
    MapPairEnum,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::SubsetEnum => write!(f, "subset-enum"),
            Method::MapPairEnum => write!(f, "mappair-enum"),
        }
    }
}

/// An optimal witness: either a correspondence (subset search) or a map pair
/// (map-pair search).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum GhWitness {
    Correspondence(Correspondence),
    MapPair(MapPair),
}

impl GhWitness {
    /// The witness as a correspondence (map pairs are converted).
    pub fn as_correspondence(&self) -> Correspondence {
        match self {
            GhWitness::Correspondence(c) => c.clone(),
            GhWitness::MapPair(fp) => correspondence_from_maps(fp),
        }
    }
}

/// Result of an exact computation. `value` is d_GH itself (half the witness
/// distortion); `enumerated` counts search states examined (surjective masks
/// for the subset search, tree nodes for the map-pair search).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GhResult<T> {
    pub value: T,
    pub witness: GhWitness,
    pub method: Method,
    pub enumerated: u64,
}

impl<T: Scalar> GhResult<T> {
    /// Witness distortion recomputed from scratch; always equals `2 * value`.
    pub fn witness_distortion(
        &self,
        x: &FiniteMetricSpace<T>,
        y: &FiniteMetricSpace<T>,
    ) -> Result<T> {
        distortion(&self.witness.as_correspondence(), x, y)
    }
}

fn nominal_subset_states(nx: usize, ny: usize) -> f64 {
    ((nx * ny) as f64).exp2()
}

fn nominal_mappair_states(nx: usize, ny: usize) -> f64 {
    (ny as f64).powi(nx as i32) * (nx as f64).powi(ny as i32)
}

/// Exact d_GH between two validated spaces.
pub fn exact_gh<T: Scalar>(
    x: &FiniteMetricSpace<T>,
    y: &FiniteMetricSpace<T>,
    strategy: Strategy,
    caps: &Caps,
) -> Result<GhResult<T>> {
    let half = T::from_f64_lossy(0.5);
    let result = match strategy {
        Strategy::SubsetEnum => subset_enum(x, y, caps)?,
        Strategy::MapPairEnum => mappair_enum(x, y, caps)?,
        Strategy::Auto => {
            let ns = nominal_subset_states(x.len(), y.len());
            let nm = nominal_mappair_states(x.len(), y.len());
            let subset_first = ns <= nm;
            let attempts: [Strategy; 2] = if subset_first {
                [Strategy::SubsetEnum, Strategy::MapPairEnum]
            } else {
                [Strategy::MapPairEnum, Strategy::SubsetEnum]
            };
            let mut last_err = None;
            let mut found = None;
            for s in attempts {
                match exact_gh(x, y, s, caps) {
                    Ok(r) => {
                        found = Some(r);
                        break;
                    }
                    Err(e @ GhError::CapExceeded { .. }) => last_err = Some(e),
                    Err(e) => return Err(e),
                }
            }
            match found {
                Some(r) => return Ok(r),
                None => return Err(last_err.expect("at least one attempt")),
            }
        }
    };

    let value = half * result.0;
    let gh = GhResult {
        value,
        witness: result.1,
        method: result.2,
        enumerated: result.3,
    };
    debug_assert_eq!(
        gh.witness_distortion(x, y).expect("witness fits spaces"),
        result.0,
        "witness distortion must equal the reported minimum"
    );
    Ok(gh)
}

type RawResult<T> = (T, GhWitness, Method, u64);

fn subset_enum<T: Scalar>(
    x: &FiniteMetricSpace<T>,
    y: &FiniteMetricSpace<T>,
    caps: &Caps,
) -> Result<RawResult<T>> {
    let (nx, ny) = (x.len(), y.len());
    let bits = nx * ny;
    let effective_cap = caps.subset_bits.min(63);
    if bits as u32 > effective_cap {
        return Err(GhError::CapExceeded {
            what: "subset-enum relation bits",
            required: bits as f64,
            cap: effective_cap as f64,
        });
    }

    // |d_X - d_Y| for every pair of relation bits.
    let mut table = vec![T::zero(); bits * bits];
    for b1 in 0..bits {
        let (i1, j1) = (b1 / ny, b1 % ny);
        for b2 in 0..bits {
            let (i2, j2) = (b2 / ny, b2 % ny);
            table[b1 * bits + b2] = (x.d(i1, i2) - y.d(j1, j2)).abs();
        }
    }

    let total: u64 = 1u64 << bits;
    let chunk_size: u64 = 1u64 << bits.min(16);
    let ranges: Vec<(u64, u64)> = (0..total.div_ceil(chunk_size))
        .map(|c| (c * chunk_size, ((c + 1) * chunk_size).min(total)))
        .collect();

    let col_mask: u64 = (1u64 << ny) - 1;
    let scan = |(lo, hi): (u64, u64)| -> (Option<(T, u64)>, u64) {
        let mut best: Option<(T, u64)> = None;
        let mut examined = 0u64;
        let mut positions: Vec<usize> = Vec::with_capacity(bits);
        'mask: for mask in lo..hi {
            // Double surjectivity: every row and every column nonempty.
            let mut cols = 0u64;
            for i in 0..nx {
                let row = (mask >> (i * ny)) & col_mask;
                if row == 0 {
                    continue 'mask;
                }
                cols |= row;
            }
            if cols != col_mask {
                continue;
            }
            examined += 1;

            positions.clear();
            let mut m = mask;
            while m != 0 {
                positions.push(m.trailing_zeros() as usize);
                m &= m - 1;
            }
            let mut worst = T::zero();
            for (a, &ba) in positions.iter().enumerate() {
                let row = &table[ba * bits..(ba + 1) * bits];
                for &bb in &positions[a..] {
                    worst = worst.max(row[bb]);
                }
                if let Some((bv, _)) = best {
                    if worst >= bv {
                        // Cannot beat the earlier (hence smaller) mask.
                        continue 'mask;
                    }
                }
            }
            match best {
                Some((bv, _)) if worst >= bv => {}
                _ => best = Some((worst, mask)),
            }
        }
        (best, examined)
    };

    let outcomes = map_chunks(ranges, scan);
    let mut enumerated = 0u64;
    let mut best: Option<(T, u64)> = None;
    for (chunk_best, examined) in outcomes {
        enumerated += examined;
        if let Some((v, m)) = chunk_best {
            match best {
                Some((bv, _)) if v >= bv => {}
                _ => best = Some((v, m)),
            }
        }
    }
    let (value, mask) = best.expect("the full relation is always doubly surjective");
    let witness = Correspondence::from_mask(mask, nx, ny).expect("mask was checked surjective");
    Ok((value, GhWitness::Correspondence(witness), Method::SubsetEnum, enumerated))
}

struct MapPairDfs<'a, T> {
    x: &'a FiniteMetricSpace<T>,
    y: &'a FiniteMetricSpace<T>,
    nx: usize,
    ny: usize,
    f: Vec<usize>,
    g: Vec<usize>,
    best: Option<(T, Vec<usize>, Vec<usize>)>,
    nodes: u64,
}

impl<'a, T: Scalar> MapPairDfs<'a, T> {
    fn beats_best(&self, partial: T) -> bool {
        match &self.best {
            Some((bv, _, _)) => partial < *bv,
            None => true,
        }
    }

    fn assign_f(&mut self, i: usize, partial: T) {
        if i == self.nx {
            self.assign_g(0, partial);
            return;
        }
        for v in 0..self.ny {
            self.nodes += 1;
            let mut m = partial;
            for k in 0..i {
                m = m.max((self.x.d(i, k) - self.y.d(v, self.f[k])).abs());
                if !self.beats_best(m) {
                    break;
                }
            }
            if !self.beats_best(m) {
                continue;
            }
            self.f[i] = v;
            self.assign_f(i + 1, m);
        }
    }

    fn assign_g(&mut self, j: usize, partial: T) {
        if j == self.ny {
            // Pruning is strict, so any completed assignment improves.
            self.best = Some((partial, self.f.clone(), self.g.clone()));
            return;
        }
        'candidate: for u in 0..self.nx {
            self.nodes += 1;
            let mut m = partial;
            for l in 0..j {
                m = m.max((self.y.d(j, l) - self.x.d(u, self.g[l])).abs());
                if !self.beats_best(m) {
                    continue 'candidate;
                }
            }
            for k in 0..self.nx {
                m = m.max((self.x.d(k, u) - self.y.d(self.f[k], j)).abs());
                if !self.beats_best(m) {
                    continue 'candidate;
                }
            }
            self.g[j] = u;
            self.assign_g(j + 1, m);
        }
    }
}

fn mappair_enum<T: Scalar>(
    x: &FiniteMetricSpace<T>,
    y: &FiniteMetricSpace<T>,
    caps: &Caps,
) -> Result<RawResult<T>> {
    let (nx, ny) = (x.len(), y.len());
    let nominal = nominal_mappair_states(nx, ny);
    if nominal > caps.mappair_states {
        return Err(GhError::CapExceeded {
            what: "mappair-enum states",
            required: nominal,
            cap: caps.mappair_states,
        });
    }

    // One chunk per value of f(0); chunk boundaries depend only on sizes.
    type BestMaps<T> = Option<(T, Vec<usize>, Vec<usize>)>;
    let chunks: Vec<usize> = (0..ny).collect();
    let run = |f0: usize| -> (BestMaps<T>, u64) {
        let mut dfs = MapPairDfs {
            x,
            y,
            nx,
            ny,
            f: vec![0; nx],
            g: vec![0; ny],
            best: None,
            nodes: 1,
        };
        dfs.f[0] = f0;
        dfs.assign_f(1, T::zero());
        (dfs.best, dfs.nodes)
    };

    let outcomes = map_chunks(chunks, run);
    let mut enumerated = 0u64;
    let mut best: Option<(T, Vec<usize>, Vec<usize>)> = None;
    for (chunk_best, nodes) in outcomes {
        enumerated += nodes;
        if let Some((v, f, g)) = chunk_best {
            match &best {
                Some((bv, _, _)) if v >= *bv => {}
                _ => best = Some((v, f, g)),
            }
        }
    }
    let (value, f, g) = best.expect("constant maps always complete");
    let witness = MapPair::new(f, g).expect("search emits valid maps");
    Ok((value, GhWitness::MapPair(witness), Method::MapPairEnum, enumerated))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{point, simplex};

    fn caps() -> Caps {
        Caps::default()
    }

    #[test]
    fn distinct_simplices_are_half_apart() {
        let d2 = simplex::<f64>(2);
        let d3 = simplex::<f64>(3);
        for s in [Strategy::SubsetEnum, Strategy::MapPairEnum] {
            let r = exact_gh(&d2, &d3, s, &caps()).unwrap();
            assert_eq!(r.value, 0.5);
        }
    }

    #[test]
    fn self_distance_is_zero_with_isometric_witness() {
        let x = simplex::<f64>(3);
        for s in [Strategy::SubsetEnum, Strategy::MapPairEnum] {
            let r = exact_gh(&x, &x, s, &caps()).unwrap();
            assert_eq!(r.value, 0.0);
            assert_eq!(r.witness_distortion(&x, &x).unwrap(), 0.0);
        }
        // The map-pair search finds the identity first.
        let r = exact_gh(&x, &x, Strategy::MapPairEnum, &caps()).unwrap();
        match r.witness {
            GhWitness::MapPair(fp) => {
                assert_eq!(fp.f(), &[0, 1, 2]);
                assert_eq!(fp.g(), &[0, 1, 2]);
            }
            other => panic!("unexpected witness {other:?}"),
        }
    }

    #[test]
    fn distance_to_point_is_half_diameter() {
        let x = simplex::<f64>(4).scale(1.75).unwrap();
        let pt = point::<f64>();
        let r = exact_gh(&x, &pt, Strategy::Auto, &caps()).unwrap();
        assert_eq!(r.value, x.diameter() / 2.0);
        let r = exact_gh(&pt, &x, Strategy::Auto, &caps()).unwrap();
        assert_eq!(r.value, x.diameter() / 2.0);
    }

    #[test]
    fn scaled_pair_of_points() {
        let x = simplex::<f64>(2);
        let y = x.scale(2.0).unwrap();
        for s in [Strategy::SubsetEnum, Strategy::MapPairEnum] {
            let r = exact_gh(&x, &y, s, &caps()).unwrap();
            assert_eq!(r.value, 0.5);
        }
    }

    #[test]
    fn strategies_agree_exactly() {
        let d3 = simplex::<f64>(3);
        let c4 = crate::space::cycle::<f64>(4).unwrap();
        let a = exact_gh(&d3, &c4, Strategy::SubsetEnum, &caps()).unwrap();
        let b = exact_gh(&d3, &c4, Strategy::MapPairEnum, &caps()).unwrap();
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn subset_cap_is_enforced() {
        let d6 = simplex::<f64>(6);
        let err = exact_gh(&d6, &d6, Strategy::SubsetEnum, &caps()).unwrap_err();
        match err {
            GhError::CapExceeded { required, cap, .. } => {
                assert_eq!(required, 36.0);
                assert_eq!(cap, 25.0);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn mappair_cap_is_enforced() {
        let tight = Caps {
            mappair_states: 10.0,
            ..Caps::default()
        };
        let d2 = simplex::<f64>(2);
        let err = exact_gh(&d2, &d2, Strategy::MapPairEnum, &tight).unwrap_err();
        assert!(matches!(err, GhError::CapExceeded { .. }));
    }

    #[test]
    fn auto_falls_back_when_one_cap_blocks() {
        // 3x3 needs 9 relation bits; with the subset cap below that, auto
        // must fall through to the map-pair search.
        let d3 = simplex::<f64>(3);
        let tight_subset = Caps {
            subset_bits: 8,
            ..Caps::default()
        };
        let r = exact_gh(&d3, &d3, Strategy::Auto, &tight_subset).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.method, Method::MapPairEnum);

        // 4x5 prefers map pairs (640k states vs 2^20 masks); with the state
        // cap below that, auto must fall back to the subset search.
        let d4 = simplex::<f64>(4);
        let d5 = simplex::<f64>(5);
        let tight_mappair = Caps {
            mappair_states: 1000.0,
            ..Caps::default()
        };
        let r = exact_gh(&d4, &d5, Strategy::Auto, &tight_mappair).unwrap();
        assert_eq!(r.value, 0.5);
        assert_eq!(r.method, Method::SubsetEnum);

        // With both routes capped the auto strategy reports the exhaustion.
        let d6 = simplex::<f64>(6);
        let err = exact_gh(&d6, &d6, Strategy::Auto, &caps()).unwrap_err();
        assert!(err.is_cap_exhaustion());
    }

    #[test]
    fn subset_witness_is_smallest_optimal_mask() {
        // Both strategies report 0 for a self-pair; the subset witness is the
        // lexicographically smallest zero-distortion relation, which for a
        // 2-point space is the swap (mask 6), not the identity (mask 9).
        let d2 = simplex::<f64>(2);
        let r = exact_gh(&d2, &d2, Strategy::SubsetEnum, &caps()).unwrap();
        match r.witness {
            GhWitness::Correspondence(c) => {
                assert_eq!(c.pairs(), vec![(0, 1), (1, 0)]);
            }
            other => panic!("unexpected witness {other:?}"),
        }
    }

    #[test]
    fn enumerated_counts_are_positive_and_stable() {
        let d2 = simplex::<f64>(2);
        let d3 = simplex::<f64>(3);
        let a = exact_gh(&d2, &d3, Strategy::SubsetEnum, &caps()).unwrap();
        let b = exact_gh(&d2, &d3, Strategy::SubsetEnum, &caps()).unwrap();
        assert!(a.enumerated > 0);
        assert_eq!(a.enumerated, b.enumerated);
        assert_eq!(a.witness, b.witness);
    }
}
