//! Threshold graphs and an exact maximum-clique search.
//!
//! The cardinality lower bound needs the largest subset of a space whose
//! points are pairwise at distance at least `diam - eps`. That is a maximum
//! clique in the graph with an edge wherever the distance clears the
//! threshold. Spaces here are small, so a plain depth-first branch-and-bound
//! in vertex order is exact and fast; the prune only discards branches that
//! cannot strictly beat the incumbent, so the search returns the
//! lexicographically smallest maximum clique.

use crate::error::GhError;
use crate::scalar::Scalar;
use crate::space::FiniteMetricSpace;
use crate::Result;

/// Undirected graph on the points of a space, stored as bitset rows.
#[derive(Clone, Debug)]
pub struct ThresholdGraph {
    n: usize,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl ThresholdGraph {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false // a graph always has >= 1 vertex (spaces are nonempty)
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words_per_row + j / 64] >> (j % 64) & 1 == 1
    }

    pub fn edge_count(&self) -> usize {
        let total: u32 = self.bits.iter().map(|w| w.count_ones()).sum();
        total as usize / 2
    }
}

/// Graph with an edge between distinct points at distance >= `threshold`.
/// The comparison is exact; callers pick the threshold (e.g. `diam - eps`).
pub fn threshold_graph<T: Scalar>(space: &FiniteMetricSpace<T>, threshold: T) -> ThresholdGraph {
    let n = space.len();
    let words_per_row = n.div_ceil(64);
    let mut bits = vec![0u64; n * words_per_row];
    for i in 0..n {
        for j in 0..n {
            if i != j && space.d(i, j) >= threshold {
                bits[i * words_per_row + j / 64] |= 1 << (j % 64);
            }
        }
    }
    ThresholdGraph {
        n,
        words_per_row,
        bits,
    }
}

/// A maximum clique: vertices in ascending order plus the number of search
/// nodes it took to certify maximality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaxClique {
    pub vertices: Vec<usize>,
    pub nodes: u64,
}

struct CliqueSearch<'a> {
    graph: &'a ThresholdGraph,
    current: Vec<usize>,
    best: Vec<usize>,
    nodes: u64,
    cap: u64,
}

impl<'a> CliqueSearch<'a> {
    fn expand(&mut self, candidates: &[usize]) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.cap {
            return Err(GhError::SearchCapExceeded {
                nodes: self.nodes,
                cap: self.cap,
                best_found: self.best.clone(),
            });
        }
        if self.current.len() > self.best.len() {
            self.best = self.current.clone();
        }
        for (idx, &v) in candidates.iter().enumerate() {
            // Even taking every remaining candidate cannot strictly improve.
            if self.current.len() + (candidates.len() - idx) <= self.best.len() {
                break;
            }
            let narrowed: Vec<usize> = candidates[idx + 1..]
                .iter()
                .copied()
                .filter(|&u| self.graph.adjacent(v, u))
                .collect();
            self.current.push(v);
            let r = self.expand(&narrowed);
            self.current.pop();
            r?;
        }
        Ok(())
    }
}

/// Exact maximum clique via depth-first branch-and-bound in vertex order.
/// Fails with the best clique found so far once `cap` nodes are visited.
pub fn max_clique(graph: &ThresholdGraph, cap: u64) -> Result<MaxClique> {
    let mut search = CliqueSearch {
        graph,
        current: Vec::new(),
        best: Vec::new(),
        nodes: 0,
        cap,
    };
    let all: Vec<usize> = (0..graph.len()).collect();
    search.expand(&all)?;
    Ok(MaxClique {
        vertices: search.best,
        nodes: search.nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{simplex, FiniteMetricSpace};

    fn space(rows: &[&[f64]]) -> FiniteMetricSpace<f64> {
        let m: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        FiniteMetricSpace::from_matrix(m).unwrap()
    }

    #[test]
    fn simplex_threshold_graph_is_complete() {
        let g = threshold_graph(&simplex::<f64>(4), 1.0);
        assert_eq!(g.edge_count(), 6);
        let c = max_clique(&g, 1_000).unwrap();
        assert_eq!(c.vertices, vec![0, 1, 2, 3]);
    }

    #[test]
    fn threshold_cuts_short_edges() {
        // Distances: d(0,1)=2, d(0,2)=1, d(1,2)=1.
        let x = space(&[&[0.0, 2.0, 1.0], &[2.0, 0.0, 1.0], &[1.0, 1.0, 0.0]]);
        let g = threshold_graph(&x, 2.0);
        assert!(g.adjacent(0, 1));
        assert!(!g.adjacent(0, 2));
        let c = max_clique(&g, 1_000).unwrap();
        assert_eq!(c.vertices, vec![0, 1]);

        // At threshold 1 the whole space qualifies.
        let g = threshold_graph(&x, 1.0);
        assert_eq!(max_clique(&g, 1_000).unwrap().vertices, vec![0, 1, 2]);
    }

    #[test]
    fn zero_threshold_relates_everything() {
        let x = space(&[&[0.0, 0.0], &[0.0, 0.0]]);
        let g = threshold_graph(&x, 0.0);
        assert!(g.adjacent(0, 1));
        assert_eq!(max_clique(&g, 100).unwrap().vertices, vec![0, 1]);
    }

    #[test]
    fn lexicographically_first_maximum_clique_wins() {
        // Two maximum cliques {0,2,3} and {1,2,3}? Build: edges 0-2, 0-3,
        // 2-3, 1-2, 1-3 (no 0-1). Maximum cliques are {0,2,3} and {1,2,3};
        // the search must return the first.
        let x = space(&[
            &[0.0, 0.5, 1.0, 1.0],
            &[0.5, 0.0, 1.0, 1.0],
            &[1.0, 1.0, 0.0, 1.0],
            &[1.0, 1.0, 1.0, 0.0],
        ]);
        let g = threshold_graph(&x, 1.0);
        let c = max_clique(&g, 1_000).unwrap();
        assert_eq!(c.vertices, vec![0, 2, 3]);
    }

    #[test]
    fn node_cap_reports_partial_best() {
        let g = threshold_graph(&simplex::<f64>(8), 1.0);
        let err = max_clique(&g, 3).unwrap_err();
        match err {
            GhError::SearchCapExceeded {
                nodes,
                cap,
                best_found,
            } => {
                assert_eq!(cap, 3);
                assert!(nodes > cap);
                assert!(best_found.len() <= 8);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn node_counts_are_deterministic() {
        let g = threshold_graph(&simplex::<f64>(6), 1.0);
        let a = max_clique(&g, 1_000_000).unwrap();
        let b = max_clique(&g, 1_000_000).unwrap();
        assert_eq!(a, b);
    }
}
