//! Deciding unimodular isomorphism and enumerating every transform `x ↦ Ux + Z`
//! between two lattice polytopes.
//!
//! Each vertex gets the invariant label `det Σ (w − v)(w − v)ᵗ` over its
//! graph neighbors `w`; edges are weighted by the sum of their end labels. A
//! transform maps a minimum spanning tree of one labeled graph onto a minimum
//! spanning tree of the other, so every transform is found by matching a
//! fixed tree of `P` against all minimum spanning trees of `P′` and checking
//! which induced vertex maps are realized by a unimodular matrix.

mod mst;
mod oracle;
mod transforms;
mod tree;

use std::collections::BTreeMap;

use crate::exactalg::{det, Int, IntMatrix};
use crate::polytope::{EdgeGraph, LatticePolytope};

pub use mst::{all_msts, mst, mst_count};
pub use oracle::{oracle_all_transforms, ORACLE_MAX_DIM, ORACLE_MAX_VERTICES};
pub use transforms::{
    all_transforms, all_transforms_search, decide, find_transform, verify_candidate, Analysis, TransformSet,
};
pub use tree::{enumerate_label_isos, lpt_check, lpt_trace, tree_automorphisms, IsoMap, LabeledTree, LptTrace};

/// Default cap on enumerated spanning trees and on enumerated tree isomorphisms.
pub const DEFAULT_CAP: usize = 100_000;

/// Limits that turn pathological enumerations into explicit errors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    pub trees: usize,
    pub maps: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            trees: DEFAULT_CAP,
            maps: DEFAULT_CAP,
        }
    }
}

/// Vertex/edge graph with positive vertex labels; edge weights are label sums.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledGraph {
    graph: EdgeGraph,
    labels: Vec<Int>,
}

impl LabeledGraph {
    pub fn new(graph: EdgeGraph, labels: Vec<Int>) -> Self {
        assert_eq!(graph.vertex_count(), labels.len(), "one label per vertex");
        LabeledGraph { graph, labels }
    }

    pub fn graph(&self) -> &EdgeGraph {
        &self.graph
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[Int] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> &Int {
        &self.labels[v]
    }

    pub fn weight(&self, a: usize, b: usize) -> Int {
        &self.labels[a] + &self.labels[b]
    }

    /// Edges `(a, b, weight)` with `a < b`, in lexicographic order of `(a, b)`.
    pub fn weighted_edges(&self) -> Vec<(usize, usize, Int)> {
        self.graph.edges().map(|(a, b)| (a, b, self.weight(a, b))).collect()
    }

    /// Label → number of vertices carrying it.
    pub fn label_histogram(&self) -> BTreeMap<Int, usize> {
        let mut h = BTreeMap::new();
        for l in &self.labels {
            *h.entry(l.clone()).or_insert(0) += 1;
        }
        h
    }
}

/// `det Σ_k (v_k − v)(v_k − v)ᵗ` over the `g`-neighbors `v_k` of vertex `v`.
pub fn vertex_label(p: &LatticePolytope, g: &EdgeGraph, v: usize) -> Int {
    let n = p.dim();
    let base = p.vertex(v);
    let diffs: Vec<Vec<Int>> = g
        .neighbors(v)
        .into_iter()
        .map(|w| p.vertex(w).iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    let a = IntMatrix::from_fn(n, n, |i, j| diffs.iter().map(|d| &d[i] * &d[j]).sum());
    det(&a).expect("square matrix")
}

pub fn labeled_graph(p: &LatticePolytope) -> LabeledGraph {
    labeled_graph_with(p, p.edge_graph())
}

pub(crate) fn labeled_graph_with(p: &LatticePolytope, graph: EdgeGraph) -> LabeledGraph {
    let labels = (0..p.vertex_count()).map(|v| vertex_label(p, &graph, v)).collect();
    LabeledGraph { graph, labels }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_affine_map;
    use num_traits::Signed;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn square() -> LatticePolytope {
        LatticePolytope::from_i64(&[&[0, 0], &[1, 0], &[0, 1], &[1, 1]]).unwrap()
    }

    fn simplex() -> LatticePolytope {
        LatticePolytope::from_i64(&[&[0, 0], &[1, 0], &[0, 1]]).unwrap()
    }

    #[test]
    fn label_examples() {
        let sq = labeled_graph(&square());
        assert!(sq.labels().iter().all(|l| *l == Int::from(1)));
        assert!(sq.weighted_edges().iter().all(|(_, _, w)| *w == Int::from(2)));
        let s = simplex();
        let g = s.edge_graph();
        // Vertex (1,0) sees (−1,0) and (−1,1): det [[2,−1],[−1,1]] = 1.
        let idx = s.index_of(&crate::exactalg::int_vec(&[1, 0])).unwrap();
        assert_eq!(vertex_label(&s, &g, idx), Int::from(1));
        assert_eq!(labeled_graph(&s).labels(), &[Int::from(1), Int::from(1), Int::from(1)]);
    }

    #[test]
    fn labels_are_invariant_under_unimodular_maps() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let p = LatticePolytope::from_i64(&[&[0, 0, 0], &[2, 0, 0], &[0, 1, 0], &[0, 0, 1], &[1, 1, 2], &[2, 1, 1]]).unwrap();
        let gw = labeled_graph(&p);
        for _ in 0..50 {
            let map = random_affine_map(&mut rng, 3, 5, 4);
            let q = p.apply_map(&map).unwrap();
            let gq = labeled_graph(&q);
            for v in 0..p.vertex_count() {
                let image = q.index_of(&map.apply(p.vertex(v)).unwrap()).unwrap();
                assert_eq!(gw.label(v), gq.label(image));
            }
            assert_eq!(gw.label_histogram(), gq.label_histogram());
            assert!(gq.labels().iter().all(|l| l.is_positive()));
        }
    }
}
