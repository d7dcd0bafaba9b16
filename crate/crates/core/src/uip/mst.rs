use std::collections::BTreeMap;

use num_traits::One;

use super::{LabeledGraph, LabeledTree};
use crate::error::{Error, Result};
use crate::exactalg::{det, Int, IntMatrix};

struct Dsu(Vec<usize>);

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu((0..n).collect())
    }

    fn find(&mut self, v: usize) -> usize {
        let mut r = v;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut x = v;
        while self.0[x] != r {
            x = std::mem::replace(&mut self.0[x], r);
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra.max(rb)] = ra.min(rb);
        true
    }
}

fn sorted_edges(gw: &LabeledGraph) -> Vec<(Int, usize, usize)> {
    let mut e: Vec<(Int, usize, usize)> = gw.weighted_edges().into_iter().map(|(a, b, w)| (w, a, b)).collect();
    e.sort();
    e
}

fn assert_connected(gw: &LabeledGraph) {
    assert!(gw.graph().is_connected(), "minimum spanning trees need a connected graph");
}

/// Kruskal's algorithm; ties go to the lexicographically smallest edge.
pub fn mst(gw: &LabeledGraph) -> LabeledTree {
    assert_connected(gw);
    let mut dsu = Dsu::new(gw.vertex_count());
    let chosen: Vec<(usize, usize)> = sorted_edges(gw)
        .into_iter()
        .filter(|&(_, a, b)| dsu.union(a, b))
        .map(|(_, a, b)| (a, b))
        .collect();
    LabeledTree::new(gw.labels().to_vec(), chosen).expect("Kruskal yields a spanning tree")
}

/// One weight class after contracting all lighter edges: its edges between
/// distinct components, with components renumbered `0..nodes`.
struct WeightClass {
    nodes: usize,
    edges: Vec<(usize, usize, (usize, usize))>,
}

fn weight_classes(gw: &LabeledGraph) -> Vec<WeightClass> {
    let mut dsu = Dsu::new(gw.vertex_count());
    let edges = sorted_edges(gw);
    let mut out = Vec::new();
    let mut start = 0;
    while start < edges.len() {
        let w = &edges[start].0;
        let end = start + edges[start..].iter().take_while(|e| &e.0 == w).count();
        let mut ids = BTreeMap::new();
        let mut class = Vec::new();
        for &(_, a, b) in &edges[start..end] {
            let (ra, rb) = (dsu.find(a), dsu.find(b));
            if ra == rb {
                continue;
            }
            let next = ids.len();
            let ia = *ids.entry(ra).or_insert(next);
            let next = ids.len();
            let ib = *ids.entry(rb).or_insert(next);
            class.push((ia, ib, (a, b)));
        }
        for &(_, a, b) in &edges[start..end] {
            dsu.union(a, b);
        }
        if !class.is_empty() {
            out.push(WeightClass {
                nodes: ids.len(),
                edges: class,
            });
        }
        start = end;
    }
    out
}

/// Number of maximal spanning forests of a class multigraph (matrix-tree theorem
/// per connected component).
fn forest_count(class: &WeightClass) -> Int {
    let mut dsu = Dsu::new(class.nodes);
    for &(a, b, _) in &class.edges {
        dsu.union(a, b);
    }
    let mut comps: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in 0..class.nodes {
        comps.entry(dsu.find(v)).or_default().push(v);
    }
    let mut total = Int::one();
    for members in comps.values() {
        if members.len() == 1 {
            continue;
        }
        let k = members.len();
        let pos: BTreeMap<usize, usize> = members.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut lap = IntMatrix::zeros(k, k);
        for &(a, b, _) in &class.edges {
            let (Some(&i), Some(&j)) = (pos.get(&a), pos.get(&b)) else { continue };
            lap[(i, i)] += 1;
            lap[(j, j)] += 1;
            lap[(i, j)] -= 1;
            lap[(j, i)] -= 1;
        }
        let reduced = IntMatrix::from_fn(k - 1, k - 1, |i, j| lap[(i + 1, j + 1)].clone());
        total *= det(&reduced).expect("square matrix");
    }
    total
}

/// Number of minimum spanning trees (exact, without enumerating them).
pub fn mst_count(gw: &LabeledGraph) -> Int {
    assert_connected(gw);
    weight_classes(gw).iter().map(forest_count).product()
}

fn forests(class: &WeightClass) -> Vec<Vec<(usize, usize)>> {
    let mut dsu = Dsu::new(class.nodes);
    let rank = class.edges.iter().filter(|&&(a, b, _)| dsu.union(a, b)).count();
    let mut out = Vec::new();
    fn rec(
        class: &WeightClass,
        k: usize,
        rank: usize,
        parent: &mut Vec<usize>,
        chosen: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if chosen.len() == rank {
            out.push(chosen.clone());
            return;
        }
        if class.edges.len() - k < rank - chosen.len() {
            return;
        }
        let (a, b, e) = class.edges[k];
        let mut dsu = Dsu(parent.clone());
        if dsu.union(a, b) {
            let mut next = dsu.0;
            chosen.push(e);
            rec(class, k + 1, rank, &mut next, chosen, out);
            chosen.pop();
        }
        rec(class, k + 1, rank, parent, chosen, out);
    }
    rec(class, 0, rank, &mut (0..class.nodes).collect(), &mut Vec::new(), &mut out);
    out
}

/// Every minimum spanning tree, sorted by edge set; more than `cap` is an error.
///
/// Kruskal's invariant makes the set of MSTs a product: after contracting all
/// lighter edges, an MST picks one maximal spanning forest from each class of
/// equal-weight edges.
pub fn all_msts(gw: &LabeledGraph, cap: usize) -> Result<Vec<LabeledTree>> {
    assert_connected(gw);
    let classes = weight_classes(gw);
    let count: Int = classes.iter().map(forest_count).product();
    if count > Int::from(cap) {
        return Err(Error::CapExceeded {
            what: "minimum spanning trees",
            cap,
        });
    }
    let mut partial: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
    for class in &classes {
        let options = forests(class);
        partial = partial
            .iter()
            .flat_map(|p| {
                options.iter().map(move |f| {
                    let mut e = p.clone();
                    e.extend_from_slice(f);
                    e
                })
            })
            .collect();
    }
    let mut trees: Vec<LabeledTree> = partial
        .into_iter()
        .map(|edges| LabeledTree::new(gw.labels().to_vec(), edges).expect("spanning tree"))
        .collect();
    trees.sort_by(|a, b| a.edges().cmp(b.edges()));
    Ok(trees)
}
