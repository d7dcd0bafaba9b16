//! Graph isomorphism reduces to unimodular polytope isomorphism.
//!
//! A graph `G` on nodes `1..n` becomes the polytope
//! `P(G) = conv({0, e_1, …, e_n} ∪ {e_i + e_j : ij ∈ E})`. After adding a node
//! adjacent to every other node, two graphs are isomorphic iff their
//! polytopes are unimodularly isomorphic.
//!
//! Graph files use 1-based nodes:
//!
//! ```text
//! p <n> <m>
//! e <i> <j>      (m lines, 1 ≤ i < j ≤ n)
//! ```

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::exactalg::{Int, IntMatrix, UnimodularMatrix};
use crate::polytope::text::{parse_int_row, split_lines};
use crate::polytope::{verify_vertices, LatticePolytope, Point, UnimodularAffineMap};

/// Largest node count accepted by [`gip_bruteforce`].
pub const BRUTEFORCE_MAX_NODES: usize = 8;

/// Simple undirected graph on nodes `0..n`; edges stored as `(i, j)` with `i < j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SimpleGraph {
    node_count: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl SimpleGraph {
    /// Rejects self-loops, duplicate edges (in either orientation) and
    /// out-of-range endpoints.
    pub fn new(node_count: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= node_count || b >= node_count {
                return Err(Error::Parameter(format!("edge ({a}, {b}) outside 0..{node_count}")));
            }
            if a == b {
                return Err(Error::Parameter(format!("self-loop at node {a}")));
            }
            if !set.insert((a.min(b), a.max(b))) {
                return Err(Error::Parameter(format!("duplicate edge ({a}, {b})")));
            }
        }
        Ok(SimpleGraph {
            node_count,
            edges: set,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    /// Image under the node relabeling `v ↦ perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> SimpleGraph {
        SimpleGraph::new(self.node_count, self.edges().map(|(a, b)| (perm[a], perm[b])))
            .expect("a permutation keeps the graph simple")
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("p {} {}\n", self.node_count, self.edges.len());
        for (a, b) in &self.edges {
            out.push_str(&format!("e {} {}\n", a + 1, b + 1));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let lines = split_lines(text)?;
        let header = keyword_row(lines[0], 1, 'p')?;
        let n = to_count(&header[0], 1, 3)?;
        let m = to_count(&header[1], 1, 4 + header[0].to_string().len())?;
        if lines.len() != m + 1 {
            let line = (m + 2).min(lines.len() + 1);
            return Err(Error::parse(line, 1, format!("expected {m} edge lines, found {}", lines.len() - 1)));
        }
        let mut edges = BTreeSet::new();
        for (k, line) in lines[1..].iter().enumerate() {
            let line_no = k + 2;
            let e = keyword_row(line, line_no, 'e')?;
            let i_col = 3;
            let j_col = 4 + e[0].to_string().len();
            let i = to_count(&e[0], line_no, i_col)?;
            let j = to_count(&e[1], line_no, j_col)?;
            if i == 0 || i > n {
                return Err(Error::parse(line_no, i_col, format!("node {i} outside 1..={n}")));
            }
            if j == 0 || j > n {
                return Err(Error::parse(line_no, j_col, format!("node {j} outside 1..={n}")));
            }
            if i == j {
                return Err(Error::parse(line_no, j_col, format!("self-loop at node {i}")));
            }
            if i > j {
                return Err(Error::parse(line_no, j_col, "edge endpoints must satisfy i < j"));
            }
            if !edges.insert((i - 1, j - 1)) {
                return Err(Error::parse(line_no, 1, format!("duplicate edge {i} {j}")));
            }
        }
        Ok(SimpleGraph {
            node_count: n,
            edges,
        })
    }
}

fn keyword_row(line: &str, line_no: usize, keyword: char) -> Result<Vec<Int>> {
    let mut prefix = [0u8; 4];
    let prefix = keyword.encode_utf8(&mut prefix);
    let Some(rest) = line.strip_prefix(&*prefix).and_then(|r| r.strip_prefix(' ')) else {
        return Err(Error::parse(line_no, 1, format!("expected a line starting with `{keyword} `")));
    };
    parse_int_row(rest, line_no, 2).map_err(|e| match e {
        Error::Parse { line, column, message } => Error::Parse {
            line,
            column: column + 2,
            message,
        },
        other => other,
    })
}

fn to_count(x: &Int, line: usize, column: usize) -> Result<usize> {
    usize::try_from(x).map_err(|_| Error::parse(line, column, "expected a nonnegative integer"))
}

/// Adds node `n` adjacent to every original node.
pub fn augment_universal(g: &SimpleGraph) -> SimpleGraph {
    let n = g.node_count;
    SimpleGraph::new(n + 1, g.edges().chain((0..n).map(|i| (i, n)))).expect("new node is fresh")
}

/// The point set `{0, e_i, e_i + e_j : ij ∈ E}` in `Z^n`.
pub fn polytope_points(g: &SimpleGraph) -> Vec<Point> {
    let n = g.node_count;
    let unit = |i: usize| -> Point { (0..n).map(|k| Int::from(u8::from(k == i))).collect() };
    let mut pts = vec![vec![Int::from(0); n]];
    pts.extend((0..n).map(unit));
    pts.extend(g.edges().map(|(a, b)| {
        (0..n).map(|k| Int::from(u8::from(k == a || k == b))).collect()
    }));
    pts
}

/// Certified polytope `P(G)` with `1 + n + |E|` vertices.
pub fn graph_to_polytope(g: &SimpleGraph) -> Result<LatticePolytope> {
    if g.node_count == 0 {
        return Err(Error::Construction("graph has no nodes".into()));
    }
    let p = verify_vertices(polytope_points(g)).map_err(|e| Error::Construction(e.to_string()))?;
    debug_assert_eq!(p.vertex_count(), 1 + g.node_count + g.edge_count());
    Ok(p)
}

/// Result of [`reduce_gip_to_uip`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reduction {
    /// The answer is known without building polytopes.
    Trivial(bool),
    /// `G ≅ G′` iff these polytopes are unimodularly isomorphic.
    Pair(LatticePolytope, LatticePolytope),
}

pub fn reduce_gip_to_uip(g: &SimpleGraph, gp: &SimpleGraph) -> Result<Reduction> {
    match (g.edge_count() == 0, gp.edge_count() == 0) {
        (true, true) => Ok(Reduction::Trivial(g.node_count == gp.node_count)),
        (true, false) | (false, true) => Ok(Reduction::Trivial(false)),
        (false, false) => Ok(Reduction::Pair(
            graph_to_polytope(&augment_universal(g))?,
            graph_to_polytope(&augment_universal(gp))?,
        )),
    }
}

/// Permutation matrix `M` with `M·e_i = e_{perm[i]}`.
pub fn permutation_map(perm: &[usize]) -> UnimodularAffineMap {
    let n = perm.len();
    let m = IntMatrix::from_fn(n, n, |r, c| Int::from(u8::from(perm[c] == r)));
    UnimodularAffineMap::new(UnimodularMatrix::new(m).expect("permutation matrices are unimodular"), vec![Int::from(0); n])
        .expect("dimensions agree")
}

/// Some node bijection `perm` with `perm(G) = G′`, by exhaustive search.
pub fn gip_bruteforce(g: &SimpleGraph, gp: &SimpleGraph) -> Result<Option<Vec<usize>>> {
    let n = g.node_count.max(gp.node_count);
    if n > BRUTEFORCE_MAX_NODES {
        return Err(Error::SizeLimit(format!("{n} nodes exceed the brute-force limit of {BRUTEFORCE_MAX_NODES}")));
    }
    if g.node_count != gp.node_count || g.edge_count() != gp.edge_count() {
        return Ok(None);
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut used = vec![false; n];
    Ok(extend(g, gp, &mut perm, &mut used, 0).then_some(perm))
}

// Assigns perm[k..] so that adjacency among assigned nodes is preserved.
fn extend(g: &SimpleGraph, gp: &SimpleGraph, perm: &mut [usize], used: &mut [bool], k: usize) -> bool {
    let n = perm.len();
    if k == n {
        return true;
    }
    for target in 0..n {
        if used[target] {
            continue;
        }
        if (0..k).any(|i| g.has_edge(i, k) != gp.has_edge(perm[i], target)) {
            continue;
        }
        perm[k] = target;
        used[target] = true;
        if extend(g, gp, perm, used, k + 1) {
            return true;
        }
        used[target] = false;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{seq::SliceRandom, Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn graph(n: usize, edges: &[(usize, usize)]) -> SimpleGraph {
        SimpleGraph::new(n, edges.iter().copied()).unwrap()
    }

    fn cycle4() -> SimpleGraph {
        graph(4, &[(0, 1), (1, 2), (2, 3), (0, 3)])
    }

    #[test]
    fn construction_rejects_bad_edges() {
        assert!(SimpleGraph::new(3, [(0, 0)]).is_err());
        assert!(SimpleGraph::new(3, [(0, 1), (1, 0)]).is_err());
        assert!(SimpleGraph::new(3, [(0, 3)]).is_err());
    }

    #[test]
    fn augmentation_examples() {
        let k2 = graph(2, &[(0, 1)]);
        let tri = graph(3, &[(0, 1), (1, 2), (0, 2)]);
        assert_eq!(augment_universal(&k2), tri);
        let path = graph(3, &[(0, 1), (1, 2)]);
        let h = augment_universal(&path);
        assert_eq!((h.node_count(), h.edge_count()), (4, 5));
        let k4: Vec<(usize, usize)> = (0..4).flat_map(|a| (a + 1..4).map(move |b| (a, b))).collect();
        assert_eq!(augment_universal(&tri), graph(4, &k4));
    }

    #[test]
    fn polytope_examples() {
        let edgeless = graph(2, &[]);
        assert_eq!(graph_to_polytope(&edgeless).unwrap(), LatticePolytope::from_i64(&[&[0, 0], &[1, 0], &[0, 1]]).unwrap());
        let k2 = graph(2, &[(0, 1)]);
        assert_eq!(
            graph_to_polytope(&k2).unwrap(),
            LatticePolytope::from_i64(&[&[0, 0], &[1, 0], &[0, 1], &[1, 1]]).unwrap()
        );
        let tri = graph(3, &[(0, 1), (1, 2), (0, 2)]);
        let p = graph_to_polytope(&tri).unwrap();
        assert_eq!((p.dim(), p.vertex_count()), (3, 7));
    }

    #[test]
    fn vertex_count_formula_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..40 {
            let n = rng.gen_range(1..=6);
            let edges: Vec<(usize, usize)> = (0..n)
                .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
                .filter(|_| rng.gen_bool(0.5))
                .collect();
            let g = graph(n, &edges);
            assert_eq!(graph_to_polytope(&g).unwrap().vertex_count(), 1 + n + edges.len());
        }
    }


    #[test]
    fn reduction_branches() {
        assert_eq!(reduce_gip_to_uip(&graph(3, &[]), &graph(3, &[])).unwrap(), Reduction::Trivial(true));
        assert_eq!(reduce_gip_to_uip(&graph(3, &[]), &graph(4, &[])).unwrap(), Reduction::Trivial(false));
        assert_eq!(reduce_gip_to_uip(&graph(2, &[(0, 1)]), &graph(2, &[])).unwrap(), Reduction::Trivial(false));
        let c = cycle4();
        let c2 = c.relabel(&[2, 0, 3, 1]);
        match reduce_gip_to_uip(&c, &c2).unwrap() {
            Reduction::Pair(a, b) => assert_eq!((a.dim(), b.dim(), a.vertex_count()), (5, 5, 14)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn graph_isomorphisms_become_permutation_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let g = graph(4, &[(0, 1), (1, 2), (1, 3)]);
            let mut perm: Vec<usize> = (0..4).collect();
            perm.shuffle(&mut rng);
            let gp = g.relabel(&perm);
            let h = augment_universal(&g);
            let hp = augment_universal(&gp);
            let mut full = perm.clone();
            full.push(4);
            let m = permutation_map(&full);
            assert_eq!(graph_to_polytope(&h).unwrap().apply_map(&m).unwrap(), graph_to_polytope(&hp).unwrap());
        }
    }

    #[test]
    fn bruteforce_examples() {
        let c = cycle4();
        assert_eq!(gip_bruteforce(&c, &c).unwrap(), Some(vec![0, 1, 2, 3]));
        let path = graph(4, &[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(gip_bruteforce(&c, &path).unwrap(), None);
        let tri = graph(3, &[(0, 1), (1, 2), (0, 2)]);
        let perm = gip_bruteforce(&tri, &tri.relabel(&[1, 2, 0])).unwrap().unwrap();
        assert_eq!(tri.relabel(&perm), tri.relabel(&[1, 2, 0]));
        assert!(matches!(gip_bruteforce(&graph(9, &[]), &graph(9, &[])), Err(Error::SizeLimit(_))));
    }

    #[test]
    fn graph_text_round_trip_and_diagnostics() {
        let c = cycle4();
        let text = c.to_text();
        assert_eq!(text, "p 4 4\ne 1 2\ne 1 4\ne 2 3\ne 3 4\n");
        assert_eq!(SimpleGraph::parse(&text).unwrap(), c);
        let cases = [
            ("p 3 1\ne 1 1\n", 2, 5),
            ("p 3 2\ne 1 2\ne 1 2\n", 3, 1),
            ("p 3 1\ne 2 1\n", 2, 5),
            ("p 3 1\ne 1 4\n", 2, 5),
            ("p 3 2\ne 1 2\n", 3, 1),
            ("q 3 0\n", 1, 1),
            ("p 3 1\ne 1  2\n", 2, 5),
            ("p 3 1\ne 1 2", 2, 6),
        ];
        for (text, line, column) in cases {
            match SimpleGraph::parse(text) {
                Err(Error::Parse { line: l, column: c, .. }) => assert_eq!((l, c), (line, column), "{text:?}"),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
    }
}
