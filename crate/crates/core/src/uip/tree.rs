use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::exactalg::Int;

/// Spanning tree on vertex indices `0..n` together with the vertex labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LabeledTree {
    labels: Vec<Int>,
    edges: BTreeSet<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

/// Vertex bijection `i ↦ self.0[i]` between two labeled trees.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IsoMap(pub Vec<usize>);

impl IsoMap {
    pub fn identity(n: usize) -> Self {
        IsoMap((0..n).collect())
    }

    pub fn apply(&self, v: usize) -> usize {
        self.0[v]
    }

    /// `self ∘ other`: first `other`, then `self`.
    pub fn compose(&self, other: &IsoMap) -> IsoMap {
        IsoMap(other.0.iter().map(|&v| self.0[v]).collect())
    }

    pub fn inverse(&self) -> IsoMap {
        let mut inv = vec![0; self.0.len()];
        for (i, &v) in self.0.iter().enumerate() {
            inv[v] = i;
        }
        IsoMap(inv)
    }
}

impl LabeledTree {
    /// Validates that `edges` form a spanning tree on `0..labels.len()`.
    pub fn new(labels: Vec<Int>, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::Parameter("a tree needs at least one vertex".into()));
        }
        let mut set = BTreeSet::new();
        let mut adj = vec![Vec::new(); n];
        for (a, b) in edges {
            if a == b || a >= n || b >= n {
                return Err(Error::Parameter(format!("invalid tree edge ({a}, {b})")));
            }
            let e = (a.min(b), a.max(b));
            if !set.insert(e) {
                return Err(Error::Parameter(format!("duplicate tree edge ({a}, {b})")));
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        if set.len() != n - 1 {
            return Err(Error::Parameter(format!("{} edges on {n} vertices is not a tree", set.len())));
        }
        for list in adj.iter_mut() {
            list.sort_unstable();
        }
        let tree = LabeledTree { labels, edges: set, adj };
        if tree.bfs_order(0).len() != n {
            return Err(Error::Parameter("tree edges are not connected".into()));
        }
        Ok(tree)
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

    /// Edges `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    /// Whether `phi` is a bijection onto `other` preserving adjacency and labels.
    pub fn is_label_iso(&self, other: &LabeledTree, phi: &IsoMap) -> bool {
        let n = self.vertex_count();
        if other.vertex_count() != n || phi.0.len() != n {
            return false;
        }
        let mut seen = vec![false; n];
        for &v in &phi.0 {
            if v >= n || std::mem::replace(&mut seen[v], true) {
                return false;
            }
        }
        (0..n).all(|v| self.labels[v] == other.labels[phi.0[v]])
            && self.edges.iter().all(|&(a, b)| {
                let (x, y) = (phi.0[a], phi.0[b]);
                other.edges.contains(&(x.min(y), x.max(y)))
            })
    }

    /// Vertices in breadth-first order from `root` (neighbors visited ascending).
    pub(crate) fn bfs_order(&self, root: usize) -> Vec<usize> {
        self.bfs(root).0
    }

    /// Breadth-first order and parent pointers.
    pub(crate) fn bfs(&self, root: usize) -> (Vec<usize>, Vec<Option<usize>>) {
        let n = self.vertex_count();
        let mut parent = vec![None; n];
        let mut seen = vec![false; n];
        let mut order = vec![root];
        seen[root] = true;
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for &w in &self.adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(v);
                    order.push(w);
                }
            }
        }
        (order, parent)
    }

    /// The one or two vertices minimizing the largest component left after removal.
    pub(crate) fn centroids(&self) -> Vec<usize> {
        let n = self.vertex_count();
        let (order, parent) = self.bfs(0);
        let mut size = vec![1usize; n];
        for &v in order.iter().rev() {
            if let Some(p) = parent[v] {
                size[p] += size[v];
            }
        }
        let worst: Vec<usize> = (0..n)
            .map(|v| {
                let below = self.adj[v]
                    .iter()
                    .filter(|&&w| parent[w] == Some(v))
                    .map(|&w| size[w])
                    .max()
                    .unwrap_or(0);
                below.max(n - size[v])
            })
            .collect();
        let best = *worst.iter().min().expect("nonempty tree");
        (0..n).filter(|&v| worst[v] == best).collect()
    }
}

/// Round-by-round record of the leaf-peeling label-preserving isomorphism test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LptTrace {
    pub isomorphic: bool,
    /// Round whose multiset comparison failed; round 0 is the leaf round.
    pub failed_round: Option<usize>,
    /// Per round, for each tree, the `(vertex, new label)` assignments made.
    pub rounds: Vec<[Vec<(usize, usize)>; 2]>,
}

type Tentative = (Vec<usize>, Int);

/// Leaf-peeling comparison of tentative-label multisets.
///
/// This test is not complete: it can report two trees as isomorphic although
/// no label-preserving bijection exists (leaves lose their labels once they
/// are collapsed to new label 1). [`enumerate_label_isos`] is the exact
/// decision; this function is kept for its trace.
pub fn lpt_check(t1: &LabeledTree, t2: &LabeledTree) -> bool {
    lpt_trace(t1, t2).isomorphic
}

pub fn lpt_trace(t1: &LabeledTree, t2: &LabeledTree) -> LptTrace {
    let trees = [t1, t2];
    let mut new_label: [Vec<Option<usize>>; 2] = [vec![None; t1.vertex_count()], vec![None; t2.vertex_count()]];
    let mut rounds = Vec::new();
    let fail = |rounds, round| LptTrace {
        isomorphic: false,
        failed_round: Some(round),
        rounds,
    };

    // Leaves: tentative label (ℓ(v), 1), then all collapse to new label 1.
    let leaves = trees.map(|t| (0..t.vertex_count()).filter(|&v| t.degree(v) <= 1).collect::<Vec<_>>());
    let leaf_multiset = |k: usize| {
        let mut ls: Vec<&Int> = leaves[k].iter().map(|&v| trees[k].label(v)).collect();
        ls.sort();
        ls
    };
    if leaf_multiset(0) != leaf_multiset(1) {
        return fail(rounds, 0);
    }
    let mut round0: [Vec<(usize, usize)>; 2] = Default::default();
    for k in 0..2 {
        for &v in &leaves[k] {
            new_label[k][v] = Some(1);
            round0[k].push((v, 1));
        }
    }
    rounds.push(round0);
    let mut next = 2;

    loop {
        let mut tentative: [Vec<(usize, Tentative)>; 2] = Default::default();
        for k in 0..2 {
            let t = trees[k];
            for v in 0..t.vertex_count() {
                if new_label[k][v].is_some() {
                    continue;
                }
                let unlabeled = t.neighbors(v).iter().filter(|&&w| new_label[k][w].is_none()).count();
                if unlabeled > 1 {
                    continue;
                }
                let mut n: Vec<usize> = t.neighbors(v).iter().filter_map(|&w| new_label[k][w]).collect();
                n.sort_unstable();
                tentative[k].push((v, (n, t.label(v).clone())));
            }
        }
        if tentative[0].is_empty() && tentative[1].is_empty() {
            break;
        }
        let keys = |k: usize| {
            let mut ks: Vec<&Tentative> = tentative[k].iter().map(|(_, key)| key).collect();
            ks.sort();
            ks
        };
        let (k0, k1) = (keys(0), keys(1));
        if k0 != k1 {
            let round = rounds.len();
            return fail(rounds, round);
        }
        let distinct: Vec<&Tentative> = {
            let mut d = k0.clone();
            d.dedup();
            d
        };
        let mut round: [Vec<(usize, usize)>; 2] = Default::default();
        for k in 0..2 {
            for (v, key) in &tentative[k] {
                let rank = distinct.binary_search(&key).expect("key present");
                new_label[k][*v] = Some(next + rank);
                round[k].push((*v, next + rank));
            }
        }
        next += distinct.len();
        rounds.push(round);
    }
    LptTrace {
        isomorphic: true,
        failed_round: None,
        rounds,
    }
}

/// Rooted canonical codes shared between trees through one interner.
struct Codes {
    table: HashMap<(Int, Vec<usize>), usize>,
}

impl Codes {
    fn rooted(&mut self, t: &LabeledTree, root: usize) -> RootedTree {
        let (order, parent) = t.bfs(root);
        let n = t.vertex_count();
        let mut children = vec![Vec::new(); n];
        for &v in &order[1..] {
            children[parent[v].expect("non-root")].push(v);
        }
        let mut code = vec![0usize; n];
        for &v in order.iter().rev() {
            let mut cs: Vec<usize> = children[v].iter().map(|&c| code[c]).collect();
            cs.sort_unstable();
            let fresh = self.table.len();
            code[v] = *self.table.entry((t.label(v).clone(), cs)).or_insert(fresh);
        }
        RootedTree { root, children, code }
    }
}

struct RootedTree {
    root: usize,
    children: Vec<Vec<usize>>,
    code: Vec<usize>,
}

/// Pending bijection between equal-code sibling lists.
type Group = (Vec<usize>, Vec<usize>);

fn child_groups(r1: &RootedTree, r2: &RootedTree, a: usize, b: usize) -> Vec<Group> {
    let mut by_code: BTreeMap<usize, Group> = BTreeMap::new();
    for &c in &r1.children[a] {
        by_code.entry(r1.code[c]).or_default().0.push(c);
    }
    for &c in &r2.children[b] {
        by_code.entry(r2.code[c]).or_default().1.push(c);
    }
    by_code.into_values().collect()
}

fn extend(
    r1: &RootedTree,
    r2: &RootedTree,
    mut pending: Vec<Group>,
    phi: &mut Vec<usize>,
    out: &mut Vec<IsoMap>,
    cap: usize,
) -> Result<()> {
    let Some((a_list, b_list)) = pending.pop() else {
        if out.len() == cap {
            return Err(Error::CapExceeded {
                what: "label-preserving tree isomorphisms",
                cap,
            });
        }
        out.push(IsoMap(phi.clone()));
        return Ok(());
    };
    let Some((&a, a_rest)) = a_list.split_first() else {
        return extend(r1, r2, pending, phi, out, cap);
    };
    for (i, &b) in b_list.iter().enumerate() {
        phi[a] = b;
        let mut next = pending.clone();
        let mut b_rest = b_list.clone();
        b_rest.remove(i);
        next.push((a_rest.to_vec(), b_rest));
        next.extend(child_groups(r1, r2, a, b));
        extend(r1, r2, next, phi, out, cap)?;
    }
    Ok(())
}

/// All label-preserving isomorphisms `T1 → T2`, sorted; more than `cap` is an error.
pub fn enumerate_label_isos(t1: &LabeledTree, t2: &LabeledTree, cap: usize) -> Result<Vec<IsoMap>> {
    let n = t1.vertex_count();
    if t2.vertex_count() != n {
        return Ok(Vec::new());
    }
    let mut codes = Codes { table: HashMap::new() };
    // Isomorphisms map centroids to centroids, so rooting T1 at one centroid
    // and T2 at each centroid covers every isomorphism exactly once.
    let r1 = codes.rooted(t1, t1.centroids()[0]);
    let mut out = Vec::new();
    for c2 in t2.centroids() {
        let r2 = codes.rooted(t2, c2);
        if r1.code[r1.root] != r2.code[r2.root] {
            continue;
        }
        let mut phi = vec![usize::MAX; n];
        phi[r1.root] = r2.root;
        let groups = child_groups(&r1, &r2, r1.root, r2.root);
        extend(&r1, &r2, groups, &mut phi, &mut out, cap)?;
    }
    out.sort();
    Ok(out)
}

pub fn tree_automorphisms(t: &LabeledTree, cap: usize) -> Result<Vec<IsoMap>> {
    enumerate_label_isos(t, t, cap)
}
