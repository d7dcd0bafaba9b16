use std::collections::BTreeSet;

use num_traits::Zero;

use super::{all_msts, enumerate_label_isos, labeled_graph, mst, mst_count, Caps, IsoMap, LabeledGraph, LabeledTree};
use crate::error::{Error, Result};
use crate::exactalg::{Int, Rat, RatMatrix, RowSpan, UnimodularMatrix};
use crate::polytope::{LatticePolytope, Point, UnimodularAffineMap};

/// Deduplicated transforms in their canonical (lexicographic) order.
pub type TransformSet = BTreeSet<UnimodularAffineMap>;

/// `n` linearly independent centered vertices, chosen greedily in vertex order,
/// and the inverse of the matrix with those vectors as columns.
#[derive(Clone, Debug)]
struct Frame {
    indices: Vec<usize>,
    inverse: RatMatrix,
}

fn centered(p: &LatticePolytope, v: usize, b: &[Rat]) -> Vec<Rat> {
    p.vertex(v).iter().zip(b).map(|(x, c)| Rat::from_integer(x.clone()) - c).collect()
}

fn frame(p: &LatticePolytope) -> Frame {
    let b = p.vertex_average().0;
    let mut span = RowSpan::new(p.dim());
    let mut indices = Vec::new();
    let mut columns = Vec::new();
    for v in 0..p.vertex_count() {
        let w = centered(p, v, &b);
        if span.insert(&w) {
            indices.push(v);
            columns.push(w);
            if span.is_full() {
                break;
            }
        }
    }
    let w = RatMatrix::from_columns(&columns).expect("n columns of length n");
    Frame {
        indices,
        inverse: w.inverse().expect("full-dimensional polytope"),
    }
}

fn sorted_vertices(p: &LatticePolytope) -> Vec<Point> {
    let mut v = p.vertices().to_vec();
    v.sort();
    v
}

/// `U = 𝒲′𝒲⁻¹` from the images of the frame under `phi`, accepted only if it
/// is integral, unimodular, sends every vertex `v` to `phi(v)` and so maps the
/// vertex set of `p` onto that of `pp`.
fn realize(p: &LatticePolytope, pp: &LatticePolytope, fr: &Frame, pp_sorted: &[Point], phi: &[usize]) -> Option<UnimodularAffineMap> {
    let images: Vec<usize> = fr.indices.iter().map(|&v| phi[v]).collect();
    let b = pp.vertex_average().0;
    let columns: Vec<Vec<Rat>> = images.iter().map(|&v| centered(pp, v, &b)).collect();
    let w_prime = RatMatrix::from_columns(&columns).expect("n columns of length n");
    let u = w_prime.mul(&fr.inverse).expect("square").to_integer()?;
    let u = UnimodularMatrix::new(u).ok()?;
    let image0 = u.apply(p.vertex(fr.indices[0])).expect("dimension");
    let z: Point = pp.vertex(images[0]).iter().zip(&image0).map(|(a, b)| a - b).collect();
    let map = UnimodularAffineMap::new(u, z).expect("dimension");
    let mut mapped: Vec<Point> = p.vertices().iter().map(|v| map.apply(v).expect("dimension")).collect();
    if mapped.iter().zip(phi).any(|(m, &t)| m != pp.vertex(t)) {
        return None;
    }
    mapped.sort();
    (mapped == pp_sorted).then_some(map)
}

/// Checks whether the vertex map `phi` (indices of `p` → indices of `pp`) is
/// induced by a unimodular affine transform, and returns it.
pub fn verify_candidate(p: &LatticePolytope, pp: &LatticePolytope, phi: &IsoMap) -> Option<UnimodularAffineMap> {
    if p.dim() != pp.dim() || p.vertex_count() != pp.vertex_count() || phi.0.len() != p.vertex_count()
        || phi.0.iter().any(|&t| t >= pp.vertex_count())
    {
        return None;
    }
    realize(p, pp, &frame(p), &sorted_vertices(pp), &phi.0)
}

/// Everything the decision procedure needs from one polytope, computed once.
#[derive(Clone, Debug)]
pub struct Analysis {
    polytope: LatticePolytope,
    graph: LabeledGraph,
    tree: LabeledTree,
    frame: Frame,
    sorted: Vec<Point>,
    /// `(vᵢ − vⱼ)ᵗ Q⁻¹ (vᵢ − vⱼ)`, preserved by every transform.
    distance: Vec<Vec<Rat>>,
    /// Label followed by the sorted distances to all other vertices.
    signature: Vec<(Int, Vec<Rat>)>,
}

impl Analysis {
    pub fn new(p: &LatticePolytope) -> Self {
        let graph = labeled_graph(p);
        let tree = mst(&graph);
        let q_inv = p.quadratic_form().matrix().inverse().expect("positive definite");
        let d = p.vertex_count();
        let mut distance = vec![vec![Rat::zero(); d]; d];
        for i in 0..d {
            for j in i + 1..d {
                let x: Vec<Rat> = p.vertex(i).iter().zip(p.vertex(j)).map(|(a, b)| Rat::from_integer(a - b)).collect();
                let qx = q_inv.mul_vec(&x).expect("dimension");
                let s: Rat = x.iter().zip(&qx).map(|(a, b)| a * b).sum();
                distance[i][j] = s.clone();
                distance[j][i] = s;
            }
        }
        let signature = (0..d)
            .map(|v| {
                let mut ds = distance[v].clone();
                ds.sort();
                (graph.label(v).clone(), ds)
            })
            .collect();
        Analysis {
            polytope: p.clone(),
            frame: frame(p),
            sorted: sorted_vertices(p),
            graph,
            tree,
            distance,
            signature,
        }
    }

    pub fn polytope(&self) -> &LatticePolytope {
        &self.polytope
    }

    pub fn labeled_graph(&self) -> &LabeledGraph {
        &self.graph
    }

    /// The fixed minimum spanning tree `T` of this polytope's labeled graph.
    pub fn tree(&self) -> &LabeledTree {
        &self.tree
    }

    fn tree_weight(&self) -> Int {
        self.tree.edges().iter().map(|&(a, b)| self.graph.weight(a, b)).sum()
    }

    /// Cheap necessary conditions for the existence of a transform.
    fn compatible(&self, other: &Analysis) -> bool {
        let sig = |a: &Analysis| {
            let mut s = a.signature.clone();
            s.sort();
            s
        };
        self.polytope.dim() == other.polytope.dim()
            && self.polytope.vertex_count() == other.polytope.vertex_count()
            && self.graph.label_histogram() == other.graph.label_histogram()
            && self.graph.graph().edge_count() == other.graph.graph().edge_count()
            && self.tree_weight() == other.tree_weight()
            && sig(self) == sig(other)
    }

    fn realize(&self, other: &Analysis, phi: &[usize]) -> Option<UnimodularAffineMap> {
        realize(&self.polytope, &other.polytope, &self.frame, &other.sorted, phi)
    }

    /// Matches the fixed tree `T` against every minimum spanning tree of the
    /// other polytope and keeps the vertex maps realized by a transform.
    /// With `first_only` the scan stops at the first transform.
    fn scan_msts(&self, other: &Analysis, caps: Caps, first_only: bool) -> Result<TransformSet> {
        let mut out = TransformSet::new();
        if !self.compatible(other) {
            return Ok(out);
        }
        for t_prime in all_msts(&other.graph, caps.trees)? {
            for phi in enumerate_label_isos(&self.tree, &t_prime, caps.maps)? {
                if let Some(map) = self.realize(other, &phi.0) {
                    out.insert(map);
                    if first_only {
                        return Ok(out);
                    }
                }
            }
        }
        Ok(out)
    }

    /// All transforms mapping this polytope onto `other`.
    pub fn all_transforms(&self, other: &Analysis, caps: Caps) -> Result<TransformSet> {
        self.scan_msts(other, caps, false)
    }

    /// Same set as [`Analysis::all_transforms`], found by embedding the fixed
    /// tree `T` into the other labeled graph vertex by vertex. Partial maps are
    /// pruned by labels, adjacency and the invariant distances, and a branch
    /// ends as soon as the assigned vertices determine the affine map.
    pub fn all_transforms_search(&self, other: &Analysis) -> TransformSet {
        self.search(other, false)
    }

    fn search(&self, other: &Analysis, first_only: bool) -> TransformSet {
        let mut out = TransformSet::new();
        if !self.compatible(other) {
            return out;
        }
        let (order, parent) = self.tree.bfs(0);
        let mut state = Search {
            a: self,
            b: other,
            order: &order,
            parent: &parent,
            phi: vec![usize::MAX; order.len()],
            used: vec![false; order.len()],
            first_only,
            out: &mut out,
        };
        state.step(0, &RowSpan::new(self.polytope.dim()), &[]);
        out
    }

    pub fn find_transform(&self, other: &Analysis, caps: Caps) -> Result<Option<UnimodularAffineMap>> {
        if !self.compatible(other) {
            return Ok(None);
        }
        let within_cap = mst_count(&other.graph) <= Int::from(caps.trees);
        let found = if within_cap {
            match self.scan_msts(other, caps, true) {
                Ok(set) => set,
                Err(Error::CapExceeded { .. }) => self.search(other, true),
                Err(e) => return Err(e),
            }
        } else {
            self.search(other, true)
        };
        Ok(found.into_iter().next())
    }
}

struct Search<'a> {
    a: &'a Analysis,
    b: &'a Analysis,
    order: &'a [usize],
    parent: &'a [Option<usize>],
    phi: Vec<usize>,
    used: Vec<bool>,
    first_only: bool,
    out: &'a mut TransformSet,
}

impl Search<'_> {
    fn done(&self) -> bool {
        self.first_only && !self.out.is_empty()
    }

    /// `frame` lists `(vertex, image)` pairs whose differences from the first
    /// pair are linearly independent; `span` holds those differences.
    fn step(&mut self, k: usize, span: &RowSpan, frame: &[(usize, usize)]) {
        if k == self.order.len() || self.done() {
            return;
        }
        let v = self.order[k];
        let candidates: Vec<usize> = match self.parent[v] {
            None => (0..self.phi.len()).collect(),
            Some(p) => self.b.graph.graph().neighbors(self.phi[p]),
        };
        for c in candidates {
            if self.used[c] || self.a.signature[v] != self.b.signature[c] {
                continue;
            }
            let consistent = self.order[..k]
                .iter()
                .all(|&u| self.a.distance[u][v] == self.b.distance[self.phi[u]][c]);
            if !consistent {
                continue;
            }
            let mut next_span = span.clone();
            let mut next_frame = frame.to_vec();
            match frame.first() {
                None => next_frame.push((v, c)),
                Some(&(base, _)) => {
                    let diff: Vec<Rat> = self
                        .a
                        .polytope
                        .vertex(v)
                        .iter()
                        .zip(self.a.polytope.vertex(base))
                        .map(|(x, y)| Rat::from_integer(x - y))
                        .collect();
                    if next_span.insert(&diff) {
                        next_frame.push((v, c));
                    }
                }
            }
            if next_span.is_full() {
                if let Some(map) = self.affine_from(&next_frame) {
                    self.out.insert(map);
                }
            } else {
                self.phi[v] = c;
                self.used[c] = true;
                self.step(k + 1, &next_span, &next_frame);
                self.used[c] = false;
                self.phi[v] = usize::MAX;
            }
            if self.done() {
                return;
            }
        }
    }

    fn affine_from(&self, frame: &[(usize, usize)]) -> Option<UnimodularAffineMap> {
        let (p, pp) = (&self.a.polytope, &self.b.polytope);
        let (v0, c0) = frame[0];
        let diffs = |poly: &LatticePolytope, base: usize, pick: &dyn Fn(&(usize, usize)) -> usize| {
            let cols: Vec<Vec<Rat>> = frame[1..]
                .iter()
                .map(|pair| {
                    poly.vertex(pick(pair))
                        .iter()
                        .zip(poly.vertex(base))
                        .map(|(x, y)| Rat::from_integer(x - y))
                        .collect()
                })
                .collect();
            RatMatrix::from_columns(&cols).expect("n columns of length n")
        };
        let d = diffs(p, v0, &|pair| pair.0);
        let d_prime = diffs(pp, c0, &|pair| pair.1);
        let u = d_prime.mul(&d.inverse().expect("independent")).expect("square").to_integer()?;
        let u = UnimodularMatrix::new(u).ok()?;
        let image0 = u.apply(p.vertex(v0)).expect("dimension");
        let z: Point = pp.vertex(c0).iter().zip(&image0).map(|(a, b)| a - b).collect();
        let map = UnimodularAffineMap::new(u, z).expect("dimension");
        let mut mapped: Vec<Point> = p.vertices().iter().map(|v| map.apply(v).expect("dimension")).collect();
        mapped.sort();
        (mapped == self.b.sorted).then_some(map)
    }
}

/// Every unimodular affine transform mapping the vertices of `p` onto those of `pp`.
pub fn all_transforms(p: &LatticePolytope, pp: &LatticePolytope, caps: Caps) -> Result<TransformSet> {
    if p.dim() != pp.dim() || p.vertex_count() != pp.vertex_count() {
        return Ok(TransformSet::new());
    }
    Analysis::new(p).all_transforms(&Analysis::new(pp), caps)
}

/// [`all_transforms`] by pruned tree embedding; never hits a cap.
pub fn all_transforms_search(p: &LatticePolytope, pp: &LatticePolytope) -> TransformSet {
    if p.dim() != pp.dim() || p.vertex_count() != pp.vertex_count() {
        return TransformSet::new();
    }
    Analysis::new(p).all_transforms_search(&Analysis::new(pp))
}

/// One transform, if any. Uses the spanning-tree scan while the number of
/// minimum spanning trees stays within the cap and the embedding search beyond it.
pub fn find_transform(p: &LatticePolytope, pp: &LatticePolytope, caps: Caps) -> Result<Option<UnimodularAffineMap>> {
    if p.dim() != pp.dim() || p.vertex_count() != pp.vertex_count() {
        return Ok(None);
    }
    Analysis::new(p).find_transform(&Analysis::new(pp), caps)
}

pub fn decide(p: &LatticePolytope, pp: &LatticePolytope, caps: Caps) -> Result<bool> {
    Ok(find_transform(p, pp, caps)?.is_some())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::IntMatrix;
    use crate::random::{hull_vertices, random_affine_map};
    use crate::uip::{oracle_all_transforms, tree_automorphisms};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn square() -> LatticePolytope {
        LatticePolytope::from_i64(&[&[0, 0], &[1, 0], &[0, 1], &[1, 1]]).unwrap()
    }

    fn simplex() -> LatticePolytope {
        LatticePolytope::from_i64(&[&[0, 0], &[1, 0], &[0, 1]]).unwrap()
    }

    fn linear(rows: &[&[i64]]) -> UnimodularAffineMap {
        UnimodularAffineMap::new(
            UnimodularMatrix::new(IntMatrix::from_i64_rows(rows)).unwrap(),
            vec![Int::from(0); rows.len()],
        )
        .unwrap()
    }

    fn check_sound(p: &LatticePolytope, pp: &LatticePolytope, set: &TransformSet) {
        for map in set {
            assert!(p.apply_map(map).unwrap().same_vertex_set(pp));
        }
    }

    fn random_polytope(rng: &mut ChaCha8Rng, n: usize, count: usize, bound: i64) -> LatticePolytope {
        loop {
            let pts: Vec<Point> = (0..count)
                .map(|_| (0..n).map(|_| Int::from(rng.gen_range(-bound..=bound))).collect())
                .collect();
            if let Some(p) = hull_vertices(pts) {
                return p;
            }
        }
    }

    #[test]
    fn square_and_simplex_symmetries() {
        let sq = all_transforms(&square(), &square(), Caps::default()).unwrap();
        assert_eq!(sq.len(), 8);
        assert_eq!(sq, oracle_all_transforms(&square(), &square()).unwrap());
        let tri = all_transforms(&simplex(), &simplex(), Caps::default()).unwrap();
        assert_eq!(tri.len(), 6);
        assert_eq!(tri, oracle_all_transforms(&simplex(), &simplex()).unwrap());
        assert!(all_transforms(&square(), &simplex(), Caps::default()).unwrap().is_empty());
        assert!(!decide(&square(), &simplex(), Caps::default()).unwrap());
    }

    #[test]
    fn sheared_square_is_a_coset() {
        let shear = linear(&[&[1, 1], &[0, 1]]);
        let sheared = square().apply_map(&shear).unwrap();
        let set = all_transforms(&square(), &sheared, Caps::default()).unwrap();
        assert_eq!(set.len(), 8);
        let auts = all_transforms(&square(), &square(), Caps::default()).unwrap();
        let coset: TransformSet = auts.iter().map(|a| shear.compose(a)).collect();
        assert_eq!(set, coset);
        check_sound(&square(), &sheared, &set);
    }

    #[test]
    fn verify_candidate_examples() {
        let sq = square();
        assert_eq!(
            verify_candidate(&sq, &sq, &IsoMap::identity(4)),
            Some(UnimodularAffineMap::identity(2))
        );
        let rot = UnimodularAffineMap::new(
            UnimodularMatrix::new(IntMatrix::from_i64_rows(&[&[0, -1], &[1, 0]])).unwrap(),
            crate::exactalg::int_vec(&[1, 0]),
        )
        .unwrap();
        let image = sq.apply_map(&rot).unwrap();
        let phi = IsoMap((0..4).map(|v| image.index_of(&rot.apply(sq.vertex(v)).unwrap()).unwrap()).collect());
        assert_eq!(verify_candidate(&sq, &image, &phi), Some(rot));
        // Swapping two adjacent corners of the square is not affine.
        let lex = sq.lex_order();
        assert_eq!(verify_candidate(&lex, &lex, &IsoMap(vec![1, 0, 2, 3])), None);
    }

    #[test]
    fn volume_mismatch_is_rejected() {
        let a = LatticePolytope::from_i64(&[&[0, 0], &[1, 0], &[0, 1], &[1, 1]]).unwrap();
        let b = LatticePolytope::from_i64(&[&[0, 0], &[2, 0], &[0, 1], &[2, 1]]).unwrap();
        assert!(!decide(&a, &b, Caps::default()).unwrap());
        assert!(oracle_all_transforms(&a, &b).unwrap().is_empty());
    }

    #[test]
    fn automorphism_groups() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 2..=3 {
            for _ in 0..6 {
                let p = random_polytope(&mut rng, n, 6, 2);
                let g = all_transforms(&p, &p, Caps::default()).unwrap();
                assert!(g.contains(&UnimodularAffineMap::identity(n)));
                for a in &g {
                    assert!(g.contains(&a.inverse()));
                    for b in &g {
                        assert!(g.contains(&a.compose(b)));
                    }
                }
            }
        }
    }

    #[test]
    fn mst_images_are_msts() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10 {
            let p = random_polytope(&mut rng, 3, 7, 2);
            let map = random_affine_map(&mut rng, 3, 4, 3);
            let q = p.apply_map(&map).unwrap();
            let (ga, gb) = (labeled_graph(&p), labeled_graph(&q));
            let img: Vec<usize> = (0..p.vertex_count()).map(|v| q.index_of(&map.apply(p.vertex(v)).unwrap()).unwrap()).collect();
            let targets: BTreeSet<BTreeSet<(usize, usize)>> =
                all_msts(&gb, 100_000).unwrap().into_iter().map(|t| t.edges().clone()).collect();
            for t in all_msts(&ga, 100_000).unwrap() {
                let e: BTreeSet<(usize, usize)> =
                    t.edges().iter().map(|&(a, b)| (img[a].min(img[b]), img[a].max(img[b]))).collect();
                assert!(targets.contains(&e));
            }
            let auts = tree_automorphisms(&mst(&ga), 100_000).unwrap();
            assert!(auts.contains(&IsoMap::identity(p.vertex_count())));
        }
    }

    #[test]
    fn cap_errors_and_search_fallback() {
        let cube = LatticePolytope::from_i64(&[
            &[0, 0, 0],
            &[1, 0, 0],
            &[0, 1, 0],
            &[0, 0, 1],
            &[1, 1, 0],
            &[1, 0, 1],
            &[0, 1, 1],
            &[1, 1, 1],
        ])
        .unwrap();
        let tight = Caps { trees: 10, maps: 10 };
        assert!(matches!(all_transforms(&cube, &cube, tight), Err(Error::CapExceeded { .. })));
        assert!(decide(&cube, &cube, tight).unwrap());
        let all = all_transforms(&cube, &cube, Caps::default()).unwrap();
        assert_eq!(all.len(), 48);
        assert_eq!(all, all_transforms_search(&cube, &cube));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn agrees_with_oracle(seed in any::<u64>(), n in 1usize..=3, twin in any::<bool>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_polytope(&mut rng, n, n + 4, 2);
            let pp = if twin {
                p.apply_map(&random_affine_map(&mut rng, n, 4, 3)).unwrap()
            } else {
                random_polytope(&mut rng, n, n + 4, 2)
            };
            let got = all_transforms(&p, &pp, Caps::default()).unwrap();
            check_sound(&p, &pp, &got);
            prop_assert_eq!(&got, &oracle_all_transforms(&p, &pp).unwrap());
            prop_assert_eq!(&got, &all_transforms_search(&p, &pp));
            prop_assert_eq!(decide(&p, &pp, Caps::default()).unwrap(), !got.is_empty());
            if twin {
                prop_assert!(!got.is_empty());
            }
        }
    }
}
