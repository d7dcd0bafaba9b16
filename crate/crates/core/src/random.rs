//! Random unimodular matrices and affine maps with small entries.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::exactalg::{Int, IntMatrix, UnimodularMatrix};
use crate::polytope::UnimodularAffineMap;

/// Signed permutation followed by `steps` random elementary row operations
/// with multipliers ±1.
pub fn random_unimodular<R: Rng + ?Sized>(rng: &mut R, n: usize, steps: usize) -> UnimodularMatrix {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut m = IntMatrix::zeros(n, n);
    for (i, &p) in perm.iter().enumerate() {
        m[(i, p)] = Int::from(if rng.gen_bool(0.5) { 1 } else { -1 });
    }
    if n > 1 {
        for _ in 0..steps {
            let i = rng.gen_range(0..n);
            let mut j = rng.gen_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let f = Int::from(if rng.gen_bool(0.5) { 1 } else { -1 });
            for c in 0..n {
                let d = &f * &m[(j, c)];
                m[(i, c)] += d;
            }
        }
    }
    UnimodularMatrix::new(m).expect("elementary operations preserve unimodularity")
}

/// Random unimodular affine map with translation entries in `[-bound, bound]`.
pub fn random_affine_map<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    steps: usize,
    bound: i64,
) -> UnimodularAffineMap {
    let linear = random_unimodular(rng, n, steps);
    let translation = (0..n).map(|_| Int::from(rng.gen_range(-bound..=bound))).collect();
    UnimodularAffineMap::new(linear, translation).expect("consistent dimensions")
}

/// Vertices of the convex hull of `points` (duplicates and non-extreme points
/// dropped), or `None` when the hull is not full-dimensional.
pub fn hull_vertices(mut points: Vec<crate::polytope::Point>) -> Option<crate::polytope::LatticePolytope> {
    points.sort();
    points.dedup();
    let mut k = 0;
    while k < points.len() {
        let others: Vec<&crate::polytope::Point> =
            points.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, p)| p).collect();
        if crate::polytope::in_convex_hull(&others, &points[k]) {
            points.remove(k);
        } else {
            k += 1;
        }
    }
    crate::polytope::verify_vertices(points).ok()
}
