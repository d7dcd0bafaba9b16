use super::TransformSet;
use crate::error::{Error, Result};
use crate::exactalg::{Rat, RatMatrix, RowSpan, UnimodularMatrix};
use crate::polytope::{LatticePolytope, Point, UnimodularAffineMap};

pub const ORACLE_MAX_VERTICES: usize = 10;
pub const ORACLE_MAX_DIM: usize = 3;

fn diff(a: &[crate::exactalg::Int], b: &[crate::exactalg::Int]) -> Vec<Rat> {
    a.iter().zip(b).map(|(x, y)| Rat::from_integer(x - y)).collect()
}

/// Brute-force transform enumeration, independent of graphs and labels.
///
/// An affine map is determined by the image of one affinely independent
/// `(n+1)`-tuple of vertices of `p`; every ordered tuple of distinct vertices
/// of `pp` is tried as that image.
pub fn oracle_all_transforms(p: &LatticePolytope, pp: &LatticePolytope) -> Result<TransformSet> {
    for poly in [p, pp] {
        if poly.vertex_count() > ORACLE_MAX_VERTICES || poly.dim() > ORACLE_MAX_DIM {
            return Err(Error::SizeLimit(format!(
                "oracle handles at most {ORACLE_MAX_VERTICES} vertices in dimension {ORACLE_MAX_DIM}, got {} in dimension {}",
                poly.vertex_count(),
                poly.dim()
            )));
        }
    }
    let mut out = TransformSet::new();
    if p.dim() != pp.dim() || p.vertex_count() != pp.vertex_count() {
        return Ok(out);
    }
    let n = p.dim();
    let mut tuple = vec![0];
    let mut span = RowSpan::new(n);
    for v in 1..p.vertex_count() {
        if span.insert(&diff(p.vertex(v), p.vertex(0))) {
            tuple.push(v);
        }
    }
    let cols: Vec<Vec<Rat>> = tuple[1..].iter().map(|&v| diff(p.vertex(v), p.vertex(0))).collect();
    let d_inv = RatMatrix::from_columns(&cols)?.inverse()?;
    let mut target: Vec<Point> = pp.vertices().to_vec();
    target.sort();

    let d = pp.vertex_count();
    let mut images = Vec::with_capacity(n + 1);
    fn rec(
        p: &LatticePolytope,
        pp: &LatticePolytope,
        tuple: &[usize],
        d_inv: &RatMatrix,
        target: &[Point],
        d: usize,
        images: &mut Vec<usize>,
        out: &mut TransformSet,
    ) {
        if images.len() == tuple.len() {
            let cols: Vec<Vec<Rat>> = images[1..].iter().map(|&c| diff(pp.vertex(c), pp.vertex(images[0]))).collect();
            let Ok(d_prime) = RatMatrix::from_columns(&cols) else { return };
            let Some(u) = d_prime.mul(d_inv).expect("square").to_integer() else { return };
            let Ok(u) = UnimodularMatrix::new(u) else { return };
            let image0 = u.apply(p.vertex(tuple[0])).expect("dimension");
            let z: Point = pp.vertex(images[0]).iter().zip(&image0).map(|(a, b)| a - b).collect();
            let map = UnimodularAffineMap::new(u, z).expect("dimension");
            let mut mapped: Vec<Point> = p.vertices().iter().map(|v| map.apply(v).expect("dimension")).collect();
            mapped.sort();
            if mapped == target {
                out.insert(map);
            }
            return;
        }
        for c in 0..d {
            if !images.contains(&c) {
                images.push(c);
                rec(p, pp, tuple, d_inv, target, d, images, out);
                images.pop();
            }
        }
    }
    rec(p, pp, &tuple, &d_inv, &target, d, &mut images, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_groups_and_limits() {
        let sq = LatticePolytope::from_i64(&[&[0, 0], &[1, 0], &[0, 1], &[1, 1]]).unwrap();
        let g = oracle_all_transforms(&sq, &sq).unwrap();
        assert_eq!(g.len(), 8);
        for a in &g {
            assert!(g.contains(&a.inverse()));
            for b in &g {
                assert!(g.contains(&a.compose(b)));
            }
        }
        let tri = LatticePolytope::from_i64(&[&[0, 0], &[1, 0], &[0, 1]]).unwrap();
        assert_eq!(oracle_all_transforms(&tri, &tri).unwrap().len(), 6);
        assert!(oracle_all_transforms(&sq, &tri).unwrap().is_empty());
        let big = LatticePolytope::from_i64(&[&[0, 0, 0, 0], &[1, 0, 0, 0], &[0, 1, 0, 0], &[0, 0, 1, 0], &[0, 0, 0, 1]]).unwrap();
        assert!(matches!(oracle_all_transforms(&big, &big), Err(Error::SizeLimit(_))));
    }
}
