//! Full-dimensional lattice polytopes given by their vertices.
//!
//! A [`LatticePolytope`] stores an ordered list of integer vertices (the
//! columns of the vertex matrix). The lexicographically sorted list is the
//! canonical representative of the vertex set. Construction always goes
//! through [`verify_vertices`] or [`LatticePolytope::with_order`], so every
//! value of the type is distinct, full-dimensional and consists of true
//! vertices.

mod affine;
pub mod text;

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

pub use affine::UnimodularAffineMap;

use crate::error::{Error, Result};
use crate::exactalg::{simplex_max, Int, LpOutcome, Rat, RatMatrix, RowSpan};

pub type Point = Vec<Int>;

/// Why a point list does not describe a full-dimensional lattice polytope.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VertexRejection {
    #[error("empty point list")]
    Empty,
    #[error("point {index} has length {len}, expected {dim}")]
    RaggedPoint { index: usize, len: usize, dim: usize },
    #[error("point {index} duplicates point {first}")]
    Duplicate { index: usize, first: usize },
    #[error("points span an affine subspace of dimension {rank} < {dim}")]
    NotFullDimensional { rank: usize, dim: usize },
    #[error("point {index} is a convex combination of the other points")]
    NotAVertex { index: usize },
}

/// Full-dimensional convex lattice polytope represented by its vertices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LatticePolytope {
    dim: usize,
    vertices: Vec<Point>,
}

/// Exact arithmetic mean of the vertices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VertexAverage(pub Vec<Rat>);

/// Positive definite rational symmetric form `x ↦ xᵗQx`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadForm(RatMatrix);

/// 1-skeleton of a polytope on the vertex indices `0..d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeGraph {
    vertex_count: usize,
    edges: BTreeSet<(usize, usize)>,
}

fn as_rat(x: &Int) -> Rat {
    Rat::from_integer(x.clone())
}

/// Affine rank of a point set (dimension of its affine hull).
pub fn affine_rank(points: &[Point]) -> usize {
    let Some(base) = points.first() else { return 0 };
    let mut span = RowSpan::new(base.len());
    for p in &points[1..] {
        let diff: Vec<Rat> = p.iter().zip(base).map(|(a, b)| as_rat(&(a - b))).collect();
        span.insert(&diff);
        if span.is_full() {
            break;
        }
    }
    span.rank()
}

/// Whether `target` lies in the convex hull of `points`, decided by an exact LP.
pub fn in_convex_hull(points: &[&Point], target: &Point) -> bool {
    if points.is_empty() {
        return false;
    }
    let n = target.len();
    let d = points.len();
    let mut a = RatMatrix::zeros(n + 1, d);
    for (k, p) in points.iter().enumerate() {
        for i in 0..n {
            a[(i, k)] = as_rat(&p[i]);
        }
        a[(n, k)] = Rat::one();
    }
    let mut b: Vec<Rat> = target.iter().map(as_rat).collect();
    b.push(Rat::one());
    let objective = vec![Rat::zero(); d];
    simplex_max(&objective, &a, &b)
        .expect("consistent LP dimensions")
        .is_feasible()
}

fn check_points(points: &[Point]) -> std::result::Result<usize, VertexRejection> {
    let Some(first) = points.first() else {
        return Err(VertexRejection::Empty);
    };
    let dim = first.len();
    for (index, p) in points.iter().enumerate() {
        if p.len() != dim {
            return Err(VertexRejection::RaggedPoint {
                index,
                len: p.len(),
                dim,
            });
        }
        if let Some(first) = points[..index].iter().position(|q| q == p) {
            return Err(VertexRejection::Duplicate { index, first });
        }
    }
    let rank = affine_rank(points);
    if rank < dim {
        return Err(VertexRejection::NotFullDimensional { rank, dim });
    }
    for index in 0..points.len() {
        let others: Vec<&Point> = points
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != index)
            .map(|(_, p)| p)
            .collect();
        if in_convex_hull(&others, &points[index]) {
            return Err(VertexRejection::NotAVertex { index });
        }
    }
    Ok(dim)
}

/// Certifies that `points` are the vertices of a full-dimensional lattice
/// polytope and returns it in lexicographic order.
pub fn verify_vertices(points: Vec<Point>) -> std::result::Result<LatticePolytope, VertexRejection> {
    let dim = check_points(&points)?;
    let mut vertices = points;
    vertices.sort();
    Ok(LatticePolytope { dim, vertices })
}

impl LatticePolytope {
    /// Certifies `points` like [`verify_vertices`] but keeps the given order.
    pub fn with_order(points: Vec<Point>) -> std::result::Result<Self, VertexRejection> {
        let dim = check_points(&points)?;
        Ok(LatticePolytope {
            dim,
            vertices: points,
        })
    }

    /// Convenience constructor from small integer literals (lexicographic order).
    pub fn from_i64(points: &[&[i64]]) -> std::result::Result<Self, VertexRejection> {
        verify_vertices(points.iter().map(|p| crate::exactalg::int_vec(p)).collect())
    }

    // Caller guarantees the vertex invariants (e.g. image under an affine bijection).
    pub(crate) fn from_trusted(dim: usize, vertices: Vec<Point>) -> Self {
        debug_assert!(vertices.iter().all(|v| v.len() == dim));
        LatticePolytope { dim, vertices }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &Point {
        &self.vertices[i]
    }

    pub fn index_of(&self, p: &[Int]) -> Option<usize> {
        self.vertices.iter().position(|v| v.as_slice() == p)
    }

    pub fn is_lex_ordered(&self) -> bool {
        self.vertices.windows(2).all(|w| w[0] < w[1])
    }

    /// Same vertex set, sorted ascending with the first coordinate most significant.
    pub fn lex_order(&self) -> LatticePolytope {
        let mut vertices = self.vertices.clone();
        vertices.sort();
        LatticePolytope {
            dim: self.dim,
            vertices,
        }
    }

    pub fn same_vertex_set(&self, other: &LatticePolytope) -> bool {
        self.dim == other.dim && self.lex_order().vertices == other.lex_order().vertices
    }

    pub fn vertex_average(&self) -> VertexAverage {
        let d = Int::from(self.vertices.len());
        let coords = (0..self.dim)
            .map(|i| {
                let sum: Int = self.vertices.iter().map(|v| &v[i]).sum();
                Rat::new(sum, d.clone())
            })
            .collect();
        VertexAverage(coords)
    }

    /// Vertices minus the vertex average, in stored order.
    pub fn centered_vertices(&self) -> Vec<Vec<Rat>> {
        let b = self.vertex_average().0;
        self.vertices
            .iter()
            .map(|v| v.iter().zip(&b).map(|(x, c)| as_rat(x) - c).collect())
            .collect()
    }

    /// `Q = Σ (v − b)(v − b)ᵗ` over the vertices.
    pub fn quadratic_form(&self) -> QuadForm {
        let centered = self.centered_vertices();
        let q = RatMatrix::from_fn(self.dim, self.dim, |i, j| {
            centered
                .iter()
                .fold(Rat::zero(), |acc, w| acc + &w[i] * &w[j])
        });
        QuadForm::new(q).expect("full-dimensional polytopes give positive definite forms")
    }

    /// Vertex/edge graph: `{i, j}` is an edge iff the midpoint of the segment
    /// cannot carry any weight on the other vertices.
    pub fn edge_graph(&self) -> EdgeGraph {
        let d = self.vertex_count();
        let n = self.dim;
        let mut a = RatMatrix::zeros(n + 1, d);
        for (k, v) in self.vertices.iter().enumerate() {
            for i in 0..n {
                a[(i, k)] = as_rat(&v[i]);
            }
            a[(n, k)] = Rat::one();
        }
        let two = Int::from(2);
        let mut edges = BTreeSet::new();
        for i in 0..d {
            for j in i + 1..d {
                let mut b: Vec<Rat> = (0..n)
                    .map(|c| Rat::new(&self.vertices[i][c] + &self.vertices[j][c], two.clone()))
                    .collect();
                b.push(Rat::one());
                let objective: Vec<Rat> = (0..d)
                    .map(|k| if k == i || k == j { Rat::zero() } else { Rat::one() })
                    .collect();
                match simplex_max(&objective, &a, &b).expect("consistent LP dimensions") {
                    LpOutcome::Optimal { value, .. } if value.is_zero() => {
                        edges.insert((i, j));
                    }
                    LpOutcome::Optimal { .. } => {}
                    other => unreachable!("midpoint LP is feasible and bounded: {other:?}"),
                }
            }
        }
        EdgeGraph {
            vertex_count: d,
            edges,
        }
    }

    /// Image `{U v + Z}` in lexicographic order.
    pub fn apply_map(&self, map: &UnimodularAffineMap) -> Result<LatticePolytope> {
        if map.dim() != self.dim {
            return Err(Error::Dimension(format!(
                "map of dimension {} applied to polytope of dimension {}",
                map.dim(),
                self.dim
            )));
        }
        let mut vertices: Vec<Point> = self
            .vertices
            .iter()
            .map(|v| map.apply(v))
            .collect::<Result<_>>()?;
        vertices.sort();
        Ok(LatticePolytope {
            dim: self.dim,
            vertices,
        })
    }

    /// Rational image `{U (v − b)}` of the centered vertex set, sorted.
    pub fn centered_image(&self, u: &crate::exactalg::IntMatrix) -> Result<Vec<Vec<Rat>>> {
        let ur = u.to_rational();
        let mut out: Vec<Vec<Rat>> = self
            .centered_vertices()
            .iter()
            .map(|w| ur.mul_vec(w))
            .collect::<Result<_>>()?;
        out.sort();
        Ok(out)
    }

    /// Centered vertex set `{v − b}`, sorted.
    pub fn sorted_centered(&self) -> Vec<Vec<Rat>> {
        let mut c = self.centered_vertices();
        c.sort();
        c
    }
}

impl fmt::Display for LatticePolytope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&text::write_polytope(self))
    }
}

impl QuadForm {
    /// Accepts `q` when it is symmetric with all leading principal minors positive.
    pub fn new(q: RatMatrix) -> Result<Self> {
        if !q.is_symmetric() {
            return Err(Error::NotPositiveDefinite);
        }
        let n = q.rows();
        for k in 1..=n {
            let minor = RatMatrix::from_fn(k, k, |i, j| q[(i, j)].clone());
            if minor.det()? <= Rat::zero() {
                return Err(Error::NotPositiveDefinite);
            }
        }
        Ok(QuadForm(q))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &RatMatrix {
        &self.0
    }

    /// `xᵗ Q x` for a rational vector.
    pub fn norm_sq(&self, x: &[Rat]) -> Rat {
        let n = self.dim();
        assert_eq!(x.len(), n, "vector length must match the form");
        let mut acc = Rat::zero();
        for i in 0..n {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..n {
                acc += &x[i] * &self.0[(i, j)] * &x[j];
            }
        }
        acc
    }

    pub fn norm_sq_int(&self, x: &[Int]) -> Rat {
        let xr: Vec<Rat> = x.iter().map(as_rat).collect();
        self.norm_sq(&xr)
    }

    /// `V Q Vᵗ`.
    pub fn congruent(&self, v: &crate::exactalg::IntMatrix) -> Result<QuadForm> {
        let vr = v.to_rational();
        let q = vr.mul(&self.0)?.mul(&vr.transpose())?;
        QuadForm::new(q)
    }

    pub fn scaled(&self, factor: &Rat) -> Result<QuadForm> {
        QuadForm::new(self.0.map(|x| x * factor))
    }
}

impl EdgeGraph {
    pub fn from_edges(vertex_count: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let edges = edges
            .into_iter()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .inspect(|&(a, b)| assert!(a != b && b < vertex_count, "invalid edge ({a}, {b})"))
            .collect();
        EdgeGraph {
            vertex_count,
            edges,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as ordered pairs `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    pub fn is_connected(&self) -> bool {
        if self.vertex_count == 0 {
            return true;
        }
        let mut seen = vec![false; self.vertex_count];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for w in self.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}
