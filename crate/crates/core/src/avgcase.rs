//! The average-case distribution `D_s([P])` over a unimodular isomorphism class.
//!
//! [`extract`] turns a full-rank integer matrix `Y` and a vector `z` into a
//! canonical representative `R = U·P + Z` that depends on `P` only through its
//! class: replacing `P` by `VP + v` and `(Y, z)` by `(YV⁻¹, (Vᵗ)⁻¹z)` returns
//! the same `R`. [`ClassSampler`] draws `Y` and `z` from `D_{Q,s}`.

use num_traits::Zero;
use rand::Rng;

use crate::error::{Error, Result};
use crate::exactalg::{hnf_lower_canonical, to_int_vec, Int, IntMatrix, Rat, RatMatrix, RowSpan, UnimodularMatrix};
use crate::gaussian::{self, GaussianParams, GaussianSampler};
use crate::polytope::{LatticePolytope, Point, UnimodularAffineMap};

/// Output of [`extract`]: `R = U·P + Z`, with `R` lexicographically ordered.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExtractResult {
    pub r: LatticePolytope,
    pub u: UnimodularMatrix,
    pub z: Point,
}

impl ExtractResult {
    pub fn map(&self) -> UnimodularAffineMap {
        UnimodularAffineMap::new(self.u.clone(), self.z.clone()).expect("dimensions agree")
    }
}

/// One draw from `D_s([P])` together with the randomness that produced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassSample {
    pub result: ExtractResult,
    pub y: IntMatrix,
    pub z: Point,
    /// Gaussian vectors drawn before `Y` reached full rank.
    pub draws: usize,
}

/// `(U·(V − b_P), U)` where `U` is the unique unimodular matrix with `Y·U⁻¹` in
/// canonical lower-triangular Hermite normal form. Column `j` of the first
/// component is the image of vertex `j`.
pub fn polytime(v_ord: &LatticePolytope, y: &IntMatrix) -> Result<(RatMatrix, UnimodularMatrix)> {
    if y.rows() != v_ord.dim() || y.cols() != v_ord.dim() {
        return Err(Error::Dimension(format!(
            "Y is {}x{} for a {}-dimensional polytope",
            y.rows(),
            y.cols(),
            v_ord.dim()
        )));
    }
    let (_, u) = hnf_lower_canonical(y)?;
    let ur = u.as_matrix().to_rational();
    let columns: Vec<Vec<Rat>> = v_ord
        .centered_vertices()
        .iter()
        .map(|w| ur.mul_vec(w))
        .collect::<Result<_>>()?;
    Ok((RatMatrix::from_columns(&columns)?, u))
}

/// Canonical representative: `R = LexiOrder(U(P − b_P)) − v₁ + (U⁻¹)ᵗz`.
///
/// The result depends only on the vertex set, not on the order of `v_ord`.
pub fn extract(v_ord: &LatticePolytope, y: &IntMatrix, z: &[Int]) -> Result<ExtractResult> {
    let n = v_ord.dim();
    if z.len() != n {
        return Err(Error::Dimension(format!("z has length {}, expected {n}", z.len())));
    }
    let (p1, u) = polytime(v_ord, y)?;
    let mut ordered: Vec<(Vec<Rat>, usize)> = (0..p1.cols()).map(|j| (p1.column(j), j)).collect();
    ordered.sort();
    let (v1, i) = ordered[0].clone();
    let shift = u.inverse().transpose().apply(z)?;
    let shift_r: Vec<Rat> = shift.iter().cloned().map(Rat::from_integer).collect();

    let vertices: Vec<Point> = ordered
        .iter()
        .map(|(w, _)| {
            let p: Vec<Rat> = w.iter().zip(&v1).zip(&shift_r).map(|((a, b), c)| a - b + c).collect();
            to_int_vec(&p).expect("differences of images of lattice points are integral")
        })
        .collect();

    // Z = (U⁻¹)ᵗz − v₁ − U·b_P, which must agree with (U⁻¹)ᵗz − U·v_i.
    let ub = u.as_matrix().to_rational().mul_vec(&v_ord.vertex_average().0)?;
    let z_alg: Vec<Rat> = shift_r.iter().zip(&v1).zip(&ub).map(|((s, a), b)| s - a - b).collect();
    let z_out = to_int_vec(&z_alg).expect("translation is integral");
    let uv = u.apply(v_ord.vertex(i))?;
    let z_alt: Point = shift.iter().zip(&uv).map(|(s, a)| s - a).collect();
    assert_eq!(z_out, z_alt, "both translation formulas agree");

    let r = LatticePolytope::from_trusted(n, vertices);
    debug_assert!(r.is_lex_ordered());
    Ok(ExtractResult { r, u, z: z_out })
}

/// Settings for [`ClassSampler`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SamplerOptions {
    pub precision: usize,
    pub tail_cut: u32,
    /// For `n > 4`, where `λ_n` is not computed, accept `s` without that check.
    pub assume_s_valid: bool,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        SamplerOptions {
            precision: gaussian::DEFAULT_PRECISION,
            tail_cut: gaussian::DEFAULT_TAIL_CUT,
            assume_s_valid: false,
        }
    }
}

/// Checks `s ≥ λ_n(Q)` exactly through `s² ≥ λ_n²`.
pub(crate) fn check_lambda_n(p: &LatticePolytope, s: &Rat, assume_s_valid: bool) -> Result<()> {
    let n = p.dim();
    if n > 4 {
        return if assume_s_valid { Ok(()) } else { Err(Error::UnsupportedDimension(n)) };
    }
    let lambda_sq = gaussian::successive_minimum(&p.quadratic_form(), n)?;
    if &(s * s) < lambda_sq.value() {
        return Err(Error::Parameter(format!(
            "s = {s} is below λ_n(Q) = sqrt({})",
            lambda_sq.value()
        )));
    }
    Ok(())
}

/// Class sampler, reusable across draws for the same `(P, s)`.
pub struct ClassSampler {
    p: LatticePolytope,
    gaussian: GaussianSampler,
}

impl ClassSampler {
    /// Validates `s ≥ max{λ_n(Q), ‖B*_Q‖·sqrt(ln(2n+4)/π)}` for `Q` of `P`.
    pub fn new(p: &LatticePolytope, s: Rat, options: &SamplerOptions) -> Result<Self> {
        let p = p.lex_order();
        check_lambda_n(&p, &s, options.assume_s_valid)?;
        let q = p.quadratic_form();
        let zero = vec![Rat::zero(); p.dim()];
        let params = GaussianParams::new(q, s, zero, options.precision, options.tail_cut)?;
        Ok(ClassSampler {
            p,
            gaussian: GaussianSampler::new(params)?,
        })
    }

    pub fn polytope(&self) -> &LatticePolytope {
        &self.p
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> ClassSample {
        let n = self.p.dim();
        let mut span = RowSpan::new(n);
        let mut rows: Vec<Vec<Int>> = Vec::with_capacity(n);
        let mut draws = 0;
        while rows.len() < n {
            let x = self.gaussian.sample(rng);
            draws += 1;
            let xr: Vec<Rat> = x.iter().cloned().map(Rat::from_integer).collect();
            if span.insert(&xr) {
                rows.push(x);
            }
        }
        let z = self.gaussian.sample(rng);
        let y = IntMatrix::from_rows(rows).expect("n rows of length n");
        let result = extract(&self.p, &y, &z).expect("Y has full rank");
        ClassSample { result, y, z, draws }
    }
}

/// One draw from `D_s([P])` with default options.
pub fn sample_class<R: Rng + ?Sized>(p: &LatticePolytope, s: &Rat, rng: &mut R) -> Result<ClassSample> {
    Ok(ClassSampler::new(p, s.clone(), &SamplerOptions::default())?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::{det, int_vec, is_canonical_lower_hnf};
    use crate::random::{random_affine_map, random_unimodular};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn simplex() -> LatticePolytope {
        LatticePolytope::from_i64(&[&[0, 0], &[1, 0], &[0, 1]]).unwrap()
    }

    fn square() -> LatticePolytope {
        LatticePolytope::from_i64(&[&[0, 0], &[1, 0], &[0, 1], &[1, 1]]).unwrap()
    }

    fn random_full_rank(rng: &mut ChaCha8Rng, n: usize) -> IntMatrix {
        loop {
            let m = IntMatrix::from_fn(n, n, |_, _| Int::from(rng.gen_range(-6..=6)));
            if !det(&m).unwrap().is_zero() {
                return m;
            }
        }
    }

    #[test]
    fn polytime_identity() {
        let p = simplex();
        let (p1, u) = polytime(&p, &IntMatrix::identity(2)).unwrap();
        assert_eq!(u, UnimodularMatrix::identity(2));
        let cols: Vec<Vec<Rat>> = (0..3).map(|j| p1.column(j)).collect();
        assert_eq!(cols, p.centered_vertices());
    }

    #[test]
    fn polytime_tracks_right_multiplication() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = simplex();
        for _ in 0..50 {
            let y = random_full_rank(&mut rng, 2);
            let a = random_unimodular(&mut rng, 2, 3);
            let (_, u) = polytime(&p, &y).unwrap();
            let (_, u2) = polytime(&p, &y.mul(a.as_matrix()).unwrap()).unwrap();
            assert_eq!(u2, u.compose(&a));
            let h = y.to_rational().mul(&u.inverse().as_matrix().to_rational()).unwrap();
            assert!(is_canonical_lower_hnf(&h.to_integer().unwrap()));
        }
        assert_eq!(polytime(&p, &IntMatrix::from_i64_rows(&[&[1, 2], &[2, 4]])).unwrap_err(), Error::Singular);
    }

    #[test]
    fn extract_by_hand_on_simplex() {
        // Centered vertices are (−1/3,−1/3), (−1/3,2/3), (2/3,−1/3); the first is
        // lex-first, so R is the simplex translated by −(0,0).
        let p = simplex();
        let out = extract(&p, &IntMatrix::identity(2), &int_vec(&[0, 0])).unwrap();
        assert_eq!(out.r, simplex());
        assert_eq!(out.u, UnimodularMatrix::identity(2));
        assert_eq!(out.z, int_vec(&[0, 0]));
        let moved = extract(&p, &IntMatrix::identity(2), &int_vec(&[3, -1])).unwrap();
        assert_eq!(moved.z, int_vec(&[3, -1]));
    }

    #[test]
    fn extract_postcondition_replays() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let corpus = [simplex(), square(), LatticePolytope::from_i64(&[&[0, 0, 0], &[2, 0, 0], &[0, 1, 0], &[0, 0, 3], &[1, 1, 1]]).unwrap()];
        for p in &corpus {
            for _ in 0..40 {
                let n = p.dim();
                let y = random_full_rank(&mut rng, n);
                let z: Point = (0..n).map(|_| Int::from(rng.gen_range(-5..=5))).collect();
                let out = extract(p, &y, &z).unwrap();
                assert!(out.r.is_lex_ordered());
                assert_eq!(p.apply_map(&out.map()).unwrap(), out.r);
            }
        }
    }

    #[test]
    fn extract_is_representative_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = LatticePolytope::from_i64(&[&[0, 0], &[2, 0], &[0, 1], &[3, 2]]).unwrap();
        for _ in 0..60 {
            let map = random_affine_map(&mut rng, 2, 4, 5);
            let p2 = p.apply_map(&map).unwrap();
            let v = map.linear();
            let y = random_full_rank(&mut rng, 2);
            let z: Point = (0..2).map(|_| Int::from(rng.gen_range(-5..=5))).collect();
            let y2 = y.mul(v.inverse().as_matrix()).unwrap();
            let z2 = v.transpose().inverse().apply(&z).unwrap();
            let a = extract(&p, &y, &z).unwrap();
            let b = extract(&p2, &y2, &z2).unwrap();
            assert_eq!(a.r, b.r);
            assert_eq!(b.u, a.u.compose(&v.inverse()));
        }
    }

    #[test]
    fn sampler_enforces_parameter_bound() {
        let p = square();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        // λ₂ = 1 for the unit square's form Q = I.
        assert!(matches!(sample_class(&p, &Rat::new(9.into(), 10.into()), &mut rng), Err(Error::Parameter(_))));
        assert!(sample_class(&p, &Rat::from_integer(1.into()), &mut rng).is_ok());
    }

    #[test]
    fn samples_satisfy_contract() {
        let p = square();
        let mut sampler = ClassSampler::new(&p, Rat::from_integer(4.into()), &SamplerOptions::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut long_runs = 0;
        for _ in 0..300 {
            let s = sampler.sample(&mut rng);
            assert_eq!(p.apply_map(&s.result.map()).unwrap(), s.result.r);
            assert!(!det(&s.y).unwrap().is_zero());
            if s.draws > 4 {
                long_runs += 1;
            }
        }
        assert!(long_runs <= 3, "{long_runs} runs needed more than n² draws");
    }

    #[test]
    fn seeded_sampling_is_reproducible() {
        let p = simplex();
        let s = Rat::from_integer(3.into());
        let a = sample_class(&p, &s, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = sample_class(&p, &s, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
    }
}
