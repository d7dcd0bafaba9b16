//! Quadratic-form geometry and discrete Gaussian sampling over `Z^n`.
//!
//! The Gaussian function is `ρ_{Q,s,c}(x) = exp(−π‖x − c‖²_Q / s²)` with
//! `‖x‖²_Q = xᵗQx`. Everything that can be exact is exact: the Cholesky
//! factor is derived from the rational decomposition `Q = Rᵗ·diag(d)·R`
//! (`R` unit upper triangular), so only square roots and exponentials are
//! evaluated in high precision.

pub(crate) mod hp;
mod sampler;

use astro_float::RoundingMode;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactalg::{Int, Rat, RatMatrix, RowSpan};
use crate::polytope::QuadForm;

pub use astro_float::BigFloat;
pub use sampler::{sample, GaussianParams, GaussianSampler, DEFAULT_PRECISION, DEFAULT_TAIL_CUT};

/// Guard bits carried by intermediate high-precision computations.
pub(crate) const GUARD_BITS: usize = 64;

/// Largest box (number of integer points) searched by [`successive_minimum`].
pub const ENUMERATION_LIMIT: u64 = 20_000_000;

/// A squared `Q`-norm, kept exact.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SqNorm(pub Rat);

impl SqNorm {
    pub fn value(&self) -> &Rat {
        &self.0
    }
}

/// Exact decomposition `Q = Rᵗ·diag(d)·R` with `R` unit upper triangular.
pub(crate) fn ldl(q: &QuadForm) -> (Vec<Rat>, RatMatrix) {
    let n = q.dim();
    let mut a = q.matrix().clone();
    let mut d = Vec::with_capacity(n);
    let mut r = RatMatrix::identity(n);
    for i in 0..n {
        let pivot = a[(i, i)].clone();
        debug_assert!(pivot.is_positive(), "quadratic forms are positive definite");
        for j in i + 1..n {
            r[(i, j)] = &a[(i, j)] / &pivot;
        }
        for j in i + 1..n {
            for k in i + 1..n {
                let delta = &r[(i, j)] * &a[(i, k)];
                a[(j, k)] -= delta;
            }
        }
        d.push(pivot);
    }
    (d, r)
}

/// Upper-triangular `B` with positive diagonal and `BᵗB = Q`, in high precision.
#[derive(Clone, Debug)]
pub struct Cholesky {
    precision: usize,
    q: QuadForm,
    diag_sq: Vec<Rat>,
    unit: RatMatrix,
    b: Vec<Vec<BigFloat>>,
}

/// Cholesky factor of `Q` with entries carried at `p + 64` bits.
pub fn cholesky(q: &QuadForm, p: usize) -> Cholesky {
    let wp = p + GUARD_BITS;
    let (d, r) = ldl(q);
    let n = q.dim();
    let roots: Vec<BigFloat> = d
        .iter()
        .map(|di| hp::from_rat(di, wp, RoundingMode::ToEven).sqrt(wp, RoundingMode::ToEven))
        .collect();
    let b = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if j < i {
                        BigFloat::from_word(0, wp)
                    } else {
                        roots[i].mul(&hp::from_rat(&r[(i, j)], wp, RoundingMode::ToEven), wp, RoundingMode::ToEven)
                    }
                })
                .collect()
        })
        .collect();
    Cholesky {
        precision: p,
        q: q.clone(),
        diag_sq: d,
        unit: r,
        b,
    }
}

impl Cholesky {
    pub fn dim(&self) -> usize {
        self.diag_sq.len()
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    pub fn entry(&self, i: usize, j: usize) -> &BigFloat {
        &self.b[i][j]
    }

    /// Exact `B[i][i]²`, the ratio of consecutive leading principal minors of `Q`.
    pub fn diag_sq(&self, i: usize) -> &Rat {
        &self.diag_sq[i]
    }

    /// Exact `B[i][j] / B[i][i]`.
    pub fn unit_entry(&self, i: usize, j: usize) -> &Rat {
        &self.unit[(i, j)]
    }

    /// Exact `‖BᵗB − Q‖_∞` (largest absolute entry) of the stored factor.
    pub fn residual(&self) -> Rat {
        let n = self.dim();
        let b: Vec<Vec<Rat>> = self.b.iter().map(|row| row.iter().map(hp::to_rat).collect()).collect();
        let mut worst = Rat::zero();
        for i in 0..n {
            for j in 0..n {
                let btb = (0..n).fold(Rat::zero(), |acc, k| acc + &b[k][i] * &b[k][j]);
                let e = (btb - &self.q.matrix()[(i, j)]).abs();
                if e > worst {
                    worst = e;
                }
            }
        }
        worst
    }

    /// The certified bound `2^{1−p}·‖Q‖_∞` on [`Cholesky::residual`].
    pub fn residual_bound(&self) -> Rat {
        let qmax = self.q.matrix().entries().iter().map(Rat::abs).max().unwrap_or_else(Rat::zero);
        qmax * Rat::new(BigInt::from(2), BigInt::one() << self.precision)
    }
}

/// Exact square of the longest Gram–Schmidt vector of the Cholesky basis.
pub fn gso_max_norm_sq(q: &QuadForm) -> Rat {
    ldl(q).0.into_iter().max().expect("dimension is positive")
}

/// `max_i B[i][i]`, rounded up to `p` bits.
pub fn gso_max_norm(b: &Cholesky) -> BigFloat {
    let m = b.diag_sq.iter().max().expect("dimension is positive");
    sqrt_up(m, b.precision)
}

fn sqrt_up(x: &Rat, p: usize) -> BigFloat {
    let wp = p + GUARD_BITS;
    let mut r = hp::from_rat(x, wp, RoundingMode::Up).sqrt(wp, RoundingMode::Up);
    let exact = hp::to_rat(&r);
    if &(&exact * &exact) == x {
        r.set_precision(p, RoundingMode::Up).expect("rounding to precision");
        return r;
    }
    round_up(r, p)
}

// Inflates by a relative 2^{-(p+8)} before rounding up, absorbing any last-bit
// error of the transcendental kernels at the working precision.
fn round_up(x: BigFloat, p: usize) -> BigFloat {
    let wp = p + GUARD_BITS;
    let bump = BigFloat::from_word(1, wp).add(
        &hp::from_rat(&Rat::new(BigInt::one(), BigInt::one() << (p + 8)), wp, RoundingMode::Up),
        wp,
        RoundingMode::Up,
    );
    let mut y = x.mul(&bump, wp, RoundingMode::Up);
    y.set_precision(p, RoundingMode::Up).expect("rounding to precision");
    y
}

/// Upper bound on `sqrt(ln(2n + 4)/π)` at `p` bits.
pub fn smoothing_factor(n: usize, p: usize) -> BigFloat {
    let wp = p + GUARD_BITS;
    let mut consts = hp::consts();
    let ln = hp::from_i64(2 * n as i64 + 4, wp).ln(wp, RoundingMode::Up, &mut consts);
    let pi = consts.pi(wp, RoundingMode::Down);
    let r = ln.div(&pi, wp, RoundingMode::Up).sqrt(wp, RoundingMode::Up);
    round_up(r, p)
}

/// `‖B*_Q‖·sqrt(ln(2n + 4)/π)`, rounded up to `p` bits.
pub fn min_sigma(q: &QuadForm, p: usize) -> BigFloat {
    let wp = p + GUARD_BITS;
    let g = sqrt_up(&gso_max_norm_sq(q), wp);
    let f = smoothing_factor(q.dim(), wp);
    round_up(g.mul(&f, wp, RoundingMode::Up), p)
}

/// Whether the exact rational `s` satisfies `s ≥ min_sigma(Q, p)`.
pub fn sigma_is_sufficient(q: &QuadForm, s: &Rat, p: usize) -> bool {
    hp::to_rat(&min_sigma(q, p)) <= *s
}

/// Exact `λ_i(Q)²` for `n ≤ 4` by exhaustive enumeration.
///
/// The `i` shortest standard basis vectors bound `λ_i² ≤ R`, and every `x` with
/// `‖x‖²_Q ≤ R` satisfies `x_j² ≤ R·(Q⁻¹)_jj`, so the box of those half-widths
/// contains all candidates. Points are scanned in order of norm and kept while
/// they enlarge the span.
pub fn successive_minimum(q: &QuadForm, i: usize) -> Result<SqNorm> {
    let n = q.dim();
    if n > 4 {
        return Err(Error::UnsupportedDimension(n));
    }
    if i == 0 || i > n {
        return Err(Error::Parameter(format!("successive minimum index {i} outside 1..={n}")));
    }
    let m = q.matrix();
    let mut diag: Vec<Rat> = (0..n).map(|j| m[(j, j)].clone()).collect();
    diag.sort();
    let radius = diag[i - 1].clone();
    let inv = m.inverse().expect("positive definite forms are invertible");
    let half: Vec<i64> = (0..n)
        .map(|j| {
            let bound = hp::floor_rat(&(&radius * &inv[(j, j)]));
            i64::try_from(bound.sqrt()).unwrap_or(i64::MAX)
        })
        .collect();
    let volume = half
        .iter()
        .try_fold(1u64, |acc, h| acc.checked_mul(h.checked_mul(2)?.checked_add(1)? as u64));
    match volume {
        Some(v) if v <= ENUMERATION_LIMIT => {}
        _ => {
            return Err(Error::SizeLimit(format!(
                "successive minimum enumeration box {half:?} exceeds {ENUMERATION_LIMIT} points"
            )))
        }
    }
    let mut candidates: Vec<(Rat, Vec<Int>)> = Vec::new();
    let mut x: Vec<i64> = half.iter().map(|h| -h).collect();
    loop {
        if x.iter().any(|v| *v != 0) {
            let xi: Vec<Int> = x.iter().map(|&v| Int::from(v)).collect();
            let norm = q.norm_sq_int(&xi);
            if norm <= radius {
                candidates.push((norm, xi));
            }
        }
        // Odometer increment over the box.
        let mut k = 0;
        loop {
            if k == n {
                return finish(candidates, n, i);
            }
            if x[k] < half[k] {
                x[k] += 1;
                break;
            }
            x[k] = -half[k];
            k += 1;
        }
    }
}

fn finish(mut candidates: Vec<(Rat, Vec<Int>)>, n: usize, i: usize) -> Result<SqNorm> {
    candidates.sort();
    let mut span = RowSpan::new(n);
    for (norm, x) in candidates {
        let xr: Vec<Rat> = x.iter().cloned().map(Rat::from_integer).collect();
        if span.insert(&xr) && span.rank() == i {
            return Ok(SqNorm(norm));
        }
    }
    unreachable!("the search box contains {i} independent basis vectors")
}

/// `exp(−π‖x − c‖²_Q / s²)` at `p` bits.
pub fn rho(q: &QuadForm, s: &Rat, c: &[Rat], x: &[Int], p: usize) -> Result<BigFloat> {
    if c.len() != q.dim() || x.len() != q.dim() {
        return Err(Error::Dimension(format!(
            "form of dimension {}, center of length {}, point of length {}",
            q.dim(),
            c.len(),
            x.len()
        )));
    }
    if !s.is_positive() {
        return Err(Error::Parameter("s must be positive".into()));
    }
    let diff: Vec<Rat> = x.iter().zip(c).map(|(a, b)| Rat::from_integer(a.clone()) - b).collect();
    let t = q.norm_sq(&diff) / (s * s);
    Ok(exp_neg_pi(&t, p, &mut hp::consts()))
}

/// `exp(−π·t)` at `p` bits for exact rational `t`.
pub(crate) fn exp_neg_pi(t: &Rat, p: usize, consts: &mut astro_float::Consts) -> BigFloat {
    let wp = p + GUARD_BITS;
    let pi = consts.pi(wp, RoundingMode::ToEven);
    let arg = hp::from_rat(t, wp, RoundingMode::ToEven).mul(&pi, wp, RoundingMode::ToEven);
    let mut e = arg.neg().exp(wp, RoundingMode::ToEven, consts);
    e.set_precision(p, RoundingMode::ToEven).expect("rounding to precision");
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::IntMatrix;
    use num_traits::ToPrimitive;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n.into(), d.into())
    }

    fn form(rows: &[&[Rat]]) -> QuadForm {
        QuadForm::new(RatMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()).unwrap()
    }

    fn int_form(rows: &[&[i64]]) -> QuadForm {
        QuadForm::new(IntMatrix::from_i64_rows(rows).to_rational()).unwrap()
    }

    fn simplex_form() -> QuadForm {
        form(&[&[r(2, 3), r(-1, 3)], &[r(-1, 3), r(2, 3)]])
    }

    fn f(x: &BigFloat) -> f64 {
        hp::to_rat(x).to_f64().unwrap()
    }

    #[test]
    fn cholesky_examples() {
        let id = cholesky(&int_form(&[&[1, 0], &[0, 1]]), 128);
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(hp::to_rat(id.entry(i, j)), Rat::from_integer((i == j).into()));
            }
        }
        let c = cholesky(&int_form(&[&[4, 2], &[2, 2]]), 128);
        let expect = [[2, 1], [0, 1]];
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(hp::to_rat(c.entry(i, j)), Rat::from_integer(expect[i][j].into()));
            }
        }
        let s = cholesky(&simplex_form(), 128);
        assert!(s.residual() <= s.residual_bound());
        assert!(s.entry(0, 0).is_positive() && s.entry(1, 1).is_positive());
    }

    #[test]
    fn cholesky_residual_on_random_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..30 {
            let n = rng.gen_range(1..=4);
            let m = loop {
                let m = IntMatrix::from_fn(n, n, |_, _| Int::from(rng.gen_range(-6..=6)));
                if !crate::exactalg::det(&m).unwrap().is_zero() {
                    break m;
                }
            };
            let q = QuadForm::new(m.transpose().mul(&m).unwrap().to_rational()).unwrap();
            for p in [64, 128, 200] {
                let c = cholesky(&q, p);
                assert!(c.residual() <= c.residual_bound());
            }
        }
    }

    #[test]
    fn gso_norm_examples() {
        assert_eq!(hp::to_rat(&gso_max_norm(&cholesky(&int_form(&[&[1, 0], &[0, 1]]), 128))), r(1, 1));
        assert_eq!(hp::to_rat(&gso_max_norm(&cholesky(&int_form(&[&[4, 2], &[2, 2]]), 128))), r(2, 1));
    }

    #[test]
    fn gso_norm_matches_explicit_gram_schmidt() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..40 {
            let m = loop {
                let m = IntMatrix::from_fn(3, 3, |_, _| Int::from(rng.gen_range(-5..=5)));
                if !crate::exactalg::det(&m).unwrap().is_zero() {
                    break m;
                }
            };
            // Columns of m form a basis with Gram matrix mᵗm.
            let q = QuadForm::new(m.transpose().mul(&m).unwrap().to_rational()).unwrap();
            let cols: Vec<Vec<Rat>> = (0..3).map(|j| m.to_rational().column(j)).collect();
            let dot = |a: &[Rat], b: &[Rat]| a.iter().zip(b).fold(Rat::zero(), |s, (x, y)| s + x * y);
            let mut star: Vec<Vec<Rat>> = Vec::new();
            for c in &cols {
                let mut v = c.clone();
                for s in &star {
                    let mu = dot(c, s) / dot(s, s);
                    v = v.iter().zip(s).map(|(a, b)| a - &mu * b).collect();
                }
                star.push(v);
            }
            let oracle = star.iter().map(|s| dot(s, s)).max().unwrap();
            let g = hp::to_rat(&gso_max_norm(&cholesky(&q, 128)));
            assert!(&g * &g >= oracle);
            let sqrt_oracle = oracle.to_f64().unwrap().sqrt();
            assert!((g.to_f64().unwrap() - sqrt_oracle).abs() < 2f64.powi(-32) * sqrt_oracle.max(1.0));
        }
    }

    #[test]
    fn min_sigma_examples() {
        let id = int_form(&[&[1, 0], &[0, 1]]);
        let expect = (8f64.ln() / std::f64::consts::PI).sqrt();
        let m = min_sigma(&id, 128);
        assert!((f(&m) - expect).abs() < 1e-15);
        // Rounded up: the square exceeds ln 8/π at high precision.
        let m2 = hp::to_rat(&m);
        let wp = 256;
        let mut consts = hp::consts();
        let exact = hp::from_i64(8, wp)
            .ln(wp, RoundingMode::ToEven, &mut consts)
            .div(&consts.pi(wp, RoundingMode::ToEven), wp, RoundingMode::ToEven);
        assert!(&m2 * &m2 > hp::to_rat(&exact));
        let four = int_form(&[&[4, 0], &[0, 4]]);
        let m4 = hp::to_rat(&min_sigma(&four, 128));
        let diff = (m4 - m2 * Rat::from_integer(2.into())).abs();
        assert!(diff < Rat::new(1.into(), BigInt::one() << 120));
        // Simplex form: largest GSO norm² is 2/3.
        let simplex = min_sigma(&simplex_form(), 128);
        let expect = (2.0f64 / 3.0).sqrt() * expect;
        assert!((f(&simplex) - expect).abs() < 1e-15);
        assert!(sigma_is_sufficient(&id, &r(82, 100), 128));
        assert!(!sigma_is_sufficient(&id, &r(81, 100), 128));
    }

    #[test]
    fn successive_minima_examples() {
        let id = int_form(&[&[1, 0], &[0, 1]]);
        assert_eq!(successive_minimum(&id, 1).unwrap(), SqNorm(r(1, 1)));
        assert_eq!(successive_minimum(&id, 2).unwrap(), SqNorm(r(1, 1)));
        let d = int_form(&[&[1, 0], &[0, 9]]);
        assert_eq!(successive_minimum(&d, 2).unwrap(), SqNorm(r(9, 1)));
        assert!(matches!(successive_minimum(&id, 3), Err(Error::Parameter(_))));
        let big = QuadForm::new(RatMatrix::identity(5)).unwrap();
        assert_eq!(successive_minimum(&big, 1), Err(Error::UnsupportedDimension(5)));
    }

    // Brute force over [−20, 20]^n: sort by norm and grow the span greedily.
    fn box_oracle(q: &QuadForm, i: usize) -> Rat {
        let n = q.dim();
        let mut pts = Vec::new();
        let mut x = vec![-20i64; n];
        loop {
            if x.iter().any(|v| *v != 0) {
                let xi: Vec<Int> = x.iter().map(|&v| Int::from(v)).collect();
                pts.push((q.norm_sq_int(&xi), xi));
            }
            let mut k = 0;
            while k < n && x[k] == 20 {
                x[k] = -20;
                k += 1;
            }
            if k == n {
                break;
            }
            x[k] += 1;
        }
        finish(pts, n, i).unwrap().0
    }

    #[test]
    fn simplex_successive_minimum_matches_box_oracle() {
        let q = simplex_form();
        for i in 1..=2 {
            assert_eq!(successive_minimum(&q, i).unwrap().0, box_oracle(&q, i));
        }
        assert_eq!(successive_minimum(&q, 2).unwrap().0, r(2, 3));
    }

    #[test]
    fn random_successive_minima_match_box_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..15 {
            let m = loop {
                let m = IntMatrix::from_fn(2, 2, |_, _| Int::from(rng.gen_range(-4..=4)));
                if !crate::exactalg::det(&m).unwrap().is_zero() {
                    break m;
                }
            };
            let q = QuadForm::new(m.transpose().mul(&m).unwrap().to_rational()).unwrap();
            let l1 = successive_minimum(&q, 1).unwrap();
            let l2 = successive_minimum(&q, 2).unwrap();
            assert!(l1 <= l2);
            assert_eq!(l1.0, box_oracle(&q, 1));
            assert_eq!(l2.0, box_oracle(&q, 2));
        }
    }

    #[test]
    fn rho_examples() {
        let id = int_form(&[&[1, 0], &[0, 1]]);
        let c = vec![r(3, 1), r(-2, 1)];
        let x = vec![Int::from(3), Int::from(-2)];
        assert_eq!(hp::to_rat(&rho(&id, &r(1, 1), &c, &x, 128).unwrap()), r(1, 1));
        let zero = vec![r(0, 1), r(0, 1)];
        let e1 = vec![Int::from(1), Int::from(0)];
        let v = f(&rho(&id, &r(1, 1), &zero, &e1, 128).unwrap());
        assert!((v - (-std::f64::consts::PI).exp()).abs() < 1e-17);
        let v = f(&rho(&simplex_form(), &r(1, 1), &zero, &e1, 128).unwrap());
        assert!((v - (-std::f64::consts::PI * 2.0 / 3.0).exp()).abs() < 1e-16);
        assert!(matches!(rho(&id, &r(1, 1), &zero[..1], &e1, 128), Err(Error::Dimension(_))));
    }

    fn truncated_mass(q: &QuadForm, s: &Rat, radius: i64) -> f64 {
        let n = q.dim();
        let mut total = 0.0;
        let mut x = vec![-radius; n];
        let s2 = (s * s).to_f64().unwrap();
        loop {
            let xi: Vec<Int> = x.iter().map(|&v| Int::from(v)).collect();
            total += (-std::f64::consts::PI * q.norm_sq_int(&xi).to_f64().unwrap() / s2).exp();
            let mut k = 0;
            while k < n && x[k] == radius {
                x[k] = -radius;
                k += 1;
            }
            if k == n {
                return total;
            }
            x[k] += 1;
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn gaussian_mass_is_congruence_invariant(seed in 0u64..10_000, s in 1i64..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let q = simplex_form();
            let v = crate::random::random_unimodular(&mut rng, 2, 2);
            let q2 = q.congruent(v.as_matrix()).unwrap();
            let s = Rat::from_integer(s.into());
            let a = truncated_mass(&q, &s, 40);
            let b = truncated_mass(&q2, &s, 40);
            prop_assert!((a - b).abs() < 1e-9 * a);
        }

        #[test]
        fn successive_minima_are_monotone(a in 1i64..6, b in -3i64..4, c in 1i64..6) {
            let m = IntMatrix::from_i64_rows(&[&[a, b], &[0, c]]);
            let q = QuadForm::new(m.transpose().mul(&m).unwrap().to_rational()).unwrap();
            let l1 = successive_minimum(&q, 1).unwrap();
            let l2 = successive_minimum(&q, 2).unwrap();
            prop_assert!(l1 <= l2);
        }
    }
}
