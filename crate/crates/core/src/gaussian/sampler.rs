use std::collections::HashMap;

use astro_float::{BigFloat, Consts, RoundingMode, Sign, Word};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::Rng;

use super::{hp, ldl, sigma_is_sufficient, GUARD_BITS};
use crate::error::{Error, Result};
use crate::exactalg::{Int, Rat, RatMatrix};
use crate::polytope::QuadForm;

pub const DEFAULT_PRECISION: usize = 128;
pub const DEFAULT_TAIL_CUT: u32 = 7;

// Cumulative tables kept per coordinate before the cache is flushed.
const TABLE_CACHE_LIMIT: usize = 1024;

/// Parameters of `D_{Q,s,c}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaussianParams {
    q: QuadForm,
    s: Rat,
    c: Vec<Rat>,
    precision: usize,
    tail_cut: u32,
}

impl GaussianParams {
    pub fn new(q: QuadForm, s: Rat, c: Vec<Rat>, precision: usize, tail_cut: u32) -> Result<Self> {
        if c.len() != q.dim() {
            return Err(Error::Dimension(format!("center of length {} for a {}-dimensional form", c.len(), q.dim())));
        }
        if !s.is_positive() {
            return Err(Error::Parameter("s must be positive".into()));
        }
        if precision < 64 {
            return Err(Error::Parameter(format!("precision {precision} is below 64 bits")));
        }
        if tail_cut < 6 {
            return Err(Error::Parameter(format!("tail cut {tail_cut} is below 6")));
        }
        Ok(GaussianParams {
            q,
            s,
            c,
            precision,
            tail_cut,
        })
    }

    /// Centered at the origin with default precision and tail cut.
    pub fn centered(q: QuadForm, s: Rat) -> Result<Self> {
        let n = q.dim();
        Self::new(q, s, vec![Rat::zero(); n], DEFAULT_PRECISION, DEFAULT_TAIL_CUT)
    }

    pub fn form(&self) -> &QuadForm {
        &self.q
    }

    pub fn s(&self) -> &Rat {
        &self.s
    }

    pub fn center(&self) -> &[Rat] {
        &self.c
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    pub fn tail_cut(&self) -> u32 {
        self.tail_cut
    }
}

// Cumulative weights of one 1-D window, offsets relative to floor(center).
struct Table {
    first_offset: i64,
    cumulative: Vec<BigFloat>,
}

struct Coordinate {
    // σ_i² = s² / B[i][i]².
    variance: Rat,
    // exp(−2π/σ_i²), the ratio between consecutive weight ratios.
    step: BigFloat,
    // Window half-width floor(τ·σ_i) + 1.
    half_width: i64,
    tables: HashMap<Rat, Table>,
}

/// Randomized nearest-plane sampler for `D_{Q,s,c}` over the Cholesky basis.
///
/// Coordinates are drawn from `n` down to `1`; coordinate `i` is a 1-D discrete
/// Gaussian with parameter `s / B[i][i]` around the back-substituted center,
/// sampled by inverting the cumulative weights of its τ-truncated window.
pub struct GaussianSampler {
    params: GaussianParams,
    unit: RatMatrix,
    coords: Vec<Coordinate>,
    consts: Consts,
}

impl GaussianSampler {
    /// Fails with a parameter error when `s < min_sigma(Q, p)`.
    pub fn new(params: GaussianParams) -> Result<Self> {
        if !sigma_is_sufficient(&params.q, &params.s, params.precision) {
            return Err(Error::Parameter(format!(
                "s = {} is below the sampler bound ‖B*‖·sqrt(ln(2n+4)/π)",
                params.s
            )));
        }
        let wp = params.precision + GUARD_BITS;
        let mut consts = hp::consts();
        let (d, unit) = ldl(&params.q);
        let s2 = &params.s * &params.s;
        let tau2 = Rat::from_integer(BigInt::from(params.tail_cut).pow(2));
        let coords = d
            .iter()
            .map(|di| {
                let variance = &s2 / di;
                let step = super::exp_neg_pi(&(Rat::from_integer(2.into()) / &variance), wp, &mut consts);
                let reach = hp::floor_rat(&(&tau2 * &variance)).sqrt();
                let half_width = i64::try_from(reach).expect("window fits in memory") + 1;
                Coordinate {
                    variance,
                    step,
                    half_width,
                    tables: HashMap::new(),
                }
            })
            .collect();
        Ok(GaussianSampler {
            params,
            unit,
            coords,
            consts,
        })
    }

    pub fn params(&self) -> &GaussianParams {
        &self.params
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Vec<Int> {
        let n = self.params.q.dim();
        let mut x = vec![Int::zero(); n];
        for i in (0..n).rev() {
            let mut center = self.params.c[i].clone();
            for j in i + 1..n {
                center -= &self.unit[(i, j)] * (Rat::from_integer(x[j].clone()) - &self.params.c[j]);
            }
            x[i] = self.draw(i, &center, rng);
        }
        x
    }

    fn draw<R: Rng + ?Sized>(&mut self, i: usize, center: &Rat, rng: &mut R) -> Int {
        let base = center.numer().div_floor(center.denom());
        let frac = center - Rat::from_integer(base.clone());
        let p = self.params.precision;
        let wp = p + GUARD_BITS;
        let coord = &mut self.coords[i];
        if !coord.tables.contains_key(&frac) {
            if coord.tables.len() >= TABLE_CACHE_LIMIT {
                coord.tables.clear();
            }
            let table = build_table(coord, &frac, wp, &mut self.consts);
            coord.tables.insert(frac.clone(), table);
        }
        let table = &coord.tables[&frac];
        let total = table.cumulative.last().expect("window is nonempty");
        let u = uniform(rng, p).mul(total, wp, RoundingMode::ToEven);
        let idx = table.cumulative.partition_point(|w| w <= &u).min(table.cumulative.len() - 1);
        base + table.first_offset + idx as i64
    }
}

// Weights exp(−π(x − f)²/σ²) for offsets x in [−h, h + 1], where f ∈ [0, 1) is
// the fractional part of the center. Consecutive weights differ by the ratio
// r_x = exp(−π(2(x − f) + 1)/σ²), and r_{x+1} = r_x·exp(−2π/σ²), so a whole
// window costs two exponentials.
fn build_table(coord: &Coordinate, frac: &Rat, wp: usize, consts: &mut Consts) -> Table {
    let h = coord.half_width;
    let first = -h;
    let d0 = Rat::from_integer(first.into()) - frac;
    let mut w = super::exp_neg_pi(&(&d0 * &d0 / &coord.variance), wp, consts);
    let two_d0_plus_one = Rat::from_integer(2.into()) * &d0 + Rat::one();
    let mut ratio = super::exp_neg_pi(&(two_d0_plus_one / &coord.variance), wp, consts);
    let len = (2 * h + 2) as usize;
    let mut cumulative = Vec::with_capacity(len);
    let mut acc = BigFloat::from_word(0, wp);
    for _ in 0..len {
        acc = acc.add(&w, wp, RoundingMode::ToEven);
        cumulative.push(acc.clone());
        w = w.mul(&ratio, wp, RoundingMode::ToEven);
        ratio = ratio.mul(&coord.step, wp, RoundingMode::ToEven);
    }
    Table {
        first_offset: first,
        cumulative,
    }
}

// Uniform multiple of 2^{-p} in [0, 1).
fn uniform<R: Rng + ?Sized>(rng: &mut R, p: usize) -> BigFloat {
    let bits = Word::BITS as usize;
    let len = p.div_ceil(bits);
    let mut words: Vec<Word> = (0..len).map(|_| rng.gen::<Word>()).collect();
    let excess = len * bits - p;
    if excess > 0 {
        words[0] &= !((1 << excess) - 1);
    }
    if words.iter().all(|w| *w == 0) {
        return BigFloat::from_word(0, len * bits);
    }
    BigFloat::from_words(&words, Sign::Pos, 0)
}

/// One draw from `D_{Q,s,c}`; builds a fresh sampler.
pub fn sample<R: Rng + ?Sized>(params: &GaussianParams, rng: &mut R) -> Result<Vec<Int>> {
    Ok(GaussianSampler::new(params.clone())?.sample(rng))
}
