//! Conversions between exact numbers and `astro_float::BigFloat`.

use astro_float::{BigFloat, Consts, RoundingMode, Sign, Word};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::exactalg::Rat;

const WORD_BITS: i64 = Word::BITS as i64;

pub fn consts() -> Consts {
    Consts::new().expect("allocating float constants")
}

/// Exact conversion; the result carries as many bits as `x` needs (at least `p`).
pub fn from_int(x: &BigInt, p: usize) -> BigFloat {
    if x.is_zero() {
        return BigFloat::from_word(0, p);
    }
    let words: Vec<Word> = x.magnitude().to_u64_digits();
    let sign = if x.is_negative() { Sign::Neg } else { Sign::Pos };
    let e = i32::try_from(words.len() as i64 * WORD_BITS).expect("integer fits the exponent range");
    let mut f = BigFloat::from_words(&words, sign, e);
    let need = (x.bits() as usize).max(p);
    if f.precision().is_some_and(|q| q < need) {
        f.set_precision(need, RoundingMode::None).expect("widening precision is exact");
    }
    f
}

/// `num / den` correctly rounded in direction `rm` at precision `p`.
pub fn from_rat(x: &Rat, p: usize, rm: RoundingMode) -> BigFloat {
    let num = from_int(x.numer(), p);
    if x.denom().is_one() {
        let mut f = num;
        f.set_precision(p, rm).expect("rounding to precision");
        return f;
    }
    let den = from_int(x.denom(), p);
    num.div(&den, p, rm)
}

/// Exact dyadic rational value of a finite float.
pub fn to_rat(f: &BigFloat) -> Rat {
    if f.is_zero() {
        return Rat::zero();
    }
    let (words, _, sign, e, _) = f.as_raw_parts().expect("finite float");
    let mut mantissa = BigInt::from(BigUint::new(
        words
            .iter()
            .flat_map(|w| [*w as u32, (*w >> 32) as u32])
            .collect(),
    ));
    if sign == Sign::Neg {
        mantissa = -mantissa;
    }
    let shift = e as i64 - words.len() as i64 * WORD_BITS;
    if shift >= 0 {
        Rat::from_integer(mantissa << shift as usize)
    } else {
        Rat::new(mantissa, BigInt::one() << (-shift) as usize)
    }
}

/// Smallest multiple of `2^-bits` that is ≥ `x`.
pub fn ceil_dyadic(x: &Rat, bits: usize) -> Rat {
    let scale = BigInt::one() << bits;
    let scaled = x * Rat::from_integer(scale.clone());
    Rat::new(scaled.ceil().to_integer(), scale)
}


/// Largest integer ≤ `x`, for rationals.
pub fn floor_rat(x: &Rat) -> BigInt {
    x.numer().div_floor(x.denom())
}

pub fn from_i64(x: i64, p: usize) -> BigFloat {
    from_int(&BigInt::from(x), p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> Rat {
        Rat::new(n.into(), d.into())
    }

    #[test]
    fn integers_round_trip_exactly() {
        for x in [0i64, 1, -1, 7, -123456789, i64::MAX, i64::MIN + 1] {
            let f = from_int(&BigInt::from(x), 128);
            assert_eq!(to_rat(&f), Rat::from_integer(x.into()));
        }
        let big = BigInt::from(3).pow(200);
        assert_eq!(to_rat(&from_int(&big, 64)), Rat::from_integer(big));
    }

    #[test]
    fn rationals_round_in_requested_direction() {
        let third = rat(1, 3);
        let up = to_rat(&from_rat(&third, 128, RoundingMode::Up));
        let down = to_rat(&from_rat(&third, 128, RoundingMode::Down));
        assert!(down < third && third < up);
        assert!(&up - &down < rat(1, 1 << 62) * rat(1, 1 << 62));
        assert_eq!(to_rat(&from_rat(&rat(-5, 4), 64, RoundingMode::Up)), rat(-5, 4));
    }

    #[test]
    fn dyadic_ceiling() {
        assert_eq!(ceil_dyadic(&rat(1, 1), 32), rat(1, 1));
        let c = ceil_dyadic(&rat(1, 3), 4);
        assert_eq!(c, rat(6, 16));
        assert_eq!(floor_rat(&rat(-1, 2)), BigInt::from(-1));
    }
}
