use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::{inverse_rational, Int, IntMatrix, UnimodularMatrix};
use crate::error::{Error, Result};

// Replaces columns a and b by (x·a + y·b, p·a + q·b).
fn combine_columns(m: &mut IntMatrix, a: usize, b: usize, x: &Int, y: &Int, p: &Int, q: &Int) {
    for r in 0..m.rows() {
        let ca = m[(r, a)].clone();
        let cb = m[(r, b)].clone();
        m[(r, a)] = x * &ca + y * &cb;
        m[(r, b)] = p * &ca + q * &cb;
    }
}

fn add_column_multiple(m: &mut IntMatrix, target: usize, source: usize, factor: &Int) {
    for r in 0..m.rows() {
        let d = factor * &m[(r, source)];
        m[(r, target)] += d;
    }
}

fn negate_column(m: &mut IntMatrix, c: usize) {
    for r in 0..m.rows() {
        let v = -m[(r, c)].clone();
        m[(r, c)] = v;
    }
}

/// Canonical lower-triangular Hermite normal form under right multiplication.
///
/// Returns `(T, U)` with `Y = T·U`, `U` unimodular, `T` lower triangular with a
/// positive diagonal and every entry left of the diagonal reduced into
/// `[0, T[i][i])`. Both factors are uniquely determined by `Y`.
pub fn hnf_lower_canonical(y: &IntMatrix) -> Result<(IntMatrix, UnimodularMatrix)> {
    if !y.is_square() {
        return Err(Error::Dimension(format!(
            "HNF expects a square matrix, got {}x{}",
            y.rows(),
            y.cols()
        )));
    }
    let n = y.rows();
    let mut t = y.clone();
    // t == y · c throughout.
    let mut c = IntMatrix::identity(n);
    for i in 0..n {
        for j in i + 1..n {
            if t[(i, j)].is_zero() {
                continue;
            }
            let a = t[(i, i)].clone();
            let b = t[(i, j)].clone();
            let eg = a.extended_gcd(&b);
            let (g, x, yy) = (eg.gcd, eg.x, eg.y);
            let p = -(&b / &g);
            let q = &a / &g;
            combine_columns(&mut t, i, j, &x, &yy, &p, &q);
            combine_columns(&mut c, i, j, &x, &yy, &p, &q);
        }
        if t[(i, i)].is_zero() {
            return Err(Error::Singular);
        }
        if t[(i, i)].is_negative() {
            negate_column(&mut t, i);
            negate_column(&mut c, i);
        }
        for j in 0..i {
            let q = t[(i, j)].div_floor(&t[(i, i)]);
            if q.is_zero() {
                continue;
            }
            let f = -q;
            add_column_multiple(&mut t, j, i, &f);
            add_column_multiple(&mut c, j, i, &f);
        }
    }
    let u = inverse_rational(&c)?
        .to_integer()
        .expect("column operations are unimodular");
    Ok((t, UnimodularMatrix::new(u)?))
}

/// Shape predicate for the canonical form produced by [`hnf_lower_canonical`].
pub fn is_canonical_lower_hnf(t: &IntMatrix) -> bool {
    if !t.is_square() {
        return false;
    }
    let n = t.rows();
    (0..n).all(|i| {
        let d = &t[(i, i)];
        d.is_positive()
            && (i + 1..n).all(|j| t[(i, j)].is_zero())
            && (0..i).all(|j| !t[(i, j)].is_negative() && &t[(i, j)] < d)
    })
}
