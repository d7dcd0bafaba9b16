use num_traits::Zero;

use super::Rat;

/// Incrementally maintained row echelon basis of a rational vector space.
#[derive(Clone, Debug)]
pub struct RowSpan {
    dim: usize,
    // Each stored row has a leading one at `pivots[k]` and zeros in the
    // pivot columns of every other stored row.
    rows: Vec<Vec<Rat>>,
    pivots: Vec<usize>,
}

impl RowSpan {
    pub fn new(dim: usize) -> Self {
        RowSpan {
            dim,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_full(&self) -> bool {
        self.rows.len() == self.dim
    }

    fn reduce(&self, v: &[Rat]) -> Vec<Rat> {
        let mut r = v.to_vec();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if r[p].is_zero() {
                continue;
            }
            let f = r[p].clone();
            for (x, y) in r.iter_mut().zip(row) {
                *x -= &f * y;
            }
        }
        r
    }

    pub fn contains(&self, v: &[Rat]) -> bool {
        assert_eq!(v.len(), self.dim, "vector length must match the span dimension");
        self.reduce(v).iter().all(Zero::is_zero)
    }

    /// Adds `v` if it lies outside the current span; returns whether it was added.
    pub fn insert(&mut self, v: &[Rat]) -> bool {
        assert_eq!(v.len(), self.dim, "vector length must match the span dimension");
        let mut r = self.reduce(v);
        let Some(p) = r.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let lead = r[p].clone();
        for x in r.iter_mut() {
            *x /= &lead;
        }
        for row in self.rows.iter_mut() {
            if row[p].is_zero() {
                continue;
            }
            let f = row[p].clone();
            for (x, y) in row.iter_mut().zip(&r) {
                *x -= &f * y;
            }
        }
        self.rows.push(r);
        self.pivots.push(p);
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[i64]) -> Vec<Rat> {
        xs.iter().map(|&x| Rat::from_integer(x.into())).collect()
    }

    #[test]
    fn tracks_rank_and_membership() {
        let mut s = RowSpan::new(3);
        assert!(s.insert(&v(&[1, 2, 3])));
        assert!(!s.insert(&v(&[2, 4, 6])));
        assert!(s.insert(&v(&[0, 1, 1])));
        assert!(s.contains(&v(&[1, 3, 4])));
        assert!(!s.contains(&v(&[0, 0, 1])));
        assert!(!s.insert(&v(&[0, 0, 0])));
        assert_eq!(s.rank(), 2);
        assert!(s.insert(&v(&[0, 0, 1])));
        assert!(s.is_full());
    }
}
