use std::fmt;

use crate::error::{Error, Result};
use crate::exactalg::{Int, UnimodularMatrix};

use super::Point;

/// Lattice-preserving affine map `x ↦ U x + Z`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnimodularAffineMap {
    linear: UnimodularMatrix,
    translation: Point,
}

impl UnimodularAffineMap {
    pub fn new(linear: UnimodularMatrix, translation: Point) -> Result<Self> {
        if linear.dim() != translation.len() {
            return Err(Error::Dimension(format!(
                "{0}x{0} matrix with translation of length {1}",
                linear.dim(),
                translation.len()
            )));
        }
        Ok(UnimodularAffineMap {
            linear,
            translation,
        })
    }

    pub fn identity(n: usize) -> Self {
        UnimodularAffineMap {
            linear: UnimodularMatrix::identity(n),
            translation: vec![Int::from(0); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn linear(&self) -> &UnimodularMatrix {
        &self.linear
    }

    pub fn translation(&self) -> &Point {
        &self.translation
    }

    pub fn apply(&self, v: &[Int]) -> Result<Point> {
        let mut out = self.linear.apply(v)?;
        for (x, z) in out.iter_mut().zip(&self.translation) {
            *x += z;
        }
        Ok(out)
    }

    /// `self ∘ other`: first `other`, then `self`.
    pub fn compose(&self, other: &UnimodularAffineMap) -> UnimodularAffineMap {
        let translation = self.apply(&other.translation).expect("matching dimensions");
        UnimodularAffineMap {
            linear: self.linear.compose(&other.linear),
            translation,
        }
    }

    pub fn inverse(&self) -> UnimodularAffineMap {
        let linear = self.linear.inverse();
        let translation = linear
            .apply(&self.translation)
            .expect("matching dimensions")
            .into_iter()
            .map(|x| -x)
            .collect();
        UnimodularAffineMap {
            linear,
            translation,
        }
    }
}

impl fmt::Display for UnimodularAffineMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "U =")?;
        writeln!(f, "{}", self.linear)?;
        let z: Vec<String> = self.translation.iter().map(Int::to_string).collect();
        write!(f, "Z = {}", z.join(" "))
    }
}
