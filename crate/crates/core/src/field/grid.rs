use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible node count per direction.
pub const MIN_NODES: usize = 9;

/// Uniform tensor grid on `Q = [Ls, L1] x [-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridQ {
    pub n1: usize,
    pub n2: usize,
    pub ls: f64,
    pub l1: f64,
    pub h1: f64,
    pub h2: f64,
    pub y1: Vec<f64>,
    pub y2: Vec<f64>,
}

impl GridQ {
    pub fn new(ls: f64, l1: f64, n1: usize, n2: usize) -> Result<Self> {
        if n1 < MIN_NODES || n2 < MIN_NODES {
            return Err(Error::Domain(format!("grid needs at least {MIN_NODES} nodes per direction, got {n1}x{n2}")));
        }
        if !(ls < l1) {
            return Err(Error::Domain(format!("grid needs Ls < L1, got [{ls}, {l1}]")));
        }
        let h1 = (l1 - ls) / (n1 - 1) as f64;
        let h2 = 2.0 / (n2 - 1) as f64;
        let y1 = (0..n1).map(|i| if i + 1 == n1 { l1 } else { ls + h1 * i as f64 }).collect();
        let y2 = (0..n2).map(|j| if j + 1 == n2 { 1.0 } else { -1.0 + h2 * j as f64 }).collect();
        Ok(GridQ { n1, n2, ls, l1, h1, h2, y1, y2 })
    }

    pub fn zeros(&self) -> Array2<f64> {
        Array2::zeros((self.n1, self.n2))
    }

    pub fn from_fn(&self, f: impl Fn(f64, f64) -> f64) -> Array2<f64> {
        Array2::from_shape_fn((self.n1, self.n2), |(i, j)| f(self.y1[i], self.y2[j]))
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edges_are_nodes() {
        let g = GridQ::new(0.3, 1.0, 9, 11).unwrap();
        assert_eq!(g.y1[0], 0.3);
        assert_eq!(g.y1[8], 1.0);
        assert_eq!(g.y2[0], -1.0);
        assert_eq!(g.y2[10], 1.0);
        assert_eq!(g.y2[5], 0.0);
        assert!(GridQ::new(0.3, 1.0, 8, 11).is_err());
        assert!(GridQ::new(1.0, 0.3, 9, 11).is_err());
    }
}
