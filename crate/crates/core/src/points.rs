//! Point sets with a common integer denominator.

use serde::{Deserialize, Serialize};

use crate::subset::Subset;

/// `len()` points in `[0,1)^dim`, point `i` coordinate `j` being
/// `numerators[i * dim + j] / denominator`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalPoints {
    denominator: u64,
    dim: usize,
    numerators: Vec<u64>,
}

impl RationalPoints {
    /// Panics if the numerators do not fill whole points or reach the denominator.
    pub fn new(denominator: u64, dim: usize, numerators: Vec<u64>) -> Self {
        assert!(denominator >= 1 && dim >= 1);
        assert_eq!(
            numerators.len() % dim,
            0,
            "numerators must fill whole points"
        );
        assert!(
            numerators.iter().all(|&x| x < denominator),
            "coordinates must lie in [0,1)"
        );
        RationalPoints {
            denominator,
            dim,
            numerators,
        }
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.numerators.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.numerators.is_empty()
    }

    /// Numerators of point `i`.
    pub fn point(&self, i: usize) -> &[u64] {
        &self.numerators[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u64]> {
        self.numerators.chunks_exact(self.dim)
    }

    pub fn coordinate(&self, i: usize, j: usize) -> f64 {
        self.point(i)[j] as f64 / self.denominator as f64
    }

    /// Projection onto the coordinates in `u`.
    pub fn project(&self, u: Subset) -> RationalPoints {
        let idx: Vec<usize> = u.indices().collect();
        assert!(
            !idx.is_empty() && idx.iter().all(|&j| j < self.dim),
            "projection outside dimension"
        );
        let numerators = self
            .iter()
            .flat_map(|p| idx.iter().map(move |&j| p[j]))
            .collect();
        RationalPoints {
            denominator: self.denominator,
            dim: idx.len(),
            numerators,
        }
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        let d = self.denominator as f64;
        self.iter()
            .map(|p| p.iter().map(|&x| x as f64 / d).collect())
            .collect()
    }
}
