//! Serializable result records shared by the lattice and polynomial lattice paths.

use serde::{Deserialize, Serialize};

use crate::points::RationalPoints;
use crate::special::pairwise_sum;
use crate::weights::WeightSet;
use rayon::prelude::*;

/// How a merit value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Bernoulli-polynomial (Korobov) or digit formula (Walsh) point sum.
    ClosedForm,
    /// Dual-lattice series cut off at a radius or digit cap.
    TruncatedSeries,
    /// Point sum with the Korobov kernel tabulated from Hurwitz zeta values,
    /// valid for every real smoothness.
    ResidueKernel,
}

/// One nonempty coordinate subset of a merit breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetEntry {
    pub u: Vec<usize>,
    /// Unweighted dual sum for `u`.
    pub inner: f64,
    /// `φ_u`: minimal dual size with all components nonzero.
    pub phi: Option<u64>,
    /// `φ_{u,0}`: minimal dual size allowing zero components.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi0: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeritReport {
    #[serde(rename = "P")]
    pub p_value: f64,
    #[serde(rename = "rho")]
    pub rho_value: Option<f64>,
    pub method: Method,
    pub truncation_bound: Option<f64>,
    #[serde(default)]
    pub per_subset: Vec<SubsetEntry>,
}

impl MeritReport {
    pub(crate) fn value(p_value: f64, method: Method) -> Self {
        MeritReport {
            p_value,
            rho_value: None,
            method,
            truncation_bound: None,
            per_subset: Vec::new(),
        }
    }
}

/// `(1/n) Σ_x Σ_u γ_u ∏_{j∈u} table[x_j]` over a point set whose numerators
/// index `table`. Per-point terms are computed independently and reduced in a
/// fixed order, so the result does not depend on the thread count.
pub(crate) fn weighted_table_mean(
    points: &RationalPoints,
    table: &[f64],
    weights: &WeightSet,
) -> f64 {
    let s = points.dim();
    let terms: Vec<f64> = (0..points.len())
        .into_par_iter()
        .map_init(
            || vec![0.0; s],
            |buf, i| {
                for (b, &x) in buf.iter_mut().zip(points.point(i)) {
                    *b = table[x as usize];
                }
                weights.subset_sum(s, buf)
            },
        )
        .collect();
    pairwise_sum(&terms) / points.len() as f64
}

/// Same sum as [`weighted_table_mean`] with the point rows given by a closure;
/// used by the CBC scans so that candidate merits are bitwise equal to a
/// later re-evaluation of the finished rule.
pub(crate) fn weighted_rows_mean(
    count: usize,
    s: usize,
    weights: &WeightSet,
    row: impl Fn(usize, &mut [f64]),
) -> f64 {
    let mut buf = vec![0.0; s];
    let mut terms = Vec::with_capacity(count);
    for i in 0..count {
        row(i, &mut buf);
        terms.push(weights.subset_sum(s, &buf));
    }
    pairwise_sum(&terms) / count as f64
}
