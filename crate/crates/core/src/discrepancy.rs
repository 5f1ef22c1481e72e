//! Weighted star discrepancy: upper bounds for lattice and polynomial lattice
//! point sets, and exact values in one and two dimensions.
//!
//! The weighted star discrepancy is
//! `D*_γ = max_u γ_u sup_y |Δ_{P_u}(y)|` with the local discrepancy
//! `Δ_P(y) = #{x ∈ P ∩ [0, y)}/N − vol([0, y))`.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{precondition, resource, usage, Error, Result};
use crate::korobov::{zaremba_rho, LatticeRule};
use crate::points::RationalPoints;
use crate::subset::{nonempty_subsets, Subset};
use crate::walsh::{digit_add, mu_unchecked, residue_column, rho_wal, PolyLatticeRule};
use crate::weights::{SpaceParams, WeightSet};

/// Largest `|u|` for the dual box sums.
pub const R_SUBSET_MAX: usize = 3;
/// Largest lattice modulus for [`r_u_lattice`].
pub const R_LATTICE_N_MAX: u64 = 256;
/// Cap on `b^{m|u|}` for [`r_u_poly`].
pub const R_POLY_WORK_MAX: u64 = 1 << 24;
/// Largest point count for [`exact_star_discrepancy`].
pub const EXACT_N_MAX: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetR {
    pub u: Vec<usize>,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    /// Subset-sum bound with the exact dual box sums `R_u`.
    pub bound_joe: Option<f64>,
    /// Bound in terms of the maximal dual term `ρ`.
    pub bound_rho: Option<f64>,
    /// Set when `γ_u = 0 < γ'_u` for some `u`, making `bound_rho` infinite.
    #[serde(default)]
    pub vacuous: bool,
    pub exact_dstar: Option<f64>,
    #[serde(default)]
    pub per_subset: Vec<SubsetR>,
}

fn check_subset(u: Subset, s: usize) -> Result<()> {
    if u.is_empty() {
        return Err(usage("subset u must be nonempty"));
    }
    if u.max_coord() > s {
        return Err(usage(format!("subset {u} exceeds dimension {s}")));
    }
    if u.len() > R_SUBSET_MAX {
        return Err(resource(format!(
            "dual box sums limited to |u| <= {R_SUBSET_MAX}"
        )));
    }
    Ok(())
}

/// `1 − (1 − 1/N)^{|u|}`.
fn volume_defect(n: f64, size: usize) -> f64 {
    1.0 - (1.0 - 1.0 / n).powi(size as i32)
}

/// `R_{u,N}(z)`: sum of `∏ 1/max(1, |k_j|)` over nonzero dual vectors `k_u`
/// in the box `−N/2 < k_j ≤ N/2`.
pub fn r_u_lattice(rule: &LatticeRule, u: Subset) -> Result<f64> {
    check_subset(u, rule.s())?;
    let n = rule.n();
    if n > R_LATTICE_N_MAX {
        return Err(resource(format!(
            "dual box sums limited to N <= {R_LATTICE_N_MAX}"
        )));
    }
    let zs: Vec<u64> = u.indices().map(|j| rule.z()[j]).collect();
    let lo = -((n as i64 - 1) / 2);
    let hi = n as i64 / 2;
    let ks: Vec<i64> = (lo..=hi).collect();
    // Weight and residue of each box entry for every coordinate.
    let weight = |k: i64| 1.0 / (k.unsigned_abs().max(1)) as f64;
    let mut total = 0.0;
    let mut idx = vec![0usize; zs.len()];
    loop {
        let mut residue = 0u64;
        let mut w = 1.0;
        let mut nonzero = false;
        for (d, &i) in idx.iter().enumerate() {
            let k = ks[i];
            residue = (residue + (k.rem_euclid(n as i64) as u64) * zs[d]) % n;
            w *= weight(k);
            nonzero |= k != 0;
        }
        if nonzero && residue == 0 {
            total += w;
        }
        let mut d = 0;
        while d < idx.len() && idx[d] + 1 == ks.len() {
            idx[d] = 0;
            d += 1;
        }
        if d == idx.len() {
            break;
        }
        idx[d] += 1;
    }
    Ok(total)
}

/// `Σ_u γ_u [1 − (1 − 1/N)^{|u|} + R_{u,N}(z)/2]` over all `u` with `γ_u ≠ 0`.
pub fn star_disc_bound_lattice(
    rule: &LatticeRule,
    weights: &WeightSet,
) -> Result<DiscrepancyReport> {
    weights.ensure_dimension(rule.s())?;
    let n = rule.n() as f64;
    let mut bound = 0.0;
    let mut per_subset = Vec::new();
    for u in nonempty_subsets(rule.s()) {
        let g = weights.weight_unchecked(u);
        if g == 0.0 {
            continue;
        }
        let r = r_u_lattice(rule, u)?;
        bound += g * (volume_defect(n, u.len()) + r / 2.0);
        per_subset.push(SubsetR { u: u.to_vec(), r });
    }
    Ok(DiscrepancyReport {
        bound_joe: Some(bound),
        per_subset,
        ..Default::default()
    })
}

fn require_monotone(weights: &WeightSet, s: usize) -> Result<()> {
    if !weights.check_monotone(s)? {
        return Err(precondition(
            "weights must satisfy gamma_v >= gamma_u whenever v is a subset of u",
        ));
    }
    Ok(())
}

/// Sums `γ'_u [1 − (1 − 1/N)^{|u|} + (ρ/γ_u)^{1/(2α)} · extra(|u|)]`, flagging
/// `γ_u = 0 < γ'_u` as vacuous.
fn rho_bound_sum(
    s: usize,
    n: f64,
    rho: f64,
    alpha: f64,
    weights: &WeightSet,
    target: &WeightSet,
    extra: impl Fn(usize) -> f64,
) -> DiscrepancyReport {
    let mut bound = 0.0;
    let mut vacuous = false;
    for u in nonempty_subsets(s) {
        let gp = target.weight_unchecked(u);
        if gp == 0.0 {
            continue;
        }
        let g = weights.weight_unchecked(u);
        if g == 0.0 {
            vacuous = true;
            continue;
        }
        bound +=
            gp * (volume_defect(n, u.len()) + (rho / g).powf(1.0 / (2.0 * alpha)) * extra(u.len()));
    }
    DiscrepancyReport {
        bound_rho: Some(if vacuous { f64::INFINITY } else { bound }),
        vacuous,
        ..Default::default()
    }
}

/// The `ρ`-based bound for lattice rules with `ρ` computed under `(α, γ)` and
/// the discrepancy weighted by `γ'`. Needs monotone `γ`.
pub fn star_disc_bound_rho_lattice(
    rule: &LatticeRule,
    alpha: f64,
    weights: &WeightSet,
    target: &WeightSet,
) -> Result<DiscrepancyReport> {
    target.ensure_dimension(rule.s())?;
    require_monotone(weights, rule.s())?;
    let params = SpaceParams::new(alpha, weights.clone())?;
    let rho = zaremba_rho(rule, &params)?
        .rho_value
        .expect("zaremba_rho sets rho");
    let n = rule.n() as f64;
    let log2n = n.log2();
    Ok(rho_bound_sum(
        rule.s(),
        n,
        rho,
        alpha,
        weights,
        target,
        |size| (LN_2 * log2n.powi(size as i32) + 3.0 * (2.0 * log2n).powi(size as i32 - 1)) / 2.0,
    ))
}

/// `r̃(k)`: `1` for `k = 0`, else `1/(b^a sin(π κ_{a−1}/b))` with `a = μ(k)`
/// and `κ_{a−1}` the leading digit.
pub fn r_tilde(k: u64, b: u32) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let a = mu_unchecked(k, b as u64);
    let lead = k / (b as u64).pow(a - 1);
    1.0 / ((b as f64).powi(a as i32) * (PI * lead as f64 / b as f64).sin())
}

/// `R_{u,b^m}(q)`: sum of `∏ r̃(k_j)` over nonzero dual vectors with all `k_j < b^m`.
pub fn r_u_poly(rule: &PolyLatticeRule, u: Subset) -> Result<f64> {
    check_subset(u, rule.s())?;
    let n = rule.n();
    if n.checked_pow(u.len() as u32)
        .is_none_or(|w| w > R_POLY_WORK_MAX)
    {
        return Err(resource(format!("b^(m|u|) exceeds {R_POLY_WORK_MAX}")));
    }
    let (b, m) = (rule.b() as u64, rule.m());
    let cols = u
        .indices()
        .map(|j| residue_column(rule.p(), &rule.q()[j], m))
        .collect::<Result<Vec<_>>>()?;
    let weights: Vec<f64> = (0..n).map(|k| r_tilde(k, rule.b())).collect();
    let mut total = 0.0;
    let mut idx = vec![0u64; cols.len()];
    loop {
        if idx.iter().any(|&k| k != 0) {
            let residue = idx
                .iter()
                .zip(&cols)
                .fold(0, |acc, (&k, col)| digit_add(acc, col[k as usize], b, m));
            if residue == 0 {
                total += idx.iter().map(|&k| weights[k as usize]).product::<f64>();
            }
        }
        let mut d = 0;
        while d < idx.len() && idx[d] + 1 == n {
            idx[d] = 0;
            d += 1;
        }
        if d == idx.len() {
            break;
        }
        idx[d] += 1;
    }
    Ok(total)
}

/// `Σ_u γ_u [1 − (1 − 1/N)^{|u|} + R_{u,b^m}(q)]` with `N = b^m`.
pub fn star_disc_bound_poly(
    rule: &PolyLatticeRule,
    weights: &WeightSet,
) -> Result<DiscrepancyReport> {
    weights.ensure_dimension(rule.s())?;
    let n = rule.n() as f64;
    let mut bound = 0.0;
    let mut per_subset = Vec::new();
    for u in nonempty_subsets(rule.s()) {
        let g = weights.weight_unchecked(u);
        if g == 0.0 {
            continue;
        }
        let r = r_u_poly(rule, u)?;
        bound += g * (volume_defect(n, u.len()) + r);
        per_subset.push(SubsetR { u: u.to_vec(), r });
    }
    Ok(DiscrepancyReport {
        bound_joe: Some(bound),
        per_subset,
        ..Default::default()
    })
}

/// `k_b`: `1` for `b = 2`, else `1 + 1/sin(π/b)`.
pub fn k_b(b: u32) -> f64 {
    if b == 2 {
        1.0
    } else {
        1.0 + 1.0 / (PI / b as f64).sin()
    }
}

/// The `ρ`-based bound for polynomial lattice rules,
/// `Σ_u γ'_u [1 − (1 − 1/N)^{|u|} + (b − 1)(ρ/γ_u)^{1/(2α)} (k_b (m + 1))^{|u|}]`.
pub fn star_disc_bound_rho_poly(
    rule: &PolyLatticeRule,
    alpha: f64,
    weights: &WeightSet,
    target: &WeightSet,
) -> Result<DiscrepancyReport> {
    target.ensure_dimension(rule.s())?;
    require_monotone(weights, rule.s())?;
    let params = SpaceParams::new(alpha, weights.clone())?;
    let rho = rho_wal(rule, &params)?.rho_value.expect("rho_wal sets rho");
    let kb = k_b(rule.b()) * (rule.m() as f64 + 1.0);
    let b = rule.b() as f64;
    Ok(rho_bound_sum(
        rule.s(),
        rule.n() as f64,
        rho,
        alpha,
        weights,
        target,
        |size| (b - 1.0) * kb.powi(size as i32),
    ))
}

/// Exact `sup_y |Δ_P(y)|` for `s ≤ 2`.
///
/// The supremum is approached at grid values `y_j ∈ {x_j} ∪ {1}`: from above
/// for the excess `#{x ≤ y}/N − vol(y)` and from below for the deficit
/// `vol(y) − #{x < y}/N`.
pub fn exact_star_discrepancy(points: &RationalPoints) -> Result<f64> {
    let s = points.dim();
    if s > 2 {
        return Err(Error::Unsupported(format!(
            "exact star discrepancy needs s <= 2, got {s}"
        )));
    }
    let n = points.len();
    if n == 0 || n > EXACT_N_MAX {
        return Err(resource(format!(
            "exact star discrepancy needs 1 <= N <= {EXACT_N_MAX}"
        )));
    }
    let d = points.denominator();
    let df = d as f64;
    let grid = |j: usize| {
        let mut g: Vec<u64> = points.iter().map(|x| x[j]).collect();
        g.push(d);
        g.sort_unstable();
        g.dedup();
        g
    };
    let grids: Vec<Vec<u64>> = (0..s).map(grid).collect();
    let count = |y: &[u64], closed: bool| {
        points
            .iter()
            .filter(|x| {
                x.iter()
                    .zip(y)
                    .all(|(&xi, &yi)| if closed { xi <= yi } else { xi < yi })
            })
            .count() as f64
    };
    let mut best = 0.0f64;
    let mut visit = |y: &[u64]| {
        let vol: f64 = y.iter().map(|&v| v as f64 / df).product();
        best = best
            .max(count(y, true) / n as f64 - vol)
            .max(vol - count(y, false) / n as f64);
    };
    if s == 1 {
        for &y in &grids[0] {
            visit(&[y]);
        }
    } else {
        for &y1 in &grids[0] {
            for &y2 in &grids[1] {
                visit(&[y1, y2]);
            }
        }
    }
    Ok(best)
}

/// `max_u γ_u sup |Δ_{P_u}|` for `s ≤ 2`.
pub fn weighted_exact_star_discrepancy(
    points: &RationalPoints,
    weights: &WeightSet,
) -> Result<f64> {
    weights.ensure_dimension(points.dim())?;
    let mut best = 0.0f64;
    for u in nonempty_subsets(points.dim()) {
        let g = weights.weight_unchecked(u);
        if g != 0.0 {
            best = best.max(g * exact_star_discrepancy(&points.project(u))?);
        }
    }
    Ok(best)
}
