//! Rank-1 lattice rules and their figures of merit in the weighted Korobov space.
//!
//! The squared worst-case error is
//! `P = (1/N) Σ_x Σ_u γ_u ∏_{j∈u} ω(x_j)` with the kernel
//! `ω(x) = Σ_{k≠0} |k|^{-2α} e^{2πikx}`. For integer `α ≤ 4` the kernel is a
//! scaled Bernoulli polynomial; for any other `α > 1/2` it is tabulated from
//! Hurwitz zeta values over the residues `x = r/N`.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{precondition, resource, usage, Error, Result};
use crate::points::RationalPoints;
use crate::report::{weighted_table_mean, MeritReport, Method, SubsetEntry};
use crate::special::{hurwitz_zeta, pairwise_sum, zeta};
use crate::subset::{nonempty_subsets, Subset};
use crate::weights::{integer_alpha, SpaceParams};

/// Largest dimension accepted by [`zaremba_rho`].
pub const ZAREMBA_S_MAX: usize = 4;
/// Largest modulus accepted by [`zaremba_rho`].
pub const ZAREMBA_N_MAX: u64 = 1024;
/// Largest dimension accepted by [`p_merit_series`].
pub const SERIES_S_MAX: usize = 8;

/// A rank-1 lattice rule: modulus `N` and generating vector `z ∈ {1, …, N-1}^s`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawLatticeRule")]
pub struct LatticeRule {
    #[serde(rename = "N")]
    n: u64,
    z: Vec<u64>,
}

#[derive(Deserialize)]
struct RawLatticeRule {
    #[serde(rename = "N")]
    n: u64,
    z: Vec<u64>,
}

impl TryFrom<RawLatticeRule> for LatticeRule {
    type Error = Error;
    fn try_from(raw: RawLatticeRule) -> Result<Self> {
        LatticeRule::new(raw.n, raw.z)
    }
}

impl LatticeRule {
    pub fn new(n: u64, z: Vec<u64>) -> Result<Self> {
        if n < 2 {
            return Err(usage(format!("lattice modulus N = {n} must be at least 2")));
        }
        if z.is_empty() {
            return Err(usage("generating vector must have at least one component"));
        }
        if let Some(bad) = z.iter().find(|&&zj| zj == 0 || zj >= n) {
            return Err(usage(format!(
                "generating vector entry {bad} outside 1..={}",
                n - 1
            )));
        }
        if n > u32::MAX as u64 {
            return Err(usage("lattice modulus must fit in 32 bits"));
        }
        Ok(LatticeRule { n, z })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn z(&self) -> &[u64] {
        &self.z
    }

    pub fn s(&self) -> usize {
        self.z.len()
    }

    /// The rule formed by the first `len` components.
    pub fn prefix(&self, len: usize) -> LatticeRule {
        assert!(len >= 1 && len <= self.s());
        LatticeRule {
            n: self.n,
            z: self.z[..len].to_vec(),
        }
    }

    /// Numerator of coordinate `j` of point `i`: `i·z_j mod N`.
    #[inline]
    pub fn numerator(&self, i: u64, j: usize) -> u64 {
        i * self.z[j] % self.n
    }
}

/// The `N` points `{i·z/N}` for `i = 0, …, N-1` as exact numerators over `N`.
pub fn lattice_points(rule: &LatticeRule) -> RationalPoints {
    let mut nums = Vec::with_capacity(rule.n as usize * rule.s());
    for i in 0..rule.n {
        for j in 0..rule.s() {
            nums.push(rule.numerator(i, j));
        }
    }
    RationalPoints::new(rule.n, rule.s(), nums)
}

/// `B_{2α}(x)` for `α ∈ {1, 2, 3, 4}`.
pub fn bernoulli_even(alpha: u32, x: f64) -> Result<f64> {
    // Monomial coefficients, constant term first.
    let c: &[f64] = match alpha {
        1 => &[1.0 / 6.0, -1.0, 1.0],
        2 => &[-1.0 / 30.0, 0.0, 1.0, -2.0, 1.0],
        3 => &[1.0 / 42.0, 0.0, -0.5, 0.0, 2.5, -3.0, 1.0],
        4 => &[
            -1.0 / 30.0,
            0.0,
            2.0 / 3.0,
            0.0,
            -7.0 / 3.0,
            0.0,
            14.0 / 3.0,
            -4.0,
            1.0,
        ],
        _ => {
            return Err(Error::Unsupported(format!(
                "Bernoulli closed form needs alpha in 1..=4, got {alpha}"
            )))
        }
    };
    Ok(c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci))
}

/// `(2π)^{2α} / ((−1)^{α+1} (2α)!)`.
fn bernoulli_scale(alpha: u32) -> f64 {
    let two_alpha = 2 * alpha;
    let factorial: f64 = (1..=two_alpha).map(f64::from).product();
    let sign = if alpha % 2 == 1 { 1.0 } else { -1.0 };
    (2.0 * PI).powi(two_alpha as i32) / (sign * factorial)
}

/// `ω(r/N)` for `r = 0, …, N-1` via Bernoulli polynomials.
pub fn bernoulli_kernel_table(alpha: u32, n: u64) -> Result<Vec<f64>> {
    let scale = bernoulli_scale(alpha);
    (0..n)
        .map(|r| Ok(scale * bernoulli_even(alpha, r as f64 / n as f64)?))
        .collect()
}

/// `ω(r/N)` for `r = 0, …, N-1` and any real `α > 1/2`.
///
/// Grouping the frequencies `k ≠ 0` by `c = k mod N` gives
/// `ω(r/N) = N^{-2α} Σ_c cos(2πcr/N) H(c)` with `H(0) = 2ζ(2α)` and
/// `H(c) = ζ(2α, c/N) + ζ(2α, 1 − c/N)`.
pub fn residue_kernel_table(alpha: f64, n: u64) -> Result<Vec<f64>> {
    let x = 2.0 * alpha;
    let nf = n as f64;
    let mut h = Vec::with_capacity(n as usize);
    h.push(2.0 * zeta(x)?);
    for c in 1..n {
        let a = c as f64 / nf;
        h.push(hurwitz_zeta(x, a)? + hurwitz_zeta(x, (n - c) as f64 / nf)?);
    }
    let scale = nf.powf(-x);
    const DIRECT_MAX: u64 = 4096;
    if n <= DIRECT_MAX {
        let cos: Vec<f64> = (0..n).map(|t| (2.0 * PI * t as f64 / nf).cos()).collect();
        Ok((0..n)
            .into_par_iter()
            .map(|r| {
                let terms: Vec<f64> = (0..n)
                    .map(|c| cos[(c * r % n) as usize] * h[c as usize])
                    .collect();
                scale * pairwise_sum(&terms)
            })
            .collect())
    } else {
        let mut buf: Vec<Complex64> = h.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        FftPlanner::new()
            .plan_fft_forward(n as usize)
            .process(&mut buf);
        Ok(buf.iter().map(|c| scale * c.re).collect())
    }
}

/// Kernel table and method tag: Bernoulli closed form when `α ∈ {1,2,3,4}`,
/// residue kernel otherwise.
pub fn kernel_table(alpha: f64, n: u64) -> Result<(Vec<f64>, Method)> {
    match integer_alpha(alpha) {
        Some(a) if a <= 4 => Ok((bernoulli_kernel_table(a, n)?, Method::ClosedForm)),
        _ => Ok((residue_kernel_table(alpha, n)?, Method::ResidueKernel)),
    }
}

fn check_weights(rule: &LatticeRule, params: &SpaceParams) -> Result<()> {
    params.weights.ensure_dimension(rule.s())
}

/// `P_{α,γ,N}(z)` by the Bernoulli-polynomial point sum. Requires `α ∈ {1,2,3,4}`.
pub fn p_merit_closed(rule: &LatticeRule, params: &SpaceParams) -> Result<MeritReport> {
    check_weights(rule, params)?;
    let alpha = params
        .integer_alpha()
        .filter(|a| (1..=4).contains(a))
        .ok_or_else(|| {
            Error::Unsupported(format!(
                "closed form needs alpha in 1..=4, got {}",
                params.alpha
            ))
        })?;
    let table = bernoulli_kernel_table(alpha, rule.n)?;
    let p = weighted_table_mean(&lattice_points(rule), &table, &params.weights);
    Ok(MeritReport::value(p, Method::ClosedForm))
}

/// `P_{α,γ,N}(z)` with the residue kernel; exact for every `α > 1/2` up to rounding.
pub fn p_merit_residue(rule: &LatticeRule, params: &SpaceParams) -> Result<MeritReport> {
    check_weights(rule, params)?;
    let table = residue_kernel_table(params.alpha, rule.n)?;
    let p = weighted_table_mean(&lattice_points(rule), &table, &params.weights);
    Ok(MeritReport::value(p, Method::ResidueKernel))
}

/// Closed form when available, residue kernel otherwise.
pub fn p_merit(rule: &LatticeRule, params: &SpaceParams) -> Result<MeritReport> {
    check_weights(rule, params)?;
    let (table, method) = kernel_table(params.alpha, rule.n)?;
    let p = weighted_table_mean(&lattice_points(rule), &table, &params.weights);
    Ok(MeritReport::value(p, method))
}

/// Per-subset unweighted sums `(1/N) Σ_x ∏_{j∈u} ω(x_j)`, one per nonempty `u`.
pub fn per_subset_inner(rule: &LatticeRule, alpha: f64) -> Result<Vec<(Subset, f64)>> {
    if rule.s() > 16 {
        return Err(resource("per-subset breakdown limited to s <= 16"));
    }
    let (table, _) = kernel_table(alpha, rule.n)?;
    let pts = lattice_points(rule);
    Ok(nonempty_subsets(rule.s())
        .map(|u| {
            let terms: Vec<f64> = pts
                .iter()
                .map(|x| u.indices().map(|j| table[x[j] as usize]).product())
                .collect();
            (u, pairwise_sum(&terms) / rule.n as f64)
        })
        .collect())
}

/// Truncated dual series `Σ_u γ_u Σ_{k_u ∈ P_u^⊥, 0<|k_j|≤K} ∏ |k_j|^{-2α}`.
///
/// Frequencies are grouped by residue mod `N`, which turns the dual condition
/// into a cyclic convolution; the value equals the plain enumeration over the
/// box. The reported truncation bound majorizes every dropped term.
pub fn p_merit_series(
    rule: &LatticeRule,
    params: &SpaceParams,
    radius: u64,
) -> Result<MeritReport> {
    check_weights(rule, params)?;
    let n = rule.n;
    if radius < n {
        return Err(precondition(format!(
            "series radius K = {radius} must be at least N = {n}"
        )));
    }
    if rule.s() > SERIES_S_MAX {
        return Err(resource(format!(
            "series evaluation limited to s <= {SERIES_S_MAX}"
        )));
    }
    let x = 2.0 * params.alpha;
    // a[c] = Σ_{0<|k|≤K, k ≡ c mod N} |k|^{-2α}, summed from the smallest terms up.
    let mut a = vec![0.0; n as usize];
    for k in (1..=radius).rev() {
        let t = (k as f64).powf(-x);
        a[(k % n) as usize] += t;
        a[((n - k % n) % n) as usize] += t;
    }
    let partial: f64 = (1..=radius).rev().map(|k| (k as f64).powf(-x)).sum();

    let columns: Vec<Vec<f64>> = rule
        .z
        .iter()
        .map(|&zj| {
            let mut col = vec![0.0; n as usize];
            for c in 0..n {
                col[(c * zj % n) as usize] += a[c as usize];
            }
            col
        })
        .collect();

    let mut per_subset = Vec::new();
    let mut total = Vec::new();
    for u in nonempty_subsets(rule.s()) {
        let mut acc: Option<Vec<f64>> = None;
        for j in u.indices() {
            acc = Some(match acc {
                None => columns[j].clone(),
                Some(prev) => cyclic_convolve(&prev, &columns[j]),
            });
        }
        let inner = acc.expect("u is nonempty")[0];
        total.push(params.weights.weight_unchecked(u) * inner);
        per_subset.push(SubsetEntry {
            u: u.to_vec(),
            inner,
            phi: None,
            phi0: None,
        });
    }
    let s = rule.s();
    let full = params.weights.subset_sum(s, &vec![1.0 + 2.0 * zeta(x)?; s]);
    let cut = params.weights.subset_sum(s, &vec![1.0 + 2.0 * partial; s]);
    Ok(MeritReport {
        p_value: pairwise_sum(&total),
        rho_value: None,
        method: Method::TruncatedSeries,
        truncation_bound: Some((full - cut).max(0.0)),
        per_subset,
    })
}

fn cyclic_convolve(f: &[f64], g: &[f64]) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    for (i, &fi) in f.iter().enumerate() {
        if fi == 0.0 {
            continue;
        }
        for (j, &gj) in g.iter().enumerate() {
            out[(i + j) % n] += fi * gj;
        }
    }
    out
}

/// `φ_u(z)` (all components nonzero) or `φ_{u,0}(z)` (zeros allowed, vector nonzero)
/// for the generating-vector entries `zs` of `u`.
///
/// Each component only matters through its residue `c = k mod N`, whose smallest
/// admissible `|k|` is `min(c, N−c)`, or `N` for `c = 0` when zeros are excluded.
/// The search runs through residues in increasing size with branch and bound,
/// solving the last coordinate by table lookup.
pub fn phi_min(n: u64, zs: &[u64], allow_zero: bool) -> u64 {
    assert!(!zs.is_empty());
    let size = |c: u64| -> u64 {
        if c == 0 {
            if allow_zero {
                1
            } else {
                n
            }
        } else {
            c.min(n - c)
        }
    };
    let last = *zs.last().expect("nonempty");
    // best_last[t]: smallest size of a residue c with c·z_last ≡ t; a second
    // table excludes c = 0 for the case where all other residues vanish.
    let mut best_last = vec![u64::MAX; n as usize];
    let mut best_last_nonzero = vec![u64::MAX; n as usize];
    for c in 0..n {
        let t = (c * last % n) as usize;
        best_last[t] = best_last[t].min(size(c));
        if c != 0 {
            best_last_nonzero[t] = best_last_nonzero[t].min(size(c));
        }
    }
    let mut order: Vec<(u64, u64)> = (0..n).map(|c| (size(c), c)).collect();
    order.sort();

    struct Search<'a> {
        n: u64,
        zs: &'a [u64],
        order: &'a [(u64, u64)],
        best_last: &'a [u64],
        best_last_nonzero: &'a [u64],
        allow_zero: bool,
        best: u64,
    }
    impl Search<'_> {
        fn go(&mut self, level: usize, prod: u64, residue: u64, all_zero: bool) {
            if level + 1 == self.zs.len() {
                let t = ((self.n - residue) % self.n) as usize;
                let table = if self.allow_zero && all_zero {
                    self.best_last_nonzero
                } else {
                    self.best_last
                };
                if table[t] != u64::MAX {
                    self.best = self.best.min(prod.saturating_mul(table[t]));
                }
                return;
            }
            for &(w, c) in self.order {
                let p = prod.saturating_mul(w);
                if p >= self.best {
                    break;
                }
                let r = (residue + c * self.zs[level]) % self.n;
                self.go(level + 1, p, r, all_zero && c == 0);
            }
        }
    }
    let mut search = Search {
        n,
        zs,
        order: &order,
        best_last: &best_last,
        best_last_nonzero: &best_last_nonzero,
        allow_zero,
        best: u64::MAX,
    };
    search.go(0, 1, 0, true);
    if allow_zero {
        // All residues zero with one component equal to ±N.
        search.best.min(n)
    } else {
        search.best
    }
}

/// Zaremba index `ρ = max_u γ_u / φ_u(z)^{2α}` with the per-subset `φ_u`,
/// `φ_{u,0}` and unweighted dual sums. The report also carries `P`.
pub fn zaremba_rho(rule: &LatticeRule, params: &SpaceParams) -> Result<MeritReport> {
    check_weights(rule, params)?;
    if rule.s() > ZAREMBA_S_MAX || rule.n > ZAREMBA_N_MAX {
        return Err(resource(format!(
            "Zaremba index enumeration limited to s <= {ZAREMBA_S_MAX}, N <= {ZAREMBA_N_MAX}"
        )));
    }
    let mut report = p_merit(rule, params)?;
    let inner = per_subset_inner(rule, params.alpha)?;
    let mut rho = 0.0f64;
    let mut entries = Vec::new();
    for (u, inner_u) in inner {
        let zs: Vec<u64> = u.indices().map(|j| rule.z[j]).collect();
        let phi = phi_min(rule.n, &zs, false);
        let phi0 = phi_min(rule.n, &zs, true);
        rho = rho.max(params.weights.weight_unchecked(u) / (phi as f64).powf(2.0 * params.alpha));
        entries.push(SubsetEntry {
            u: u.to_vec(),
            inner: inner_u,
            phi: Some(phi),
            phi0: Some(phi0),
        });
    }
    report.rho_value = Some(rho);
    report.per_subset = entries;
    Ok(report)
}

/// `(1/N) Σ_{x∈P(z)} e^{2πi k·x}` evaluated from the point numerators.
pub fn lattice_char_sum(rule: &LatticeRule, k: &[i64]) -> Complex64 {
    assert_eq!(k.len(), rule.s());
    thread_local! {
        static ROOTS: RefCell<(u64, Vec<Complex64>)> = const { RefCell::new((0, Vec::new())) };
    }
    let n = rule.n as i64;
    ROOTS.with_borrow_mut(|(cached, roots)| {
        if *cached != rule.n {
            *roots = (0..n)
                .map(|t| Complex64::from_polar(1.0, 2.0 * PI * t as f64 / n as f64))
                .collect();
            *cached = rule.n;
        }
        let mut sum = Complex64::new(0.0, 0.0);
        for i in 0..rule.n {
            let mut phase = 0i64;
            for (j, &kj) in k.iter().enumerate() {
                phase += kj * rule.numerator(i, j) as i64;
            }
            sum += roots[phase.rem_euclid(n) as usize];
        }
        sum / n as f64
    })
}
