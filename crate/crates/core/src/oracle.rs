//! Slow brute-force references for cross-checking the main evaluators.
//!
//! Nothing here calls into the merit, Zaremba or discrepancy code paths: dual
//! membership is decided by direct residue tests, polynomial arithmetic is
//! redone on plain coefficient vectors, and Laurent digits come from long
//! division. Hard caps abort instead of approximating.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{precondition, resource, usage, Result};
use crate::gf::GfPoly;
use crate::korobov::{p_merit, LatticeRule};
use crate::points::RationalPoints;
use crate::subset::Subset;
use crate::walsh::{p_merit_wal_closed, PolyLatticeRule};
use crate::weights::SpaceParams;

/// Largest number of box entries an enumerator will visit.
pub const ENUMERATION_MAX: u64 = 100_000_000;
/// Longest Laurent expansion produced by [`reference_laurent_digits`].
pub const LAURENT_COUNT_MAX: usize = 64;
/// Most probes accepted by the worst-case-error probes.
pub const PROBE_COUNT_MAX: usize = 10_000;

/// A dual lattice vector; `zero` marks the trivial vector `k = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualVector {
    pub k: Vec<i64>,
    pub zero: bool,
}

fn box_size(side: u64, s: usize) -> Option<u64> {
    side.checked_pow(u32::try_from(s).ok()?)
}

fn check_work(side: u64, s: usize) -> Result<()> {
    match box_size(side, s) {
        Some(w) if w <= ENUMERATION_MAX => Ok(()),
        _ => Err(resource(format!(
            "{side}^{s} box entries exceed {ENUMERATION_MAX}"
        ))),
    }
}

/// Advances an odometer over `[0, side)^len`; false once it wraps.
fn step(idx: &mut [u64], side: u64) -> bool {
    for d in idx.iter_mut() {
        *d += 1;
        if *d < side {
            return true;
        }
        *d = 0;
    }
    false
}

/// Every `k` with `|k_j| ≤ K` and `k·z ≡ 0 (mod N)`, the zero vector included
/// and flagged.
pub fn dual_enumerate_lattice(rule: &LatticeRule, k_box: u64) -> Result<Vec<DualVector>> {
    let s = rule.s();
    let side = k_box
        .checked_mul(2)
        .and_then(|v| v.checked_add(1))
        .ok_or_else(|| resource("box too large"))?;
    check_work(side, s)?;
    let n = rule.n() as i128;
    let z: Vec<i128> = rule.z().iter().map(|&v| v as i128).collect();
    let mut out = Vec::new();
    let mut idx = vec![0u64; s];
    loop {
        let k: Vec<i64> = idx.iter().map(|&i| i as i64 - k_box as i64).collect();
        let dot: i128 = k.iter().zip(&z).map(|(&a, &b)| a as i128 * b).sum();
        if dot.rem_euclid(n) == 0 {
            let zero = k.iter().all(|&v| v == 0);
            out.push(DualVector { k, zero });
        }
        if !step(&mut idx, side) {
            break;
        }
    }
    Ok(out)
}

// Plain coefficient-vector arithmetic over F_b, lowest degree first.

fn trim(mut v: Vec<u32>) -> Vec<u32> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn poly_mul(a: &[u32], c: &[u32], b: u32) -> Vec<u32> {
    if a.is_empty() || c.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + c.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in c.iter().enumerate() {
            out[i + j] = (out[i + j] + x as u64 * y as u64) % b as u64;
        }
    }
    trim(out.into_iter().map(|v| v as u32).collect())
}

fn inverse(a: u32, b: u32) -> u32 {
    (1..b)
        .find(|&x| (a as u64 * x as u64) % b as u64 == 1)
        .expect("nonzero element of a prime field")
}

/// `a mod p` by schoolbook division from the top coefficient down.
fn poly_rem(a: &[u32], p: &[u32], b: u32) -> Vec<u32> {
    let mut r = trim(a.to_vec());
    let dp = p.len() - 1;
    let lead_inv = inverse(p[dp], b);
    while r.len() > dp {
        let top = r.len() - 1;
        let c = (r[top] as u64 * lead_inv as u64 % b as u64) as u32;
        let shift = top - dp;
        for (i, &pi) in p.iter().enumerate() {
            let sub = (c as u64 * pi as u64 % b as u64) as u32;
            r[shift + i] = (r[shift + i] + b - sub) % b;
        }
        r = trim(r);
    }
    r
}

/// The lowest `m` base-`b` digits of `k` as polynomial coefficients.
fn truncated_digits(mut k: u64, m: usize, b: u32) -> Vec<u32> {
    let mut v = Vec::with_capacity(m);
    for _ in 0..m {
        v.push((k % b as u64) as u32);
        k /= b as u64;
    }
    trim(v)
}

/// Every `k` with `0 ≤ k_j < b^{digit_cap}` and `Σ_j tr_m(k_j) q_j ≡ 0 (mod p)`,
/// the zero vector included.
pub fn dual_enumerate_poly(rule: &PolyLatticeRule, digit_cap: u32) -> Result<Vec<Vec<u64>>> {
    let (b, m, s) = (rule.b(), rule.m(), rule.s());
    let side = (b as u64)
        .checked_pow(digit_cap)
        .ok_or_else(|| resource("digit cap too large"))?;
    check_work(side, s)?;
    let p = rule.p().coeffs();
    // residues[j][k] = tr_m(k) q_j mod p, padded to m coefficients.
    let residues: Vec<Vec<Vec<u32>>> = rule
        .q()
        .iter()
        .map(|q| {
            (0..side)
                .map(|k| {
                    let mut r =
                        poly_rem(&poly_mul(&truncated_digits(k, m, b), q.coeffs(), b), p, b);
                    r.resize(m, 0);
                    r
                })
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    let mut idx = vec![0u64; s];
    let mut acc = vec![0u32; m];
    loop {
        acc.iter_mut().for_each(|c| *c = 0);
        for (j, &k) in idx.iter().enumerate() {
            for (a, &r) in acc.iter_mut().zip(&residues[j][k as usize]) {
                *a = (*a + r) % b;
            }
        }
        if acc.iter().all(|&c| c == 0) {
            out.push(idx.clone());
        }
        if !step(&mut idx, side) {
            break;
        }
    }
    Ok(out)
}

/// The first `count` digits `t_1, t_2, …` of `numer/p = Σ t_i x^{-i}` (the
/// polynomial part dropped), by repeatedly multiplying the remainder by `x`
/// and peeling off one quotient digit.
pub fn reference_laurent_digits(numer: &GfPoly, p: &GfPoly, count: usize) -> Result<Vec<u32>> {
    if count > LAURENT_COUNT_MAX {
        return Err(usage(format!("at most {LAURENT_COUNT_MAX} digits")));
    }
    let b = p.base();
    if numer.base() != b {
        return Err(usage("numerator and modulus over different fields"));
    }
    let p = p.coeffs();
    if p.is_empty() {
        return Err(usage("division by the zero polynomial"));
    }
    let dp = p.len() - 1;
    let lead_inv = inverse(p[dp], b);
    let mut r = poly_rem(numer.coeffs(), p, b);
    r.resize(dp, 0);
    let mut digits = Vec::with_capacity(count);
    for _ in 0..count {
        // r·x has degree ≤ dp; its x^{dp} coefficient decides the next digit.
        let top = if dp == 0 { 0 } else { r[dp - 1] };
        for i in (1..dp).rev() {
            r[i] = r[i - 1];
        }
        if dp > 0 {
            r[0] = 0;
        }
        let t = (top as u64 * lead_inv as u64 % b as u64) as u32;
        for i in 0..dp {
            let sub = (t as u64 * p[i] as u64 % b as u64) as u32;
            r[i] = (r[i] + b - sub) % b;
        }
        digits.push(t);
    }
    Ok(digits)
}

fn support(k: impl Iterator<Item = bool>) -> Subset {
    let mut mask = 0u64;
    for (j, nz) in k.enumerate() {
        if nz {
            mask |= 1 << j;
        }
    }
    Subset::from_mask(mask)
}

/// Korobov decay `γ_u ∏_{j∈u} |k_j|^{−2α}` with `u` the support of `k`.
pub fn korobov_r(k: &[i64], params: &SpaceParams) -> Result<f64> {
    let u = support(k.iter().map(|&v| v != 0));
    if u.is_empty() {
        return Ok(1.0);
    }
    let w = params.weights.weight(u)?;
    Ok(k.iter().filter(|&&v| v != 0).fold(w, |acc, &v| {
        acc * (v.unsigned_abs() as f64).powf(-2.0 * params.alpha)
    }))
}

/// Number of base-`b` digits of `k`, zero for `k = 0`.
fn digit_count(mut k: u64, b: u32) -> u32 {
    let mut a = 0;
    while k > 0 {
        k /= b as u64;
        a += 1;
    }
    a
}

/// Walsh decay `γ_u ∏_{j∈u} b^{−2α μ(k_j)}` with `u` the support of `k`.
pub fn walsh_r(k: &[u64], b: u32, params: &SpaceParams) -> Result<f64> {
    let u = support(k.iter().map(|&v| v != 0));
    if u.is_empty() {
        return Ok(1.0);
    }
    let w = params.weights.weight(u)?;
    let exp: u32 = k.iter().map(|&v| digit_count(v, b)).sum();
    Ok(w * (b as f64).powf(-2.0 * params.alpha * exp as f64))
}

/// `Σ r_α(k)` over nonzero dual vectors with `|k_j| ≤ K`.
pub fn lattice_series_reference(
    rule: &LatticeRule,
    params: &SpaceParams,
    k_box: u64,
) -> Result<f64> {
    let mut total = 0.0;
    for d in dual_enumerate_lattice(rule, k_box)? {
        if !d.zero {
            total += korobov_r(&d.k, params)?;
        }
    }
    Ok(total)
}

/// `Σ r_α(k)` over nonzero dual vectors with `k_j < b^{digit_cap}`.
pub fn walsh_series_reference(
    rule: &PolyLatticeRule,
    params: &SpaceParams,
    digit_cap: u32,
) -> Result<f64> {
    let mut total = 0.0;
    for k in dual_enumerate_poly(rule, digit_cap)? {
        if k.iter().any(|&v| v != 0) {
            total += walsh_r(&k, rule.b(), params)?;
        }
    }
    Ok(total)
}

fn lattice_projection(rule: &LatticeRule, u: Subset) -> Result<LatticeRule> {
    LatticeRule::new(rule.n(), u.indices().map(|j| rule.z()[j]).collect())
}

fn poly_projection(rule: &PolyLatticeRule, u: Subset) -> Result<PolyLatticeRule> {
    PolyLatticeRule::new(
        rule.p().clone(),
        u.indices().map(|j| rule.q()[j].clone()).collect(),
    )
}

/// `min ∏ max(1, |k_j|)` over nonzero dual vectors of the projection onto `u`
/// with `|k_j| ≤ N`; with `allow_zero` false every component must be nonzero.
pub fn phi_lattice_reference(rule: &LatticeRule, u: Subset, allow_zero: bool) -> Result<u64> {
    let proj = lattice_projection(rule, u)?;
    dual_enumerate_lattice(&proj, rule.n())?
        .into_iter()
        .filter(|d| !d.zero && (allow_zero || d.k.iter().all(|&v| v != 0)))
        .map(|d| d.k.iter().map(|&v| v.unsigned_abs().max(1)).product())
        .min()
        .ok_or_else(|| precondition("no dual vector in the search box"))
}

/// `min Σ μ(k_j)` over nonzero dual vectors of the projection onto `u` with
/// `k_j < b^{m+1}`; with `allow_zero` false every component must be nonzero.
pub fn phi_walsh_reference(rule: &PolyLatticeRule, u: Subset, allow_zero: bool) -> Result<u32> {
    let proj = poly_projection(rule, u)?;
    let b = rule.b();
    dual_enumerate_poly(&proj, rule.m() as u32 + 1)?
        .into_iter()
        .filter(|k| k.iter().any(|&v| v != 0) && (allow_zero || k.iter().all(|&v| v != 0)))
        .map(|k| k.iter().map(|&v| digit_count(v, b)).sum())
        .min()
        .ok_or_else(|| precondition("no dual vector in the search box"))
}

/// `R_{u,N}(z)` by filtering the symmetric enumeration to `−(N−1)/2 ≤ k_j ≤ N/2`.
pub fn r_lattice_reference(rule: &LatticeRule, u: Subset) -> Result<f64> {
    let proj = lattice_projection(rule, u)?;
    let n = rule.n() as i64;
    let lo = -((n - 1) / 2);
    Ok(dual_enumerate_lattice(&proj, (n / 2) as u64)?
        .into_iter()
        .filter(|d| !d.zero && d.k.iter().all(|&v| v >= lo))
        .map(|d| {
            d.k.iter()
                .map(|&v| 1.0 / v.unsigned_abs().max(1) as f64)
                .product::<f64>()
        })
        .sum())
}

/// `R_{u,b^m}(q)` with `r̃(k) = 1/(b^a sin(π κ/b))`, `a` the digit count and
/// `κ` the leading digit of `k`.
pub fn r_poly_reference(rule: &PolyLatticeRule, u: Subset) -> Result<f64> {
    let proj = poly_projection(rule, u)?;
    let b = rule.b();
    let r_tilde = |k: u64| -> f64 {
        if k == 0 {
            return 1.0;
        }
        let a = digit_count(k, b);
        let lead = k / (b as u64).pow(a - 1);
        1.0 / ((b as f64).powi(a as i32) * (PI * lead as f64 / b as f64).sin())
    };
    Ok(dual_enumerate_poly(&proj, rule.m() as u32)?
        .into_iter()
        .filter(|k| k.iter().any(|&v| v != 0))
        .map(|k| k.iter().map(|&v| r_tilde(v)).product::<f64>())
        .sum())
}

/// Star discrepancy over every anchored box whose corner coordinates are point
/// coordinates or 1, with the local discrepancy kept as an exact integer
/// `|count·d^s − N ∏ t_j|` over `N d^s`.
pub fn exact_star_discrepancy_reference(points: &RationalPoints) -> Result<f64> {
    let (n, s, d) = (points.len(), points.dim(), points.denominator());
    if n == 0 {
        return Err(usage("empty point set"));
    }
    let d_pow = (d as i128)
        .checked_pow(s as u32)
        .filter(|&v| v < i64::MAX as i128);
    let d_pow = d_pow.ok_or_else(|| resource("denominator power overflows"))?;
    let corners: Vec<Vec<u64>> = (0..s)
        .map(|j| {
            let mut c: Vec<u64> = points.iter().map(|x| x[j]).chain([d]).collect();
            c.sort_unstable();
            c.dedup();
            c
        })
        .collect();
    let cells = corners
        .iter()
        .try_fold(1u64, |acc, c| acc.checked_mul(c.len() as u64));
    if cells
        .and_then(|c| c.checked_mul(n as u64))
        .is_none_or(|w| w > ENUMERATION_MAX)
    {
        return Err(resource("corner grid too large"));
    }
    let mut best: i128 = 0;
    let mut idx = vec![0usize; s];
    loop {
        let t: Vec<u64> = idx.iter().zip(&corners).map(|(&i, c)| c[i]).collect();
        let closed = points
            .iter()
            .filter(|x| x.iter().zip(&t).all(|(a, b)| a <= b))
            .count() as i128;
        let open = points
            .iter()
            .filter(|x| x.iter().zip(&t).all(|(a, b)| a < b))
            .count() as i128;
        let vol: i128 = n as i128 * t.iter().map(|&v| v as i128).product::<i128>();
        best = best.max(closed * d_pow - vol).max(vol - open * d_pow);
        let mut j = 0;
        while j < s {
            idx[j] += 1;
            if idx[j] < corners[j].len() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
        if j == s {
            break;
        }
    }
    Ok(best as f64 / (n as f64 * d_pow as f64))
}

/// Outcome of a worst-case-error probe run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeOutcome {
    /// `max_k |I(f_k) − Q(f_k)|` over the unit-norm probes `f_k`.
    pub lower_bound: f64,
    /// `√P`, the exact worst-case error.
    pub sqrt_p: f64,
    pub probes: usize,
}

/// `|I(f_k) − Q(f_k)|` for `f_k = r_α(k)^{1/2} e^{2πi k·x}`.
pub fn lattice_frequency_probe(rule: &LatticeRule, params: &SpaceParams, k: &[i64]) -> Result<f64> {
    if k.len() != rule.s() {
        return Err(usage("frequency length differs from the dimension"));
    }
    if k.iter().all(|&v| v == 0) {
        // Constant probe: integrated exactly.
        return Ok(0.0);
    }
    let n = rule.n() as i128;
    let (mut re, mut im) = (0.0, 0.0);
    for i in 0..rule.n() as i128 {
        let phase: i128 = k
            .iter()
            .zip(rule.z())
            .map(|(&kj, &zj)| kj as i128 * zj as i128 * i)
            .sum();
        let angle = 2.0 * PI * phase.rem_euclid(n) as f64 / n as f64;
        re += angle.cos();
        im += angle.sin();
    }
    Ok(korobov_r(k, params)?.sqrt() * re.hypot(im) / n as f64)
}

/// Digits `ξ_1, …, ξ_m` of every point coordinate, computed from `n·q_j mod p`
/// by long division.
fn poly_point_digits(rule: &PolyLatticeRule) -> Result<Vec<Vec<Vec<u32>>>> {
    let (b, m) = (rule.b(), rule.m());
    let p = rule.p().coeffs();
    (0..rule.n())
        .map(|i| {
            let poly = truncated_digits(i, m, b);
            rule.q()
                .iter()
                .map(|q| {
                    let numer = GfPoly::new(b, poly_rem(&poly_mul(&poly, q.coeffs(), b), p, b))?;
                    reference_laurent_digits(&numer, rule.p(), m)
                })
                .collect()
        })
        .collect()
}

fn walsh_probe_from_digits(
    digits: &[Vec<Vec<u32>>],
    b: u32,
    params: &SpaceParams,
    k: &[u64],
) -> Result<f64> {
    if k.iter().all(|&v| v == 0) {
        return Ok(0.0);
    }
    let (mut re, mut im) = (0.0, 0.0);
    for point in digits {
        let mut phase = 0u64;
        for (xj, &kj) in point.iter().zip(k) {
            let mut kk = kj;
            for &xi in xj {
                phase += (kk % b as u64) * xi as u64;
                kk /= b as u64;
            }
        }
        let angle = 2.0 * PI * (phase % b as u64) as f64 / b as f64;
        re += angle.cos();
        im += angle.sin();
    }
    Ok(walsh_r(k, b, params)?.sqrt() * re.hypot(im) / digits.len() as f64)
}

/// `|I(f_k) − Q(f_k)|` for `f_k = r_α(k)^{1/2} wal_k`.
pub fn walsh_frequency_probe(
    rule: &PolyLatticeRule,
    params: &SpaceParams,
    k: &[u64],
) -> Result<f64> {
    if k.len() != rule.s() {
        return Err(usage("frequency length differs from the dimension"));
    }
    walsh_probe_from_digits(&poly_point_digits(rule)?, rule.b(), params, k)
}

fn check_probe_count(probe_count: usize) -> Result<()> {
    if probe_count > PROBE_COUNT_MAX {
        return Err(usage(format!("at most {PROBE_COUNT_MAX} probes")));
    }
    Ok(())
}

fn finish(lower_bound: f64, sqrt_p: f64, probes: usize) -> ProbeOutcome {
    assert!(
        lower_bound <= sqrt_p + 1e-9,
        "probe lower bound {lower_bound} exceeds the worst-case error {sqrt_p}"
    );
    ProbeOutcome {
        lower_bound,
        sqrt_p,
        probes,
    }
}

/// Probes the `probe_count` nonzero frequencies with the largest decay `r_α(k)`
/// (ties in enumeration order) and checks the result against `√P`.
pub fn wce_by_function_probe(
    rule: &LatticeRule,
    params: &SpaceParams,
    probe_count: usize,
) -> Result<ProbeOutcome> {
    check_probe_count(probe_count)?;
    let s = rule.s();
    let mut k_box = 0u64;
    while box_size(2 * k_box + 1, s).is_some_and(|w| w <= probe_count as u64) {
        k_box += 1;
    }
    check_work(2 * k_box + 1, s)?;
    let mut freqs = Vec::new();
    let mut idx = vec![0u64; s];
    loop {
        let k: Vec<i64> = idx.iter().map(|&i| i as i64 - k_box as i64).collect();
        if k.iter().any(|&v| v != 0) {
            freqs.push((korobov_r(&k, params)?, k));
        }
        if !step(&mut idx, 2 * k_box + 1) {
            break;
        }
    }
    freqs.sort_by(|a, b| b.0.total_cmp(&a.0));
    freqs.truncate(probe_count);
    let mut lower = 0.0f64;
    for (_, k) in &freqs {
        lower = lower.max(lattice_frequency_probe(rule, params, k)?);
    }
    let sqrt_p = p_merit(rule, params)?.p_value.sqrt();
    Ok(finish(lower, sqrt_p, freqs.len()))
}

/// Walsh counterpart of [`wce_by_function_probe`].
pub fn wce_by_function_probe_poly(
    rule: &PolyLatticeRule,
    params: &SpaceParams,
    probe_count: usize,
) -> Result<ProbeOutcome> {
    check_probe_count(probe_count)?;
    let (b, s) = (rule.b(), rule.s());
    let mut cap = 0u32;
    while box_size((b as u64).pow(cap), s).is_some_and(|w| w <= probe_count as u64) {
        cap += 1;
    }
    let side = (b as u64).pow(cap);
    check_work(side, s)?;
    let mut freqs = Vec::new();
    let mut idx = vec![0u64; s];
    loop {
        if idx.iter().any(|&v| v != 0) {
            freqs.push((walsh_r(&idx, b, params)?, idx.clone()));
        }
        if !step(&mut idx, side) {
            break;
        }
    }
    freqs.sort_by(|a, b| b.0.total_cmp(&a.0));
    freqs.truncate(probe_count);
    let digits = poly_point_digits(rule)?;
    let mut lower = 0.0f64;
    for (_, k) in &freqs {
        lower = lower.max(walsh_probe_from_digits(&digits, b, params, k)?);
    }
    let sqrt_p = p_merit_wal_closed(rule, params)?.p_value.sqrt();
    Ok(finish(lower, sqrt_p, freqs.len()))
}
