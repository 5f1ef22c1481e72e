//! Polynomial lattice rules and their figures of merit in the weighted Walsh space.
//!
//! The squared worst-case error is
//! `P = Σ_u γ_u Σ_{k_u ∈ P_u^⊥} b^{-2α μ(k_u)}`, or equivalently the point sum
//! `(1/b^m) Σ_x Σ_u γ_u ∏_{j∈u} φ_α(x_j)`.
//!
//! Points and dual residues are linear in the digits of `n` and `k`, so both
//! are tabulated from the images of the monomials `x^i`. Point coordinates are
//! kept as numerators over `b^m`, whose base-`b` digits are `t_1 … t_m`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cbc::{argmin_first, CbcStep, CbcTrace};
use crate::error::{domain, resource, usage, Error, Result};
use crate::gf::{check_base, nu_m, GfPoly};
use crate::points::RationalPoints;
use crate::report::{weighted_rows_mean, weighted_table_mean, MeritReport, Method, SubsetEntry};
use crate::special::pairwise_sum;
use crate::subset::{nonempty_subsets, Subset};
use crate::weights::SpaceParams;

/// Largest `b^m` for which rules are accepted.
pub const POINTS_MAX: u64 = 1 << 22;
/// Cap on `2^s · b^{2m}` for the group convolutions in [`rho_wal`] and
/// [`p_merit_wal_series`].
pub const CONVOLUTION_WORK_MAX: u64 = 1 << 32;
/// Largest `b^{digit_cap}` accepted by [`p_merit_wal_series`].
pub const SERIES_INDEX_MAX: u64 = 1 << 24;

/// A polynomial lattice rule: prime `b`, modulus `p` of degree `m` and
/// generating polynomials `q_j ∈ G_m ∖ {0}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawPolyRule", into = "RawPolyRule")]
pub struct PolyLatticeRule {
    b: u32,
    m: usize,
    p: GfPoly,
    q: Vec<GfPoly>,
}

#[derive(Serialize, Deserialize)]
struct RawPolyRule {
    b: u32,
    m: usize,
    p: Vec<u32>,
    q: Vec<Vec<u32>>,
}

impl TryFrom<RawPolyRule> for PolyLatticeRule {
    type Error = Error;
    fn try_from(raw: RawPolyRule) -> Result<Self> {
        let p = GfPoly::new(raw.b, raw.p)?;
        let q = raw
            .q
            .into_iter()
            .map(|c| GfPoly::new(raw.b, c))
            .collect::<Result<_>>()?;
        let rule = PolyLatticeRule::new(p, q)?;
        if rule.m != raw.m {
            return Err(usage(format!(
                "m = {} does not match deg p = {}",
                raw.m, rule.m
            )));
        }
        Ok(rule)
    }
}

impl From<PolyLatticeRule> for RawPolyRule {
    fn from(rule: PolyLatticeRule) -> Self {
        RawPolyRule {
            b: rule.b,
            m: rule.m,
            p: rule.p.coeffs().to_vec(),
            q: rule.q.iter().map(|q| q.coeffs().to_vec()).collect(),
        }
    }
}

impl PolyLatticeRule {
    pub fn new(p: GfPoly, q: Vec<GfPoly>) -> Result<Self> {
        let b = p.base();
        check_base(b)?;
        let m = p
            .degree()
            .filter(|&d| d >= 1)
            .ok_or_else(|| usage("modulus p must have degree >= 1"))?;
        if (b as u64)
            .checked_pow(m as u32)
            .is_none_or(|n| n > POINTS_MAX)
        {
            return Err(resource(format!(
                "b^m = {b}^{m} exceeds {POINTS_MAX} points"
            )));
        }
        if q.is_empty() {
            return Err(usage("generating vector must have at least one component"));
        }
        for qj in &q {
            if qj.base() != b {
                return Err(Error::BaseMismatch(b, qj.base()));
            }
            if qj.is_zero() || qj.degree() >= Some(m) {
                return Err(usage(format!(
                    "generating polynomial {qj} must be nonzero with degree < {m}"
                )));
            }
        }
        Ok(PolyLatticeRule { b, m, p, q })
    }

    /// Builds a rule from integer encodings of the generating polynomials.
    pub fn from_encodings(p: GfPoly, q: &[u64]) -> Result<Self> {
        let b = p.base();
        Self::new(p, q.iter().map(|&k| GfPoly::from_encoding(b, k)).collect())
    }

    pub fn b(&self) -> u32 {
        self.b
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn p(&self) -> &GfPoly {
        &self.p
    }

    pub fn q(&self) -> &[GfPoly] {
        &self.q
    }

    pub fn s(&self) -> usize {
        self.q.len()
    }

    /// Number of points `b^m`.
    pub fn n(&self) -> u64 {
        (self.b as u64).pow(self.m as u32)
    }

    pub fn prefix(&self, len: usize) -> PolyLatticeRule {
        assert!(len >= 1 && len <= self.s());
        PolyLatticeRule {
            b: self.b,
            m: self.m,
            p: self.p.clone(),
            q: self.q[..len].to_vec(),
        }
    }
}

/// Digit-wise sum mod `b` of two base-`b` integers with `m` digits.
#[inline]
pub(crate) fn digit_add(x: u64, y: u64, b: u64, m: usize) -> u64 {
    if b == 2 {
        return x ^ y;
    }
    let (mut x, mut y, mut out, mut scale) = (x, y, 0u64, 1u64);
    for _ in 0..m {
        out += ((x % b + y % b) % b) * scale;
        x /= b;
        y /= b;
        scale *= b;
    }
    out
}

/// Digit-wise `c · x` mod `b`.
fn digit_scale(x: u64, c: u64, b: u64, m: usize) -> u64 {
    let (mut x, mut out, mut scale) = (x, 0u64, 1u64);
    for _ in 0..m {
        out += (x % b * c % b) * scale;
        x /= b;
        scale *= b;
    }
    out
}

/// `table[n] = Σ_i κ_i(n) · basis[i]` with digit-wise arithmetic mod `b`, for
/// `n < b^m` with base-`b` digits `κ_i`.
fn linear_table(basis: &[u64], b: u64, m: usize) -> Vec<u64> {
    let total = b.pow(m as u32);
    let mut table = vec![0u64; total as usize];
    // multiples[i][c] = c · basis[i]
    let multiples: Vec<Vec<u64>> = basis
        .iter()
        .map(|&v| (0..b).map(|c| digit_scale(v, c, b, m)).collect())
        .collect();
    let mut top = 1u64;
    let mut d = 0usize;
    for n in 1..total {
        if n == top * b {
            top *= b;
            d += 1;
        }
        let lead = n / top;
        table[n as usize] = digit_add(
            table[(n - lead * top) as usize],
            multiples[d][lead as usize],
            b,
            m,
        );
    }
    table
}

/// Numerators over `b^m` of coordinate `ν_m(n q / p)` for every `n ∈ G_m`,
/// indexed by the encoding of `n`.
fn point_column(p: &GfPoly, q: &GfPoly, m: usize) -> Result<Vec<u64>> {
    let b = p.base();
    let basis = (0..m)
        .map(|i| Ok(nu_m(&GfPoly::monomial(b, i).mulmod(q, p)?, p, m)?.numerator()))
        .collect::<Result<Vec<_>>>()?;
    Ok(linear_table(&basis, b as u64, m))
}

/// Encoding of `tr_m(k) · q mod p` for every `k < b^m`.
pub(crate) fn residue_column(p: &GfPoly, q: &GfPoly, m: usize) -> Result<Vec<u64>> {
    let b = p.base();
    let basis = (0..m)
        .map(|i| Ok(GfPoly::monomial(b, i).mulmod(q, p)?.encode()))
        .collect::<Result<Vec<_>>>()?;
    Ok(linear_table(&basis, b as u64, m))
}

/// The `b^m` points, point `i` generated by the polynomial with encoding `i`.
pub fn poly_lattice_points(rule: &PolyLatticeRule) -> RationalPoints {
    let cols: Vec<Vec<u64>> = rule
        .q
        .iter()
        .map(|q| point_column(&rule.p, q, rule.m).expect("rule invariants hold"))
        .collect();
    let n = rule.n() as usize;
    let mut nums = Vec::with_capacity(n * rule.s());
    for i in 0..n {
        for col in &cols {
            nums.push(col[i]);
        }
    }
    RationalPoints::new(rule.n(), rule.s(), nums)
}

/// `μ(k)`: the number of base-`b` digits of `k ≥ 1`.
pub fn mu_of(k: u64, b: u32) -> Result<u32> {
    if k == 0 {
        return Err(domain("mu(k) is defined for k >= 1"));
    }
    let mut a = 0;
    let mut k = k;
    while k > 0 {
        k /= b as u64;
        a += 1;
    }
    Ok(a)
}

pub(crate) fn mu_unchecked(k: u64, b: u64) -> u32 {
    let (mut a, mut k) = (0, k);
    while k > 0 {
        k /= b;
        a += 1;
    }
    a
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.5) {
        return Err(domain(format!(
            "Walsh smoothness alpha = {alpha} must exceed 1/2"
        )));
    }
    Ok(())
}

/// `(b − 1)/(b^{2α} − b) = Σ_{k≥1} b^{−2α μ(k)}`.
pub fn walsh_zeta(alpha: f64, b: u32) -> f64 {
    let b = b as f64;
    (b - 1.0) / (b.powf(2.0 * alpha) - b)
}

/// `φ_α(x)` for `x = numer / b^m`, with the first nonzero digit position
/// read off the exact numerator.
pub fn walsh_phi_alpha(numer: u64, m: usize, alpha: f64, b: u32) -> Result<f64> {
    check_alpha(alpha)?;
    let denom = (b as u64).pow(m as u32);
    if numer >= denom {
        return Err(usage(format!(
            "numerator {numer} must be below b^m = {denom}"
        )));
    }
    Ok(phi_alpha_unchecked(numer, m, alpha, b))
}

fn phi_alpha_unchecked(numer: u64, m: usize, alpha: f64, b: u32) -> f64 {
    let base = walsh_zeta(alpha, b);
    if numer == 0 {
        return base;
    }
    let a = (m as u32 + 1 - mu_unchecked(numer, b as u64)) as f64;
    let bf = b as f64;
    let b2a = bf.powf(2.0 * alpha);
    base - (b2a - 1.0) / (bf.powf((2.0 * alpha - 1.0) * a) * (b2a - bf))
}

/// `φ_α` tabulated over every numerator below `b^m`.
fn phi_table(b: u32, m: usize, alpha: f64) -> Vec<f64> {
    // φ_α depends only on μ(numer), so evaluate once per digit count.
    let by_mu: Vec<f64> = (0..=m)
        .map(|a| {
            if a == 0 {
                phi_alpha_unchecked(0, m, alpha, b)
            } else {
                phi_alpha_unchecked((b as u64).pow(a as u32 - 1), m, alpha, b)
            }
        })
        .collect();
    let n = (b as u64).pow(m as u32);
    (0..n)
        .map(|x| by_mu[mu_unchecked(x, b as u64) as usize])
        .collect()
}

fn check_params(rule: &PolyLatticeRule, params: &SpaceParams) -> Result<()> {
    check_alpha(params.alpha)?;
    params.weights.ensure_dimension(rule.s())
}

/// `P_{α,γ,b^m}(q)` by the `φ_α` point sum; valid for every real `α > 1/2`.
pub fn p_merit_wal_closed(rule: &PolyLatticeRule, params: &SpaceParams) -> Result<MeritReport> {
    check_params(rule, params)?;
    let table = phi_table(rule.b, rule.m, params.alpha);
    let p = weighted_table_mean(&poly_lattice_points(rule), &table, &params.weights);
    Ok(MeritReport::value(p, Method::ClosedForm))
}

fn check_convolution_work(rule: &PolyLatticeRule) -> Result<()> {
    let n = rule.n();
    let work = n.saturating_mul(n).saturating_mul(1u64 << rule.s().min(63));
    if rule.s() > 16 || work > CONVOLUTION_WORK_MAX {
        return Err(resource(format!(
            "group convolution over b^m = {n} with s = {} exceeds the work cap",
            rule.s()
        )));
    }
    Ok(())
}

/// For every nonempty `u` (increasing mask order), the value at the group
/// identity of the convolution of the columns in `u` under `combine`/`merge`.
/// Results for smaller masks are reused.
fn subset_convolutions<T: Copy + Send + Sync>(
    cols: &[Vec<T>],
    b: u64,
    m: usize,
    identity: T,
    combine: impl Fn(T, T) -> T + Sync,
    merge: impl Fn(T, T) -> T + Sync,
) -> Vec<(Subset, T)> {
    let s = cols.len();
    let neg: Vec<u64> = (0..cols[0].len() as u64)
        .map(|t| digit_scale(t, b - 1, b, m))
        .collect();
    let mut memo: Vec<Vec<T>> = vec![Vec::new(); 1 << s];
    let mut out = Vec::new();
    for u in nonempty_subsets(s) {
        let mask = u.mask() as usize;
        let j = u.max_coord() - 1;
        let rest = mask & !(1 << j);
        let acc = if rest == 0 {
            cols[j].clone()
        } else {
            let f = &memo[rest];
            let g = &cols[j];
            (0..f.len())
                .into_par_iter()
                .map(|r| {
                    let mut v = identity;
                    for (t, &gt) in g.iter().enumerate() {
                        // f[r ⊖ t] · g[t], with ⊖ the digit-wise difference.
                        v = merge(
                            v,
                            combine(f[digit_add(r as u64, neg[t], b, m) as usize], gt),
                        );
                    }
                    v
                })
                .collect()
        };
        out.push((u, acc[0]));
        memo[mask] = acc;
    }
    out
}

/// Truncated dual series over `0 < k_j < b^{digit_cap}`.
///
/// Frequencies are grouped by the residue of `tr_m(k_j) q_j mod p`; the dual
/// condition becomes a convolution over the additive group of `G_m`. The
/// truncation bound is `Σ_u γ_u [(1 + A)^{|u|} − (1 + A_cap)^{|u|}]` evaluated through
/// the weight structure, where `A` is the full one-dimensional sum and `A_cap`
/// its capped part.
pub fn p_merit_wal_series(
    rule: &PolyLatticeRule,
    params: &SpaceParams,
    digit_cap: u32,
) -> Result<MeritReport> {
    check_params(rule, params)?;
    check_convolution_work(rule)?;
    let b = rule.b as u64;
    let limit = b
        .checked_pow(digit_cap)
        .filter(|&l| l <= SERIES_INDEX_MAX)
        .ok_or_else(|| resource(format!("b^digit_cap exceeds {SERIES_INDEX_MAX}")))?;
    let n = rule.n();
    let x = -2.0 * params.alpha;
    let bf = rule.b as f64;
    // weight_by_low[l]: Σ b^{-2αμ(k)} over 0 < k < b^cap with k ≡ l mod b^m.
    let mut weight_by_low = vec![0.0; n as usize];
    for k in (1..limit).rev() {
        weight_by_low[(k % n) as usize] += bf.powf(x * mu_unchecked(k, b) as f64);
    }
    let capped = pairwise_sum(&weight_by_low);
    let cols: Vec<Vec<f64>> = rule
        .q
        .iter()
        .map(|q| {
            let res = residue_column(&rule.p, q, rule.m)?;
            let mut col = vec![0.0; n as usize];
            for (l, &r) in res.iter().enumerate() {
                col[r as usize] += weight_by_low[l];
            }
            Ok(col)
        })
        .collect::<Result<_>>()?;
    let conv = subset_convolutions(&cols, b, rule.m, 0.0, |a, c| a * c, |a, c| a + c);
    let mut total = Vec::with_capacity(conv.len());
    let mut per_subset = Vec::with_capacity(conv.len());
    for (u, inner) in conv {
        total.push(params.weights.weight_unchecked(u) * inner);
        per_subset.push(SubsetEntry {
            u: u.to_vec(),
            inner,
            phi: None,
            phi0: None,
        });
    }
    let s = rule.s();
    let full = params
        .weights
        .subset_sum(s, &vec![walsh_zeta(params.alpha, rule.b); s]);
    let cut = params.weights.subset_sum(s, &vec![capped; s]);
    Ok(MeritReport {
        p_value: pairwise_sum(&total),
        rho_value: None,
        method: Method::TruncatedSeries,
        truncation_bound: Some((full - cut).max(0.0)),
        per_subset,
    })
}

/// Per-subset `φ_u(q)` and `φ_{u,0}(q)` in increasing mask order.
///
/// Every minimizer has `μ(k_j) ≤ m + 1`, so each component reduces to its
/// lowest `m` digits `l`: cost `μ(l)` for `l ≠ 0` and `m + 1` for `l = 0`
/// (the frequency `b^m`).
pub fn walsh_phi(rule: &PolyLatticeRule) -> Result<Vec<(Subset, u32, u32)>> {
    check_convolution_work(rule)?;
    let b = rule.b as u64;
    let m = rule.m;
    let n = rule.n() as usize;
    let unreachable = u32::MAX / 4;
    let mut positive = Vec::new();
    for q in &rule.q {
        let res = residue_column(&rule.p, q, m)?;
        let mut col = vec![unreachable; n];
        for (l, &r) in res.iter().enumerate() {
            let cost = if l == 0 {
                m as u32 + 1
            } else {
                mu_unchecked(l as u64, b)
            };
            col[r as usize] = col[r as usize].min(cost);
        }
        positive.push(col);
    }
    let phi = subset_convolutions(&positive, b, m, unreachable, |a, c| a + c, u32::min);
    // A dual vector with zeros in u is a positive dual vector of its support,
    // so φ_{u,0} is the minimum of φ_v over nonempty v ⊆ u.
    Ok(phi
        .iter()
        .map(|&(u, ph)| {
            let ph0 = u
                .nonempty_subsets()
                .map(|v| phi[v.mask() as usize - 1].1)
                .min()
                .expect("u nonempty");
            (u, ph, ph0)
        })
        .collect())
}

/// `ρ_{α,γ,b^m}(q) = max_u γ_u b^{−2α φ_u(q)}` with per-subset `φ_u` and `φ_{u,0}`.
/// The report also carries `P` from the closed form.
pub fn rho_wal(rule: &PolyLatticeRule, params: &SpaceParams) -> Result<MeritReport> {
    check_params(rule, params)?;
    let mut report = p_merit_wal_closed(rule, params)?;
    let phis = walsh_phi(rule)?;
    let bf = rule.b as f64;
    let mut rho = 0.0f64;
    let mut entries = Vec::with_capacity(phis.len());
    for (u, phi, phi0) in phis {
        let size = u.len() as u32;
        assert!(
            size <= phi && phi <= rule.m as u32 + size,
            "phi_u = {phi} outside [|u|, m + |u|] for u = {u}"
        );
        let value = bf.powf(-2.0 * params.alpha * phi as f64);
        rho = rho.max(params.weights.weight_unchecked(u) * value);
        entries.push(SubsetEntry {
            u: u.to_vec(),
            inner: value,
            phi: Some(phi as u64),
            phi0: Some(phi0 as u64),
        });
    }
    report.rho_value = Some(rho);
    report.per_subset = entries;
    Ok(report)
}

/// Result of [`cbc_construct_poly`].
#[derive(Debug, Clone, PartialEq)]
pub struct PolyCbcResult {
    pub rule: PolyLatticeRule,
    pub trace: CbcTrace,
    /// `false` when `p` is reducible, so the CBC error bound does not apply.
    pub certifiable: bool,
}

/// Component-by-component construction over all `q ∈ G_m ∖ {0}`.
///
/// Candidates are scanned in order of their integer encoding and the first
/// minimizer wins. Works for reducible `p`; the result then reports
/// `certifiable = false`.
pub fn cbc_construct_poly(p: &GfPoly, s: usize, params: &SpaceParams) -> Result<PolyCbcResult> {
    check_alpha(params.alpha)?;
    params.weights.ensure_dimension(s)?;
    if s == 0 {
        return Err(usage("dimension s must be at least 1"));
    }
    let first = PolyLatticeRule::new(p.clone(), vec![GfPoly::one(p.base())])?;
    let certifiable = p.is_irreducible().unwrap_or(false);
    let (b, m, n) = (first.b, first.m, first.n() as usize);
    let table = phi_table(b, m, params.alpha);
    let w = &params.weights;
    let merit_of = |cols: &[&[u64]]| {
        weighted_rows_mean(n, cols.len(), w, |i, buf| {
            for (x, col) in buf.iter_mut().zip(cols) {
                *x = table[col[i] as usize];
            }
        })
    };
    let column = |enc: u64| point_column(p, &GfPoly::from_encoding(b, enc), m);

    let mut chosen: Vec<Vec<u64>> = vec![column(1)?];
    let mut encodings = vec![1u64];
    let refs: Vec<&[u64]> = chosen.iter().map(|c| c.as_slice()).collect();
    let mut trace = CbcTrace {
        steps: vec![CbcStep {
            component: 1,
            merit: merit_of(&refs),
        }],
        evaluations: 1,
    };
    for _ in 1..s {
        let values: Vec<f64> = (1..n as u64)
            .into_par_iter()
            .map(|enc| {
                let col = column(enc).expect("candidate below b^m");
                let mut refs: Vec<&[u64]> = chosen.iter().map(|c| c.as_slice()).collect();
                refs.push(&col);
                merit_of(&refs)
            })
            .collect();
        let best = argmin_first(&values);
        let enc = best as u64 + 1;
        chosen.push(column(enc)?);
        encodings.push(enc);
        trace.steps.push(CbcStep {
            component: enc,
            merit: values[best],
        });
        trace.evaluations += values.len() as u64;
    }
    Ok(PolyCbcResult {
        rule: PolyLatticeRule::from_encodings(p.clone(), &encodings)?,
        trace,
        certifiable,
    })
}

/// `(1/b^m) Σ_x wal_k(x)` from the exact digits of the points.
pub fn walsh_char_sum(rule: &PolyLatticeRule, k: &[u64]) -> Complex64 {
    assert_eq!(k.len(), rule.s());
    let b = rule.b as u64;
    let m = rule.m;
    let roots: Vec<Complex64> = (0..b)
        .map(|t| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * t as f64 / b as f64))
        .collect();
    let pts = poly_lattice_points(rule);
    let mut sum = Complex64::new(0.0, 0.0);
    for x in pts.iter() {
        let mut phase = 0u64;
        for (&xj, &kj) in x.iter().zip(k) {
            // κ_i pairs with ξ_{i+1}, the digit of x_j's numerator at b^{m-1-i}.
            let mut kk = kj;
            for i in 0..m {
                if kk == 0 {
                    break;
                }
                let xi = xj / b.pow((m - 1 - i) as u32) % b;
                phase += (kk % b) * xi;
                kk /= b;
            }
        }
        sum += roots[(phase % b) as usize];
    }
    sum / pts.len() as f64
}
