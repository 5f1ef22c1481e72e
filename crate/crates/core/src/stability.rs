//! Certificates for the stability bounds: the worst-case error under target
//! parameters `(α', γ')` bounded through the maximal dual term `ρ` under the
//! construction parameters `(α, γ)`, the CBC error bounds, and finite-grid
//! probes of the tractability statements.

use serde::{Deserialize, Serialize};

use crate::cbc::cbc_construct;
use crate::discrepancy::{k_b, star_disc_bound_rho_lattice, star_disc_bound_rho_poly};
use crate::error::{domain, precondition, usage, Result};
use crate::gf::smallest_irreducible;
use crate::korobov::{p_merit, zaremba_rho, LatticeRule};
use crate::special::{euler_totient, zeta};
use crate::subset::nonempty_subsets;
use crate::walsh::{cbc_construct_poly, p_merit_wal_closed, rho_wal, walsh_zeta, PolyLatticeRule};
use crate::weights::{elementary_symmetric, SpaceParams, WeightKind, WeightSet, ENUMERATION_S_MAX};

/// Relative slack on certificate inequalities.
pub const CERTIFICATE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateComponents {
    pub rho: Option<f64>,
    pub c_alpha_prime: Option<f64>,
    pub subset_sum: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityCertificate {
    pub lhs: f64,
    /// Infinite when the bound is vacuous.
    pub rhs: f64,
    pub margin: f64,
    pub components: CertificateComponents,
    pub passed: bool,
    /// `γ_u = 0 < γ'_u` for some `u`: the bound holds trivially.
    pub vacuous: bool,
}

impl StabilityCertificate {
    pub fn new(lhs: f64, rhs: f64, components: CertificateComponents, vacuous: bool) -> Self {
        let rhs = if vacuous { f64::INFINITY } else { rhs };
        StabilityCertificate {
            lhs,
            rhs,
            margin: rhs - lhs,
            components,
            passed: vacuous || lhs <= rhs * (1.0 + CERTIFICATE_SLACK),
            vacuous,
        }
    }
}

/// `c_{α'} = (1 + ζ(2α')) + (2^{2α'} + ζ(2α')) (2^{2α'−1} − 1) / 2^{4α'}`.
pub fn c_alpha_prime(alpha_prime: f64) -> Result<f64> {
    if !(alpha_prime > 0.5) {
        return Err(domain(format!("alpha' = {alpha_prime} must exceed 1/2")));
    }
    let z = zeta(2.0 * alpha_prime)?;
    let t = 2f64.powf(2.0 * alpha_prime);
    Ok((1.0 + z) + (t + z) * (t / 2.0 - 1.0) / (t * t))
}

/// `(Γ_1..Γ_s, γ_1..γ_s)` for weights of the form `Γ_{|u|} ∏ γ_j`.
fn pod_form(w: &WeightSet, s: usize) -> Option<(Vec<f64>, Vec<f64>)> {
    match w.kind() {
        WeightKind::Product { gamma } => Some((vec![1.0; s], gamma[..s].to_vec())),
        WeightKind::Pod { order, gamma } => Some((order[..s].to_vec(), gamma[..s].to_vec())),
        WeightKind::OrderDependent { order } => Some((order[..s].to_vec(), vec![1.0; s])),
        WeightKind::Explicit { .. } => None,
    }
}

/// `Σ_u (γ'_u / γ_u^r) g(|u|)` over nonempty `u ⊆ {1..s}` with `γ'_u ≠ 0`, and
/// whether some such `u` has `γ_u = 0`. Without a denominator the ratio is `γ'_u`.
pub fn ratio_sum(
    s: usize,
    target: &WeightSet,
    base: Option<(&WeightSet, f64)>,
    g: impl Fn(usize) -> f64,
) -> Result<(f64, bool)> {
    target.ensure_dimension(s)?;
    if let Some((w, _)) = base {
        w.ensure_dimension(s)?;
    }
    let structured = pod_form(target, s).and_then(|num| match base {
        None => Some((num, (vec![1.0; s], vec![1.0; s]), 1.0)),
        Some((w, r)) => pod_form(w, s).map(|den| (num, den, r)),
    });
    if let Some(((num_order, num_gamma), (den_order, den_gamma), r)) = structured {
        if den_order.iter().chain(&den_gamma).all(|&x| x > 0.0) {
            let c: Vec<f64> = num_gamma
                .iter()
                .zip(&den_gamma)
                .map(|(&a, &d)| a / d.powf(r))
                .collect();
            let e = elementary_symmetric(s, |j| c[j]);
            let sum = (1..=s)
                .map(|k| num_order[k - 1] / den_order[k - 1].powf(r) * g(k) * e[k])
                .sum();
            return Ok((sum, false));
        }
    }
    if s > ENUMERATION_S_MAX {
        return Err(crate::error::resource(format!(
            "2^{s} subset enumeration exceeds s = {ENUMERATION_S_MAX}"
        )));
    }
    let mut sum = 0.0;
    let mut vacuous = false;
    for u in nonempty_subsets(s) {
        let gp = target.weight_unchecked(u);
        if gp == 0.0 {
            continue;
        }
        let d = match base {
            None => 1.0,
            Some((w, r)) => w.weight_unchecked(u).powf(r),
        };
        if d == 0.0 {
            vacuous = true;
            continue;
        }
        sum += gp / d * g(u.len());
    }
    Ok((sum, vacuous))
}

fn require_monotone(w: &WeightSet, s: usize) -> Result<()> {
    if !w.check_monotone(s)? {
        return Err(precondition(
            "weights must satisfy gamma_v >= gamma_u whenever v is a subset of u",
        ));
    }
    Ok(())
}

/// `Σ_u (γ'_u/γ_u^{α'/α}) (2^{2α'+1}/(2^{2α'−1} − 1))^{|u|} (log₂ N)^{|u|−1}`.
fn lattice_stability_sum(
    n: u64,
    s: usize,
    alpha: f64,
    w: &WeightSet,
    ap: f64,
    wp: &WeightSet,
) -> Result<(f64, bool)> {
    let f = 2f64.powf(2.0 * ap + 1.0) / (2f64.powf(2.0 * ap - 1.0) - 1.0);
    let l = (n as f64).log2();
    ratio_sum(s, wp, Some((w, ap / alpha)), |k| {
        f.powi(k as i32) * l.powi(k as i32 - 1)
    })
}

/// `Σ_u (γ'_u/γ_u^{α'/α}) (b^{2α'−1}(b − 1)/(b^{2α'−1} − 1))^{|u|} (m + 1)^{|u|−1}`.
fn poly_stability_sum(
    b: u32,
    m: usize,
    s: usize,
    alpha: f64,
    w: &WeightSet,
    ap: f64,
    wp: &WeightSet,
) -> Result<(f64, bool)> {
    let t = (b as f64).powf(2.0 * ap - 1.0);
    let f = t * (b as f64 - 1.0) / (t - 1.0);
    let l = m as f64 + 1.0;
    ratio_sum(s, wp, Some((w, ap / alpha)), |k| {
        f.powi(k as i32) * l.powi(k as i32 - 1)
    })
}

/// Lattice stability bound with `ρ` from `(α, γ)` and the left side
/// `P_{α',γ',N}(z)`. Needs monotone `γ`.
pub fn theorem1_bound(
    rule: &LatticeRule,
    alpha: f64,
    w: &WeightSet,
    alpha_prime: f64,
    wp: &WeightSet,
) -> Result<StabilityCertificate> {
    let s = rule.s();
    require_monotone(w, s)?;
    let c = c_alpha_prime(alpha_prime)?;
    let rho = zaremba_rho(rule, &SpaceParams::new(alpha, w.clone())?)?
        .rho_value
        .expect("rho is set");
    let lhs = p_merit(rule, &SpaceParams::new(alpha_prime, wp.clone())?)?.p_value;
    let (sum, vacuous) = lattice_stability_sum(rule.n(), s, alpha, w, alpha_prime, wp)?;
    let rhs = c * rho.powf(alpha_prime / alpha) * sum;
    let components = CertificateComponents {
        rho: Some(rho),
        c_alpha_prime: Some(c),
        subset_sum: Some(sum),
    };
    Ok(StabilityCertificate::new(lhs, rhs, components, vacuous))
}

/// Polynomial lattice stability bound with `ρ` from `(α, γ)` and the left side
/// `P_{α',γ',b^m}(q)`.
pub fn theorem2_bound_poly(
    rule: &PolyLatticeRule,
    alpha: f64,
    w: &WeightSet,
    alpha_prime: f64,
    wp: &WeightSet,
) -> Result<StabilityCertificate> {
    let rho = rho_wal(rule, &SpaceParams::new(alpha, w.clone())?)?
        .rho_value
        .expect("rho is set");
    let lhs = p_merit_wal_closed(rule, &SpaceParams::new(alpha_prime, wp.clone())?)?.p_value;
    let (sum, vacuous) =
        poly_stability_sum(rule.b(), rule.m(), rule.s(), alpha, w, alpha_prime, wp)?;
    let rhs = rho.powf(alpha_prime / alpha) * sum;
    let components = CertificateComponents {
        rho: Some(rho),
        c_alpha_prime: None,
        subset_sum: Some(sum),
    };
    Ok(StabilityCertificate::new(lhs, rhs, components, vacuous))
}

fn check_lambda(alpha: f64, lambda: f64) -> Result<()> {
    if !(lambda > 1.0 / (2.0 * alpha) && lambda <= 1.0) {
        return Err(usage(format!(
            "lambda = {lambda} must lie in (1/(2 alpha), 1] = ({}, 1]",
            1.0 / (2.0 * alpha)
        )));
    }
    Ok(())
}

/// `(1/φ(N)) Σ_u γ_u^λ (2ζ(2αλ))^{|u|}`; the CBC bound is its `1/λ` power.
fn prop1_inner(n: u64, s: usize, alpha: f64, w: &WeightSet, lambda: f64) -> Result<f64> {
    check_lambda(alpha, lambda)?;
    Ok(w.weighted_zeta_sum(s, lambda, alpha)? / euler_totient(n) as f64)
}

/// CBC error bound for lattice rules,
/// `((1/φ(N)) Σ_u γ_u^λ (2ζ(2αλ))^{|u|})^{1/λ}` for `1/(2α) < λ ≤ 1`.
pub fn prop1_bound(n: u64, s: usize, alpha: f64, w: &WeightSet, lambda: f64) -> Result<f64> {
    Ok(prop1_inner(n, s, alpha, w, lambda)?.powf(1.0 / lambda))
}

/// CBC error bound for polynomial lattice rules with irreducible `p`,
/// `((1/(b^m − 1)) Σ_u γ_u^λ ((b − 1)/(b^{2αλ} − b))^{|u|})^{1/λ}`.
pub fn prop2_bound(
    b: u32,
    m: usize,
    s: usize,
    alpha: f64,
    w: &WeightSet,
    lambda: f64,
) -> Result<f64> {
    check_lambda(alpha, lambda)?;
    w.ensure_dimension(s)?;
    let n = (b as f64).powi(m as i32);
    let sum = w
        .powf(lambda)
        .subset_sum(s, &vec![walsh_zeta(alpha * lambda, b); s]);
    Ok((sum / (n - 1.0)).powf(1.0 / lambda))
}

/// `P_{α,γ,N}(z) ≤ prop1_bound` with `ρ` recorded in the components.
pub fn prop1_certificate(
    rule: &LatticeRule,
    alpha: f64,
    w: &WeightSet,
    lambda: f64,
) -> Result<StabilityCertificate> {
    let params = SpaceParams::new(alpha, w.clone())?;
    let lhs = p_merit(rule, &params)?.p_value;
    let rhs = prop1_bound(rule.n(), rule.s(), alpha, w, lambda)?;
    let components = CertificateComponents {
        rho: None,
        c_alpha_prime: None,
        subset_sum: None,
    };
    Ok(StabilityCertificate::new(lhs, rhs, components, false))
}

/// `ρ ≤ P_{α,γ,b^m}(q) ≤ prop2_bound`; the left inequality is folded into `passed`.
pub fn prop2_certificate(
    rule: &PolyLatticeRule,
    alpha: f64,
    w: &WeightSet,
    lambda: f64,
) -> Result<StabilityCertificate> {
    let rep = rho_wal(rule, &SpaceParams::new(alpha, w.clone())?)?;
    let rho = rep.rho_value.expect("rho is set");
    let rhs = prop2_bound(rule.b(), rule.m(), rule.s(), alpha, w, lambda)?;
    let components = CertificateComponents {
        rho: Some(rho),
        c_alpha_prime: None,
        subset_sum: None,
    };
    let mut cert = StabilityCertificate::new(rep.p_value, rhs, components, false);
    cert.passed &= rho <= rep.p_value * (1.0 + CERTIFICATE_SLACK);
    Ok(cert)
}

/// Stability bound with `ρ` replaced by the CBC error bound:
/// `c_{α'} X^{α'/(αλ)} Σ_u (γ'_u/γ_u^{α'/α}) (…)^{|u|} (log₂ N)^{|u|−1}` with
/// `X = (1/φ(N)) Σ_u γ_u^λ (2ζ(2αλ))^{|u|}`.
pub fn combined_bound_eq1(
    rule: &LatticeRule,
    alpha: f64,
    w: &WeightSet,
    alpha_prime: f64,
    wp: &WeightSet,
    lambda: f64,
) -> Result<StabilityCertificate> {
    let s = rule.s();
    require_monotone(w, s)?;
    let c = c_alpha_prime(alpha_prime)?;
    let x = prop1_inner(rule.n(), s, alpha, w, lambda)?;
    let lhs = p_merit(rule, &SpaceParams::new(alpha_prime, wp.clone())?)?.p_value;
    let (sum, vacuous) = lattice_stability_sum(rule.n(), s, alpha, w, alpha_prime, wp)?;
    let rhs = c * x.powf(alpha_prime / (alpha * lambda)) * sum;
    let components = CertificateComponents {
        rho: None,
        c_alpha_prime: Some(c),
        subset_sum: Some(sum),
    };
    Ok(StabilityCertificate::new(lhs, rhs, components, vacuous))
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(usage(format!("delta = {delta} must lie in (0, 1]")));
    }
    Ok(())
}

/// `P_{α/δ, γ^{1/δ}, N}(z)^δ ≤ P_{α,γ,N}(z)`.
pub fn jensen_certificate(
    rule: &LatticeRule,
    alpha: f64,
    w: &WeightSet,
    delta: f64,
) -> Result<StabilityCertificate> {
    check_delta(delta)?;
    let rhs = p_merit(rule, &SpaceParams::new(alpha, w.clone())?)?.p_value;
    let lifted = p_merit(rule, &SpaceParams::new(alpha / delta, w.powf(1.0 / delta))?)?.p_value;
    let components = CertificateComponents {
        rho: None,
        c_alpha_prime: None,
        subset_sum: None,
    };
    Ok(StabilityCertificate::new(
        lifted.powf(delta),
        rhs,
        components,
        false,
    ))
}

/// `P_{α/δ, γ^{1/δ}, b^m}(q)^δ ≤ P_{α,γ,b^m}(q)`.
pub fn jensen_certificate_poly(
    rule: &PolyLatticeRule,
    alpha: f64,
    w: &WeightSet,
    delta: f64,
) -> Result<StabilityCertificate> {
    check_delta(delta)?;
    let rhs = p_merit_wal_closed(rule, &SpaceParams::new(alpha, w.clone())?)?.p_value;
    let lifted =
        p_merit_wal_closed(rule, &SpaceParams::new(alpha / delta, w.powf(1.0 / delta))?)?.p_value;
    let components = CertificateComponents {
        rho: None,
        c_alpha_prime: None,
        subset_sum: None,
    };
    Ok(StabilityCertificate::new(
        lifted.powf(delta),
        rhs,
        components,
        false,
    ))
}

/// `(1/φ(N), (1/N)(e^γ log log N + 2.50637/log log N))` for `N ≥ 3`.
pub fn totient_bound(n: u64) -> Result<(f64, f64)> {
    if n < 3 {
        return Err(usage("totient bound needs N >= 3"));
    }
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    let ll = (n as f64).ln().ln();
    Ok((
        1.0 / euler_totient(n) as f64,
        (EULER_GAMMA.exp() * ll + 2.50637 / ll) / n as f64,
    ))
}

// ---------------------------------------------------------------------------
// Finite-grid probes of the tractability statements
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorollaryKind {
    /// Worst-case error of lattice rules.
    Cor1,
    /// Weighted star discrepancy of lattice rules.
    Cor2,
    /// Worst-case error of polynomial lattice rules.
    Cor3,
    /// Weighted star discrepancy of polynomial lattice rules.
    Cor4,
}

impl CorollaryKind {
    fn is_poly(self) -> bool {
        matches!(self, CorollaryKind::Cor3 | CorollaryKind::Cor4)
    }
}

impl std::str::FromStr for CorollaryKind {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cor1" => Ok(CorollaryKind::Cor1),
            "cor2" => Ok(CorollaryKind::Cor2),
            "cor3" => Ok(CorollaryKind::Cor3),
            "cor4" => Ok(CorollaryKind::Cor4),
            other => Err(usage(format!(
                "unknown corollary {other:?}; expected cor1..cor4"
            ))),
        }
    }
}

/// Exponents of a probe. `q1` and `q2` stand for `q'` and `q''`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorollaryProbe {
    pub lambda: f64,
    pub delta: f64,
    #[serde(default)]
    pub q: f64,
    #[serde(default)]
    pub q1: f64,
    #[serde(default)]
    pub q2: f64,
}

/// One grid cell: the finite quantities under each supremum, the measured
/// value, and the rate envelope without its constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub s: usize,
    /// `N` for lattice probes, `m` for polynomial lattice probes.
    pub n_or_m: u64,
    pub sup_terms: Vec<f64>,
    /// `P_{α',γ',·}` for the error probes, the `ρ`-based discrepancy bound otherwise.
    pub measured: f64,
    pub envelope: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeTable {
    pub kind: CorollaryKind,
    pub probe: CorollaryProbe,
    pub rows: Vec<ProbeRow>,
    /// Largest observed `measured / envelope`.
    pub constant: f64,
    /// For product weights: `(s, Σ_{j≤s} γ_j^λ, Σ_{j≤s} γ'_j/γ_j^r)` with `r = α'/α`
    /// for the error probes and `1/(2α)` for the discrepancy probes.
    pub product_partial_sums: Vec<(usize, f64, f64)>,
}

/// Inputs shared by every probe cell.
#[derive(Debug, Clone)]
pub struct ProbeSetup {
    pub alpha: f64,
    pub weights: WeightSet,
    pub alpha_prime: f64,
    pub target: WeightSet,
    /// Base for the polynomial lattice probes.
    pub b: u32,
}

fn check_probe(kind: CorollaryKind, setup: &ProbeSetup, probe: &CorollaryProbe) -> Result<()> {
    check_lambda(setup.alpha, probe.lambda)?;
    let cap = match kind {
        CorollaryKind::Cor1 | CorollaryKind::Cor3 => {
            setup.alpha_prime / (setup.alpha * probe.lambda)
        }
        CorollaryKind::Cor2 | CorollaryKind::Cor4 => 1.0 / (setup.alpha * probe.lambda),
    };
    if !(probe.delta > 0.0 && probe.delta < cap) {
        return Err(usage(format!(
            "delta = {} must lie in (0, {cap})",
            probe.delta
        )));
    }
    if [probe.q, probe.q1, probe.q2].iter().any(|&q| !(q >= 0.0)) {
        return Err(usage("exponents q, q', q'' must be nonnegative"));
    }
    Ok(())
}

/// Evaluates one corollary over a grid of `(s, N)` or `(s, m)` cells with rules
/// built by CBC under `(α, γ)`. Nothing is asserted; the table reports the
/// quantities and the empirical constant.
pub fn corollary_probe(
    kind: CorollaryKind,
    setup: &ProbeSetup,
    probe: &CorollaryProbe,
    grid: &[(usize, u64)],
) -> Result<ProbeTable> {
    check_probe(kind, setup, probe)?;
    let (alpha, ap, lambda, delta) = (setup.alpha, setup.alpha_prime, probe.lambda, probe.delta);
    let (w, wp) = (&setup.weights, &setup.target);
    let params = SpaceParams::new(alpha, w.clone())?;
    let b = setup.b;
    let mut rows = Vec::with_capacity(grid.len());
    for &(s, nm) in grid {
        if s == 0 {
            return Err(usage("grid dimension s must be at least 1"));
        }
        let sf = s as f64;
        // Summability term on γ shared by the items of each pair.
        let first = if kind.is_poly() {
            w.powf(lambda)
                .subset_sum(s, &vec![walsh_zeta(alpha * lambda, b); s])
        } else {
            w.weighted_zeta_sum(s, lambda, alpha)?
        } / sf.powf(probe.q);
        let (scale, measured, kfac) = if kind.is_poly() {
            let m = nm as usize;
            let p = smallest_irreducible(b, m)?;
            let rule = cbc_construct_poly(&p, s, &params)?.rule;
            let measured = match kind {
                CorollaryKind::Cor3 => {
                    p_merit_wal_closed(&rule, &SpaceParams::new(ap, wp.clone())?)?.p_value
                }
                _ => star_disc_bound_rho_poly(&rule, alpha, w, wp)?
                    .bound_rho
                    .expect("bound is set"),
            };
            (
                (b as f64).powf(m as f64),
                measured,
                k_b(b) * (m as f64 + 1.0),
            )
        } else {
            let (rule, _) = cbc_construct(nm, s, &params)?;
            let measured = match kind {
                CorollaryKind::Cor1 => p_merit(&rule, &SpaceParams::new(ap, wp.clone())?)?.p_value,
                _ => star_disc_bound_rho_lattice(&rule, alpha, w, wp)?
                    .bound_rho
                    .expect("bound is set"),
            };
            (euler_totient(nm) as f64, measured, 2.0 * (nm as f64).log2())
        };
        let (sup_terms, envelope) = match kind {
            CorollaryKind::Cor1 | CorollaryKind::Cor3 => {
                let (sum, _) = if kind.is_poly() {
                    poly_stability_sum(b, nm as usize, s, alpha, w, ap, wp)?
                } else {
                    lattice_stability_sum(nm, s, alpha, w, ap, wp)?
                };
                let second = sum / (sf.powf(probe.q1) * scale.powf(delta));
                let rate = ap / (alpha * lambda);
                (
                    vec![first, second],
                    sf.powf(probe.q * rate + probe.q1) * scale.powf(-rate + delta),
                )
            }
            CorollaryKind::Cor2 | CorollaryKind::Cor4 => {
                let (sizes, _) = ratio_sum(s, wp, None, |k| k as f64)?;
                let (dual, _) = ratio_sum(s, wp, Some((w, 1.0 / (2.0 * alpha))), |k| {
                    kfac.powi(k as i32)
                })?;
                let second = sizes / sf.powf(probe.q1);
                let third = dual / (sf.powf(probe.q2) * scale.powf(delta));
                let rate = 1.0 / (2.0 * alpha * lambda);
                let exponent = probe.q1.max(probe.q * rate + probe.q2);
                (
                    vec![first, second, third],
                    sf.powf(exponent) * scale.powf(-rate + delta),
                )
            }
        };
        let ratio = if envelope > 0.0 {
            measured / envelope
        } else {
            0.0
        };
        rows.push(ProbeRow {
            s,
            n_or_m: nm,
            sup_terms,
            measured,
            envelope,
            ratio,
        });
    }
    let constant = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let r = match kind {
        CorollaryKind::Cor1 | CorollaryKind::Cor3 => ap / alpha,
        _ => 1.0 / (2.0 * alpha),
    };
    let product_partial_sums = match (w.product_gammas(), wp.product_gammas()) {
        (Some(g), Some(gp)) => {
            let mut sizes: Vec<usize> = grid.iter().map(|c| c.0).collect();
            sizes.sort_unstable();
            sizes.dedup();
            sizes
                .into_iter()
                .map(|s| {
                    let a: f64 = g[..s].iter().map(|x| x.powf(lambda)).sum();
                    let c: f64 = g[..s]
                        .iter()
                        .zip(&gp[..s])
                        .map(|(x, y)| if *y == 0.0 { 0.0 } else { y / x.powf(r) })
                        .sum();
                    (s, a, c)
                })
                .collect()
        }
        _ => Vec::new(),
    };
    Ok(ProbeTable {
        kind,
        probe: *probe,
        rows,
        constant,
        product_partial_sums,
    })
}
