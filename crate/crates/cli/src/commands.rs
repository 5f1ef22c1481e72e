use std::io::Write;

use qmcforge::cbc::{cbc_construct, cbc_construct_fast, CbcStep, CbcTrace};
use qmcforge::discrepancy::{
    star_disc_bound_lattice, star_disc_bound_poly, star_disc_bound_rho_lattice,
    star_disc_bound_rho_poly, weighted_exact_star_discrepancy, DiscrepancyReport, EXACT_N_MAX,
};
use qmcforge::gf::{smallest_irreducible, GfPoly};
use qmcforge::korobov::{lattice_points, p_merit, zaremba_rho};
use qmcforge::special::is_prime;
use qmcforge::stability::{
    combined_bound_eq1, jensen_certificate, jensen_certificate_poly, prop1_bound,
    prop1_certificate, prop2_bound, prop2_certificate, theorem1_bound, theorem2_bound_poly,
    StabilityCertificate,
};
use qmcforge::walsh::{
    cbc_construct_poly, p_merit_wal_closed, poly_lattice_points, rho_wal, PolyLatticeRule,
};
use qmcforge::{LatticeRule, MeritReport, SpaceParams, WeightSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::args::{CertifyArgs, ConstructArgs, EvaluateArgs, Format, Kind, SweepArgs, Theorem};
use crate::error::{usage, CliError, CliResult};
use crate::rule::{AnyRule, Construction, RuleDocument};

fn parse_weights(text: &str) -> CliResult<WeightSet> {
    Ok(text.parse::<WeightSet>()?)
}

fn write_file(path: &std::path::Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize")
}

/// Trace of a rule given up front: the merit of every leading projection.
fn prefix_trace(
    s: usize,
    merit: impl Fn(usize) -> qmcforge::Result<f64>,
    component: impl Fn(usize) -> u64,
) -> CliResult<CbcTrace> {
    let steps = (1..=s)
        .map(|l| {
            Ok(CbcStep {
                component: component(l - 1),
                merit: merit(l)?,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(CbcTrace {
        evaluations: s as u64,
        steps,
    })
}

fn construct_lattice(
    a: &ConstructArgs,
    params: &SpaceParams,
) -> CliResult<(AnyRule, CbcTrace, &'static str)> {
    let n =
        a.n.ok_or_else(|| usage("--N is required for lattice rules"))?;
    if n < 2 {
        return Err(usage(format!("--N {n} must be at least 2")));
    }
    let (rule, trace, method) = if a.random {
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        let rule = LatticeRule::new(n, (0..a.s).map(|_| rng.gen_range(1..n)).collect())?;
        let trace = prefix_trace(
            a.s,
            |l| Ok(p_merit(&rule.prefix(l), params)?.p_value),
            |j| rule.z()[j],
        )?;
        (rule, trace, "random")
    } else if a.fast {
        let (rule, trace) = cbc_construct_fast(n, a.s, params)?;
        (rule, trace, "cbc-fast")
    } else {
        let (rule, trace) = cbc_construct(n, a.s, params)?;
        (rule, trace, "cbc")
    };
    Ok((AnyRule::Lattice(rule), trace, method))
}

fn modulus(b: u32, m: usize, encoding: Option<u64>) -> CliResult<GfPoly> {
    match encoding {
        None => Ok(smallest_irreducible(b, m)?),
        Some(e) => {
            let p = GfPoly::from_encoding(b, e);
            if p.degree() != Some(m) {
                return Err(usage(format!(
                    "--p {e} encodes {p}, which does not have degree {m}"
                )));
            }
            Ok(p)
        }
    }
}

fn construct_poly(
    a: &ConstructArgs,
    params: &SpaceParams,
) -> CliResult<(AnyRule, CbcTrace, &'static str)> {
    let m =
        a.m.ok_or_else(|| usage("--m is required for polynomial lattice rules"))?;
    if a.fast {
        return Err(usage("--fast applies to lattice rules only"));
    }
    qmcforge::gf::check_base(a.b)?;
    let p = modulus(a.b, m, a.p)?;
    if a.random {
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        let top = (a.b as u64).pow(m as u32);
        let q: Vec<u64> = (0..a.s).map(|_| rng.gen_range(1..top)).collect();
        let rule = PolyLatticeRule::from_encodings(p, &q)?;
        let trace = prefix_trace(
            a.s,
            |l| Ok(p_merit_wal_closed(&rule.prefix(l), params)?.p_value),
            |j| q[j],
        )?;
        return Ok((AnyRule::PolyLattice(rule), trace, "random"));
    }
    let result = cbc_construct_poly(&p, a.s, params)?;
    if !result.certifiable {
        eprintln!("warning: {p} is reducible; the CBC error bound does not apply");
    }
    Ok((AnyRule::PolyLattice(result.rule), result.trace, "cbc"))
}

pub fn construct(a: &ConstructArgs) -> CliResult<()> {
    if a.s == 0 {
        return Err(usage("--s must be at least 1"));
    }
    let params = SpaceParams::new(a.alpha, parse_weights(&a.weights)?)?;
    let (rule, trace, method) = match a.kind {
        Kind::Lattice => construct_lattice(a, &params)?,
        Kind::PolyLattice => construct_poly(a, &params)?,
    };
    let doc = RuleDocument {
        rule,
        construction: Some(Construction {
            alpha: a.alpha,
            weights: a.weights.clone(),
            method: method.into(),
            seed: a.random.then_some(a.seed),
            trace,
        }),
    };
    let trace_json = to_json(&doc.construction.as_ref().expect("set above").trace);
    match &a.out {
        Some(path) => {
            write_file(path, &doc.to_json())?;
            println!("{trace_json}");
        }
        None => {
            println!("{}", doc.to_json());
            eprintln!("{trace_json}");
        }
    }
    Ok(())
}

/// `α` and weights from the flags, falling back to the construction record.
fn resolve_params(
    doc: &RuleDocument,
    alpha: Option<f64>,
    weights: &Option<String>,
) -> CliResult<(f64, String)> {
    let recorded = doc.construction.as_ref();
    let alpha = alpha
        .or(recorded.map(|c| c.alpha))
        .ok_or_else(|| usage("--alpha is required: the rule file records no construction"))?;
    let weights = weights
        .clone()
        .or(recorded.map(|c| c.weights.clone()))
        .ok_or_else(|| usage("--weights is required: the rule file records no construction"))?;
    Ok((alpha, weights))
}

#[derive(Debug, Serialize)]
struct EvaluateReport {
    merit: MeritReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    discrepancy: Option<DiscrepancyReport>,
}

fn merge(
    joe: DiscrepancyReport,
    rho: Option<DiscrepancyReport>,
    exact: Option<f64>,
) -> DiscrepancyReport {
    let (bound_rho, vacuous) = rho.map_or((None, false), |r| (r.bound_rho, r.vacuous));
    DiscrepancyReport {
        bound_joe: joe.bound_joe,
        bound_rho,
        vacuous,
        exact_dstar: exact,
        per_subset: joe.per_subset,
    }
}

fn lattice_discrepancy(r: &LatticeRule, alpha: f64, w: &WeightSet) -> CliResult<DiscrepancyReport> {
    let joe = star_disc_bound_lattice(r, w)?;
    let rho = if w.check_monotone(r.s())? {
        Some(star_disc_bound_rho_lattice(r, alpha, w, w)?)
    } else {
        None
    };
    let exact = if r.s() <= 2 && r.n() as usize <= EXACT_N_MAX {
        Some(weighted_exact_star_discrepancy(&lattice_points(r), w)?)
    } else {
        None
    };
    Ok(merge(joe, rho, exact))
}

fn poly_discrepancy(
    r: &PolyLatticeRule,
    alpha: f64,
    w: &WeightSet,
) -> CliResult<DiscrepancyReport> {
    let joe = star_disc_bound_poly(r, w)?;
    let rho = if w.check_monotone(r.s())? {
        Some(star_disc_bound_rho_poly(r, alpha, w, w)?)
    } else {
        None
    };
    let exact = if r.s() <= 2 && r.n() as usize <= EXACT_N_MAX {
        Some(weighted_exact_star_discrepancy(&poly_lattice_points(r), w)?)
    } else {
        None
    };
    Ok(merge(joe, rho, exact))
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

pub fn evaluate(a: &EvaluateArgs) -> CliResult<()> {
    let doc = RuleDocument::read(&a.rule)?;
    let (alpha, weights) = resolve_params(&doc, a.alpha, &a.weights)?;
    let w = parse_weights(&weights)?;
    let params = SpaceParams::new(alpha, w.clone())?;
    let report = match &doc.rule {
        AnyRule::Lattice(r) => EvaluateReport {
            merit: if a.rho {
                zaremba_rho(r, &params)?
            } else {
                p_merit(r, &params)?
            },
            discrepancy: a
                .discrepancy
                .then(|| lattice_discrepancy(r, alpha, &w))
                .transpose()?,
        },
        AnyRule::PolyLattice(r) => EvaluateReport {
            merit: if a.rho {
                rho_wal(r, &params)?
            } else {
                p_merit_wal_closed(r, &params)?
            },
            discrepancy: a
                .discrepancy
                .then(|| poly_discrepancy(r, alpha, &w))
                .transpose()?,
        },
    };
    match a.format {
        Format::Json => println!("{}", to_json(&report)),
        Format::Csv => {
            let mut out = csv::Writer::from_writer(std::io::stdout());
            out.write_record(["P", "rho", "bound_joe", "bound_rho", "exact_dstar"])?;
            let d = report.discrepancy.unwrap_or_default();
            out.write_record([
                report.merit.p_value.to_string(),
                cell(report.merit.rho_value),
                cell(d.bound_joe),
                cell(d.bound_rho),
                cell(d.exact_dstar),
            ])?;
            out.flush().map_err(|source| CliError::Io {
                path: "stdout".into(),
                source,
            })?;
        }
    }
    Ok(())
}

fn certificate(
    theorem: Theorem,
    rule: &AnyRule,
    alpha: f64,
    w: &WeightSet,
    ap: f64,
    wp: &WeightSet,
    lambda: f64,
    delta: f64,
) -> CliResult<StabilityCertificate> {
    let cert = match (theorem, rule) {
        (Theorem::Thm1, AnyRule::Lattice(r)) => theorem1_bound(r, alpha, w, ap, wp)?,
        (Theorem::Prop1, AnyRule::Lattice(r)) => prop1_certificate(r, alpha, w, lambda)?,
        (Theorem::Eq1, AnyRule::Lattice(r)) => combined_bound_eq1(r, alpha, w, ap, wp, lambda)?,
        (Theorem::Jensen, AnyRule::Lattice(r)) => jensen_certificate(r, alpha, w, delta)?,
        (Theorem::Thm2, AnyRule::PolyLattice(r)) => theorem2_bound_poly(r, alpha, w, ap, wp)?,
        (Theorem::Prop2, AnyRule::PolyLattice(r)) => prop2_certificate(r, alpha, w, lambda)?,
        (Theorem::Jensen, AnyRule::PolyLattice(r)) => jensen_certificate_poly(r, alpha, w, delta)?,
        (t, AnyRule::Lattice(_)) => {
            return Err(usage(format!("{t:?} applies to polynomial lattice rules")))
        }
        (t, AnyRule::PolyLattice(_)) => {
            return Err(usage(format!("{t:?} applies to lattice rules")))
        }
    };
    Ok(cert)
}

pub fn certify(a: &CertifyArgs) -> CliResult<()> {
    let doc = RuleDocument::read(&a.rule)?;
    let (alpha, weights) = resolve_params(&doc, a.alpha, &a.weights)?;
    let w = parse_weights(&weights)?;
    let wp = match &a.weights_prime {
        Some(text) => parse_weights(text)?,
        None => w.clone(),
    };
    let ap = a.alpha_prime.unwrap_or(alpha);
    let cert = certificate(a.theorem, &doc.rule, alpha, &w, ap, &wp, a.lambda, a.delta)?;
    println!("{}", to_json(&cert));
    if cert.passed {
        Ok(())
    } else {
        Err(CliError::CertificateFailed {
            lhs: cert.lhs,
            rhs: cert.rhs,
        })
    }
}

fn parse_grid(text: &str, primes: bool) -> CliResult<Vec<u64>> {
    let number = |s: &str| {
        s.trim()
            .parse::<u64>()
            .map_err(|_| usage(format!("bad grid value '{s}'")))
    };
    let mut values = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once("..") {
            Some((lo, hi)) => values.extend(number(lo)?..=number(hi)?),
            None => values.push(number(part)?),
        }
    }
    if primes {
        values.retain(|&v| is_prime(v));
    }
    values.sort_unstable();
    values.dedup();
    if values.is_empty() {
        return Err(usage("empty grid"));
    }
    Ok(values)
}

struct SweepRow {
    size: u64,
    n_points: f64,
    p: f64,
    prop_bound: f64,
    thm_rhs: Option<f64>,
    passed: Option<bool>,
}

/// Drops bounds that are undefined (non-monotone weights) or past an
/// enumeration cap; every other error aborts the sweep.
fn optional<T>(r: qmcforge::Result<T>) -> CliResult<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(qmcforge::Error::Precondition(_) | qmcforge::Error::Resource(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn sweep(a: &SweepArgs) -> CliResult<()> {
    let grid = parse_grid(&a.grid, a.primes)?;
    if a.s == 0 {
        return Err(usage("--s must be at least 1"));
    }
    let w = parse_weights(&a.weights)?;
    let wp = match &a.weights_prime {
        Some(text) => parse_weights(text)?,
        None => w.clone(),
    };
    let ap = a.alpha_prime.unwrap_or(a.alpha);
    let params = SpaceParams::new(a.alpha, w.clone())?;
    let thm = match a.kind {
        Kind::Lattice => Theorem::Thm1,
        Kind::PolyLattice => Theorem::Thm2,
    };
    if let Some(t) = a.certify {
        let allowed = match a.kind {
            Kind::Lattice => {
                [Theorem::Thm1, Theorem::Prop1, Theorem::Eq1, Theorem::Jensen].contains(&t)
            }
            Kind::PolyLattice => [Theorem::Thm2, Theorem::Prop2, Theorem::Jensen].contains(&t),
        };
        if !allowed {
            return Err(usage(format!(
                "--certify {t:?} does not apply to this rule kind"
            )));
        }
    }
    if a.fast && a.kind == Kind::PolyLattice {
        return Err(usage("--fast applies to lattice rules only"));
    }

    let mut rows = Vec::with_capacity(grid.len());
    for &v in &grid {
        let (rule, n_points, p, prop_bound) = match a.kind {
            Kind::Lattice => {
                let (r, _) = if a.fast {
                    cbc_construct_fast(v, a.s, &params)?
                } else {
                    cbc_construct(v, a.s, &params)?
                };
                let p = p_merit(&r, &params)?.p_value;
                (
                    AnyRule::Lattice(r),
                    v as f64,
                    p,
                    prop1_bound(v, a.s, a.alpha, &w, a.lambda)?,
                )
            }
            Kind::PolyLattice => {
                let m = v as usize;
                let poly = smallest_irreducible(a.b, m)?;
                let r = cbc_construct_poly(&poly, a.s, &params)?.rule;
                let p = p_merit_wal_closed(&r, &params)?.p_value;
                (
                    AnyRule::PolyLattice(r),
                    (a.b as f64).powi(m as i32),
                    p,
                    prop2_bound(a.b, m, a.s, a.alpha, &w, a.lambda)?,
                )
            }
        };
        let thm_rhs = match &rule {
            AnyRule::Lattice(r) => optional(theorem1_bound(r, a.alpha, &w, ap, &wp))?,
            AnyRule::PolyLattice(r) => optional(theorem2_bound_poly(r, a.alpha, &w, ap, &wp))?,
        }
        .map(|c| c.rhs);
        let passed = match a.certify {
            Some(t) => Some(certificate(t, &rule, a.alpha, &w, ap, &wp, a.lambda, 0.5)?.passed),
            None => None,
        };
        rows.push(SweepRow {
            size: v,
            n_points,
            p,
            prop_bound,
            thm_rhs,
            passed,
        });
    }

    let sink: Box<dyn Write> = match &a.out {
        Some(path) => Box::new(std::fs::File::create(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?),
        None => Box::new(std::io::stdout()),
    };
    let mut out = csv::Writer::from_writer(sink);
    let thm_col = match thm {
        Theorem::Thm1 => "thm1_rhs",
        _ => "thm2_rhs",
    };
    let mut header = vec!["N_or_m", "P", "sqrtP", "prop_bound", thm_col];
    if a.certify.is_some() {
        header.push("passed");
    }
    out.write_record(&header)?;
    for row in &rows {
        let mut record = vec![
            row.size.to_string(),
            row.p.to_string(),
            row.p.sqrt().to_string(),
            row.prop_bound.to_string(),
            cell(row.thm_rhs),
        ];
        if let Some(passed) = row.passed {
            record.push(passed.to_string());
        }
        out.write_record(&record)?;
    }
    let mut sink = out
        .into_inner()
        .map_err(|e| usage(format!("cannot flush CSV output: {e}")))?;
    let fit: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.n_points.ln(), r.p.sqrt().ln()))
        .collect();
    if let Some(slope) = least_squares_slope(&fit) {
        writeln!(sink, "# slope_log_sqrtP_vs_log_N,{slope}").map_err(|source| CliError::Io {
            path: "output".into(),
            source,
        })?;
    }
    if rows.iter().any(|r| r.passed == Some(false)) {
        let bad = rows
            .iter()
            .find(|r| r.passed == Some(false))
            .expect("checked");
        return Err(CliError::CertificateFailed {
            lhs: bad.p,
            rhs: bad.thm_rhs.unwrap_or(f64::NAN),
        });
    }
    Ok(())
}
