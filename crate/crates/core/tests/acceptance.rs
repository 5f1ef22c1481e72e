//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p qmcforge --test acceptance`.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use qmcforge::cbc::{cbc_construct, cbc_construct_fast};
use qmcforge::discrepancy::{
    star_disc_bound_lattice, star_disc_bound_poly, star_disc_bound_rho_lattice,
    star_disc_bound_rho_poly, weighted_exact_star_discrepancy,
};
use qmcforge::gf::{smallest_irreducible, GfPoly};
use qmcforge::korobov::{
    lattice_char_sum, lattice_points, p_merit_closed, p_merit_series, zaremba_rho,
};
use qmcforge::oracle::dual_enumerate_poly;
use qmcforge::stability::{
    jensen_certificate, jensen_certificate_poly, prop1_certificate, prop2_certificate,
    theorem1_bound, theorem2_bound_poly, totient_bound, StabilityCertificate,
};
use qmcforge::walsh::{
    cbc_construct_poly, p_merit_wal_closed, p_merit_wal_series, poly_lattice_points,
    walsh_char_sum, walsh_phi, PolyLatticeRule,
};
use qmcforge::{LatticeRule, Result, SpaceParams, WeightSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = std::result::Result<String, String>;

const SEED: u64 = 20_240_917;
const SLACK: f64 = 1e-9;

fn product(exponent: f64, s: usize) -> WeightSet {
    WeightSet::product((1..=s).map(|j| (j as f64).powf(exponent)).collect()).unwrap()
}

fn params(alpha: f64, w: &WeightSet) -> SpaceParams {
    SpaceParams::new(alpha, w.clone()).unwrap()
}

fn monic_polys(b: u32, m: usize) -> impl Iterator<Item = GfPoly> {
    let lo = (b as u64).pow(m as u32);
    (lo..b as u64 * lo)
        .map(move |e| GfPoly::from_encoding(b, e))
        .filter(GfPoly::is_monic)
}

fn irreducibles(b: u32, m: usize) -> Vec<GfPoly> {
    monic_polys(b, m)
        .filter(|p| p.is_irreducible().unwrap())
        .collect()
}

/// All generating vectors in `{1, …, top − 1}^s`.
fn all_vectors(top: u64, s: usize) -> Vec<Vec<u64>> {
    let mut out = vec![vec![]];
    for _ in 0..s {
        out = out
            .into_iter()
            .flat_map(|v| (1..top).map(move |c| [v.clone(), vec![c]].concat()))
            .collect();
    }
    out
}

fn random_lattice(rng: &mut ChaCha8Rng, n: u64, s: usize) -> LatticeRule {
    LatticeRule::new(n, (0..s).map(|_| rng.gen_range(1..n)).collect()).unwrap()
}

fn random_poly(rng: &mut ChaCha8Rng, p: &GfPoly, s: usize) -> PolyLatticeRule {
    let top = (p.base() as u64).pow(p.degree().unwrap() as u32);
    let q: Vec<u64> = (0..s).map(|_| rng.gen_range(1..top)).collect();
    PolyLatticeRule::from_encodings(p.clone(), &q).unwrap()
}

struct Tally {
    checked: usize,
    failures: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Tally {
            checked: 0,
            failures: Vec::new(),
        }
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn certificate(&mut self, cert: Result<StabilityCertificate>, what: impl FnOnce() -> String) {
        match cert {
            Ok(c) => self.record(c.passed, || {
                format!("{}: lhs {:.6e} > rhs {:.6e}", what(), c.lhs, c.rhs)
            }),
            Err(e) => self.record(false, || format!("{}: {e}", what())),
        }
    }

    fn finish(self, noun: &str) -> Outcome {
        if self.failures.is_empty() {
            Ok(format!("{} {noun} checked", self.checked))
        } else {
            let shown: Vec<&str> = self.failures.iter().take(3).map(String::as_str).collect();
            Err(format!(
                "{} of {} {noun} failed; first: {}",
                self.failures.len(),
                self.checked,
                shown.join("; ")
            ))
        }
    }
}

fn criterion_1() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0u64;
    for n in 2..=32u64 {
        let kb = 2 * n as i64;
        for s in 1..=2 {
            for z in all_vectors(n, s) {
                let rule = LatticeRule::new(n, z.clone()).unwrap();
                let mut k = vec![-kb; s];
                loop {
                    let dot: i64 = k.iter().zip(&z).map(|(&a, &b)| a * b as i64).sum();
                    let expected = if dot.rem_euclid(n as i64) == 0 {
                        1.0
                    } else {
                        0.0
                    };
                    let sum = lattice_char_sum(&rule, &k);
                    worst = worst.max((sum - expected).norm());
                    count += 1;
                    let mut d = 0;
                    while d < s && k[d] == kb {
                        k[d] = -kb;
                        d += 1;
                    }
                    if d == s {
                        break;
                    }
                    k[d] += 1;
                }
            }
        }
    }
    let mut worst_walsh = 0.0f64;
    let mut count_walsh = 0u64;
    for m in 1..=4usize {
        let cap = 1u64 << (m + 1);
        for p in monic_polys(2, m) {
            for s in 1..=2 {
                for q in all_vectors(1 << m, s) {
                    let rule = PolyLatticeRule::from_encodings(p.clone(), &q).unwrap();
                    let duals: HashSet<Vec<u64>> = dual_enumerate_poly(&rule, m as u32 + 1)
                        .unwrap()
                        .into_iter()
                        .collect();
                    let mut k = vec![0u64; s];
                    loop {
                        let expected = if duals.contains(&k) { 1.0 } else { 0.0 };
                        worst_walsh =
                            worst_walsh.max((walsh_char_sum(&rule, &k) - expected).norm());
                        count_walsh += 1;
                        let mut d = 0;
                        while d < s && k[d] + 1 == cap {
                            k[d] = 0;
                            d += 1;
                        }
                        if d == s {
                            break;
                        }
                        k[d] += 1;
                    }
                }
            }
        }
    }
    let detail = format!(
        "lattice: {count} sums, max deviation {worst:.2e}; walsh: {count_walsh} sums, max deviation {worst_walsh:.2e}"
    );
    if worst < 1e-9 && worst_walsh < 1e-9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

const LATTICE_GRID_N: [u64; 7] = [5, 8, 13, 16, 31, 37, 64];

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut tally = Tally::new();
    for &n in &LATTICE_GRID_N {
        for s in 1..=3 {
            let w = product(-2.0, s);
            for alpha in [1.0, 2.0] {
                let prm = params(alpha, &w);
                let (cbc, _) = cbc_construct(n, s, &prm).unwrap();
                for rule in [cbc, random_lattice(&mut rng, n, s)] {
                    let closed = p_merit_closed(&rule, &prm).unwrap().p_value;
                    let series = p_merit_series(&rule, &prm, 4 * n).unwrap();
                    let bound = series.truncation_bound.unwrap();
                    let gap = (closed - series.p_value).abs();
                    tally.record(gap <= bound + SLACK, || {
                        format!(
                            "N={n} z={:?} alpha={alpha}: gap {gap:.3e} > {bound:.3e}",
                            rule.z()
                        )
                    });
                }
            }
        }
    }
    let lattice = tally.checked;
    for m in 2..=5usize {
        let p = smallest_irreducible(2, m).unwrap();
        for s in 1..=2 {
            let w = product(-2.0, s);
            for alpha in [1.0, 1.5, 2.0] {
                let prm = params(alpha, &w);
                let cbc = cbc_construct_poly(&p, s, &prm).unwrap().rule;
                for rule in [cbc, random_poly(&mut rng, &p, s)] {
                    let closed = p_merit_wal_closed(&rule, &prm).unwrap().p_value;
                    let series = p_merit_wal_series(&rule, &prm, m as u32 + 4).unwrap();
                    let bound = series.truncation_bound.unwrap();
                    let gap = (closed - series.p_value).abs();
                    tally.record(gap <= bound + SLACK, || {
                        format!("m={m} alpha={alpha}: gap {gap:.3e} > {bound:.3e}")
                    });
                }
            }
        }
    }
    let poly = tally.checked - lattice;
    tally.finish(&format!(
        "configurations ({lattice} lattice, {poly} polynomial)"
    ))
}

fn criterion_3() -> Outcome {
    let one = WeightSet::uniform_product(1.0, 1).unwrap();
    let rule = LatticeRule::new(5, vec![1]).unwrap();
    let p = p_merit_closed(&rule, &params(1.0, &one)).unwrap().p_value;
    let target = PI * PI / 75.0;
    let rel_lattice = (p - target).abs() / target;

    let poly = PolyLatticeRule::new(
        GfPoly::new(2, vec![1, 1, 0, 1]).unwrap(),
        vec![GfPoly::one(2)],
    )
    .unwrap();
    let pw = p_merit_wal_closed(&poly, &params(1.0, &one))
        .unwrap()
        .p_value;
    let target_w = 3.0 / 512.0;
    let rel_walsh = (pw - target_w).abs() / target_w;
    let detail = format!(
        "lattice P = {p:.15} vs pi^2/75 (rel {rel_lattice:.1e}); polynomial P = {pw} = {}/512 vs 3/512 (rel {rel_walsh:.2e})",
        pw * 512.0
    );
    if rel_lattice <= 1e-10 && rel_walsh <= 1e-10 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_4() -> Outcome {
    let mut tally = Tally::new();
    for &n in &LATTICE_GRID_N {
        for s in 1..=3 {
            let w = product(-2.0, s);
            for alpha in [1.0, 2.0] {
                let (rule, _) = cbc_construct(n, s, &params(alpha, &w)).unwrap();
                for lambda in [1.0, 0.75] {
                    if 2.0 * alpha * lambda > 1.0 {
                        tally.certificate(prop1_certificate(&rule, alpha, &w, lambda), || {
                            format!("lattice N={n} s={s} alpha={alpha} lambda={lambda}")
                        });
                    }
                }
            }
        }
    }
    for m in 2..=5usize {
        let p = smallest_irreducible(2, m).unwrap();
        for s in 1..=2 {
            let w = product(-2.0, s);
            for alpha in [1.0, 1.5, 2.0] {
                let rule = cbc_construct_poly(&p, s, &params(alpha, &w)).unwrap().rule;
                for lambda in [1.0, 0.75] {
                    if 2.0 * alpha * lambda > 1.0 {
                        tally.certificate(prop2_certificate(&rule, alpha, &w, lambda), || {
                            format!("polynomial m={m} s={s} alpha={alpha} lambda={lambda}")
                        });
                    }
                }
            }
        }
    }
    tally.finish("CBC error bounds")
}

const ALPHAS: [f64; 3] = [1.0, 1.5, 2.0];
const RANDOM_RULES: usize = 20;

/// CBC rule per construction smoothness plus the shared random rules.
fn lattice_family(
    n: u64,
    s: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<(String, LatticeRule, Option<f64>)> {
    let w = product(-2.0, s);
    let mut rules: Vec<_> = ALPHAS
        .iter()
        .map(|&a| {
            (
                "cbc".to_string(),
                cbc_construct(n, s, &params(a, &w)).unwrap().0,
                Some(a),
            )
        })
        .collect();
    rules.extend(
        (0..RANDOM_RULES).map(|i| (format!("random#{i}"), random_lattice(rng, n, s), None)),
    );
    rules
}

fn poly_family(
    p: &GfPoly,
    s: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<(String, PolyLatticeRule, Option<f64>)> {
    let w = product(-2.0, s);
    let mut rules: Vec<_> = ALPHAS
        .iter()
        .map(|&a| {
            (
                "cbc".to_string(),
                cbc_construct_poly(p, s, &params(a, &w)).unwrap().rule,
                Some(a),
            )
        })
        .collect();
    rules.extend((0..RANDOM_RULES).map(|i| (format!("random#{i}"), random_poly(rng, p, s), None)));
    rules
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 5);
    let mut tally = Tally::new();
    let targets = [-2.0, -4.0];
    for n in [8u64, 16, 32, 64] {
        for s in 1..=3 {
            let w = product(-2.0, s);
            for (name, rule, built_for) in lattice_family(n, s, &mut rng) {
                for alpha in ALPHAS {
                    // A CBC rule is certified under the smoothness it was built for.
                    if built_for.is_some_and(|a| a != alpha) {
                        continue;
                    }
                    for ap in ALPHAS {
                        for e in targets {
                            let wp = product(e, s);
                            tally.certificate(theorem1_bound(&rule, alpha, &w, ap, &wp), || {
                                format!("lattice {name} N={n} z={:?} alpha={alpha} alpha'={ap} gamma'=j^{e}", rule.z())
                            });
                        }
                    }
                }
            }
        }
    }
    let lattice = tally.checked;
    for m in 3..=6usize {
        let p = smallest_irreducible(2, m).unwrap();
        for s in 1..=3 {
            let w = product(-2.0, s);
            for (name, rule, built_for) in poly_family(&p, s, &mut rng) {
                for alpha in ALPHAS {
                    if built_for.is_some_and(|a| a != alpha) {
                        continue;
                    }
                    for ap in ALPHAS {
                        for e in targets {
                            let wp = product(e, s);
                            tally.certificate(theorem2_bound_poly(&rule, alpha, &w, ap, &wp), || {
                                format!("polynomial {name} m={m} alpha={alpha} alpha'={ap} gamma'=j^{e}")
                            });
                        }
                    }
                }
            }
        }
    }
    let poly = tally.checked - lattice;
    tally.finish(&format!(
        "stability certificates ({lattice} lattice, {poly} polynomial)"
    ))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 6);
    let mut tally = Tally::new();
    for n in [8u64, 16, 32, 64] {
        for s in 1..=3 {
            let w = product(-2.0, s);
            for (name, rule, _) in lattice_family(n, s, &mut rng) {
                for alpha in ALPHAS {
                    for delta in [0.5, 0.8] {
                        tally.certificate(jensen_certificate(&rule, alpha, &w, delta), || {
                            format!("lattice {name} N={n} alpha={alpha} delta={delta}")
                        });
                    }
                }
            }
        }
    }
    for m in 3..=6usize {
        let p = smallest_irreducible(2, m).unwrap();
        for s in 1..=3 {
            let w = product(-2.0, s);
            for (name, rule, _) in poly_family(&p, s, &mut rng) {
                for alpha in ALPHAS {
                    for delta in [0.5, 0.8] {
                        tally.certificate(jensen_certificate_poly(&rule, alpha, &w, delta), || {
                            format!("polynomial {name} m={m} alpha={alpha} delta={delta}")
                        });
                    }
                }
            }
        }
    }
    tally.finish("Jensen certificates")
}

fn criterion_7() -> Outcome {
    let mut tally = Tally::new();
    let weight_sets = [
        product(-2.0, 8),
        WeightSet::product((1..=8).map(|j| 0.7f64.powi(j)).collect()).unwrap(),
    ];
    for n in [13u64, 31, 127, 251] {
        for w in &weight_sets {
            for alpha in [1.0, 2.0] {
                let prm = params(alpha, w);
                let (naive, naive_trace) = cbc_construct(n, 8, &prm).unwrap();
                let (fast, fast_trace) = cbc_construct_fast(n, 8, &prm).unwrap();
                let merits_agree = naive_trace
                    .steps
                    .iter()
                    .zip(&fast_trace.steps)
                    .all(|(a, b)| (a.merit - b.merit).abs() <= 1e-9 * a.merit.abs());
                tally.record(naive.z() == fast.z() && merits_agree, || {
                    format!(
                        "N={n} alpha={alpha}: naive {:?} vs fast {:?}",
                        naive.z(),
                        fast.z()
                    )
                });
            }
        }
    }
    tally.finish("fast/naive constructions")
}

fn criterion_8() -> Outcome {
    let w = product(-2.0, 2);
    let prm = params(1.0, &w);
    let mut pts = Vec::new();
    for n in [17u64, 31, 61, 127, 251] {
        let (rule, _) = cbc_construct(n, 2, &prm).unwrap();
        let p = p_merit_closed(&rule, &prm).unwrap().p_value;
        pts.push(((n as f64).ln(), p.sqrt().ln()));
    }
    let k = pts.len() as f64;
    let (mx, my) = (
        pts.iter().map(|p| p.0).sum::<f64>() / k,
        pts.iter().map(|p| p.1).sum::<f64>() / k,
    );
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let detail = format!("fitted log-log slope of sqrt(P) = {slope:.4}");
    if slope <= -0.85 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_9() -> Outcome {
    let mut tally = Tally::new();
    let alpha = 1.0;
    for n in 2..=32u64 {
        for s in 1..=2 {
            let w = product(-2.0, s);
            for z in all_vectors(n, s) {
                let rule = LatticeRule::new(n, z).unwrap();
                let exact = weighted_exact_star_discrepancy(&lattice_points(&rule), &w).unwrap();
                let joe = star_disc_bound_lattice(&rule, &w)
                    .unwrap()
                    .bound_joe
                    .unwrap();
                let rho = star_disc_bound_rho_lattice(&rule, alpha, &w, &w)
                    .unwrap()
                    .bound_rho
                    .unwrap();
                tally.record(
                    exact <= joe * (1.0 + SLACK) && exact <= rho * (1.0 + SLACK),
                    || {
                        format!(
                            "lattice N={n} z={:?}: D* {exact:.6} vs bounds {joe:.6}, {rho:.6}",
                            rule.z()
                        )
                    },
                );
                for entry in zaremba_rho(&rule, &params(alpha, &w)).unwrap().per_subset {
                    if entry.u.len() >= 2 {
                        let phi0 = entry.phi0.unwrap();
                        tally.record(2 * phi0 <= n, || {
                            format!("lattice N={n} z={:?}: phi_u0 = {phi0} > N/2", rule.z())
                        });
                    }
                }
            }
        }
    }
    for m in 1..=5usize {
        for p in irreducibles(2, m) {
            for s in 1..=2 {
                let w = product(-2.0, s);
                for q in all_vectors(1 << m, s) {
                    let rule = PolyLatticeRule::from_encodings(p.clone(), &q).unwrap();
                    let exact =
                        weighted_exact_star_discrepancy(&poly_lattice_points(&rule), &w).unwrap();
                    let bound = star_disc_bound_poly(&rule, &w).unwrap().bound_joe.unwrap();
                    let rho = star_disc_bound_rho_poly(&rule, alpha, &w, &w)
                        .unwrap()
                        .bound_rho
                        .unwrap();
                    tally.record(exact <= bound * (1.0 + SLACK) && exact <= rho * (1.0 + SLACK), || {
                        format!("polynomial p={p} q={q:?}: D* {exact:.6} vs bounds {bound:.6}, {rho:.6}")
                    });
                    for (u, phi, _) in walsh_phi(&rule).unwrap() {
                        let size = u.len() as u32;
                        tally.record(size <= phi && phi <= m as u32 + size, || {
                            format!(
                                "polynomial p={p} q={q:?}: phi_u = {phi} outside [{size}, {}]",
                                m as u32 + size
                            )
                        });
                    }
                }
            }
        }
    }
    tally.finish("discrepancy and phi assertions")
}

fn criterion_10() -> Outcome {
    let mut tally = Tally::new();
    for n in 3..=10_000u64 {
        let (lhs, rhs) = totient_bound(n).unwrap();
        tally.record(lhs <= rhs, || {
            format!("N={n}: 1/phi(N) = {lhs:.6e} > {rhs:.6e}")
        });
    }
    tally.finish("moduli")
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("character-sum identities", criterion_1),
        ("closed form vs series", criterion_2),
        ("analytic spot values", criterion_3),
        ("CBC error bounds", criterion_4),
        ("stability certificates", criterion_5),
        ("Jensen stability", criterion_6),
        ("fast CBC equivalence", criterion_7),
        ("convergence-rate probe", criterion_8),
        ("discrepancy soundness", criterion_9),
        ("totient inequality", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".to_string()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
