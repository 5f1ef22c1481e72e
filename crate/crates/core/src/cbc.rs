//! Component-by-component construction of lattice generating vectors.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{precondition, usage, Result};
use crate::korobov::{kernel_table, LatticeRule};
use crate::report::weighted_rows_mean;
use crate::special::{is_prime, pairwise_sum, prime_factors};
use crate::weights::{SpaceParams, WeightSet};

/// A candidate replaces the running minimum only when it is lower by more
/// than this relative amount, so near-ties go to the smallest candidate.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Relative band above the FFT minimum inside which fast CBC rescores
/// candidates exactly.
pub const REFINE_BAND: f64 = 1e-8;

/// Chosen component and the merit of the rule after choosing it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CbcStep {
    /// `z_ℓ` for lattices; the integer encoding of `q_ℓ` for polynomial lattices.
    pub component: u64,
    pub merit: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CbcTrace {
    pub steps: Vec<CbcStep>,
    /// Number of candidate merits computed.
    pub evaluations: u64,
}

/// Index of the first minimum of `values` under [`TIE_TOLERANCE`].
pub fn argmin_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] - TIE_TOLERANCE * values[best].abs() {
            best = i;
        }
    }
    best
}

/// Algorithm with the full merit recomputed for every candidate `z ∈ {1, …, N-1}`.
///
/// Works for every weight kind. Candidate merits are evaluated in parallel
/// and reduced in a fixed order, so the chosen vector does not depend on the
/// thread count, and a later evaluation of the returned rule reproduces the
/// final trace value bit for bit.
pub fn cbc_construct(n: u64, s: usize, params: &SpaceParams) -> Result<(LatticeRule, CbcTrace)> {
    if n < 2 {
        return Err(usage(format!("lattice modulus N = {n} must be at least 2")));
    }
    params.weights.ensure_dimension(s)?;
    let (table, _) = kernel_table(params.alpha, n)?;
    let merit_of = |z: &[u64]| rule_merit(n, &table, &params.weights, z);

    let mut z = vec![1u64];
    let mut trace = CbcTrace {
        steps: vec![CbcStep {
            component: 1,
            merit: merit_of(&z),
        }],
        evaluations: 1,
    };
    for _ in 1..s {
        let values: Vec<f64> = (1..n)
            .into_par_iter()
            .map(|cand| {
                let mut zc = z.clone();
                zc.push(cand);
                merit_of(&zc)
            })
            .collect();
        let best = argmin_first(&values);
        z.push(best as u64 + 1);
        trace.steps.push(CbcStep {
            component: best as u64 + 1,
            merit: values[best],
        });
        trace.evaluations += values.len() as u64;
    }
    Ok((LatticeRule::new(n, z)?, trace))
}

fn rule_merit(n: u64, table: &[f64], w: &WeightSet, z: &[u64]) -> f64 {
    weighted_rows_mean(n as usize, z.len(), w, |i, buf| {
        for (b, &zj) in buf.iter_mut().zip(z) {
            *b = table[(i as u64 * zj % n) as usize];
        }
    })
}

fn pow_mod(mut base: u64, mut exp: u64, n: u64) -> u64 {
    let mut acc = 1 % n;
    base %= n;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % n;
        }
        base = base * base % n;
        exp >>= 1;
    }
    acc
}

/// Smallest generator of the multiplicative group mod a prime `n`.
pub fn primitive_root(n: u64) -> Result<u64> {
    if !is_prime(n) {
        return Err(precondition(format!("N = {n} is not prime")));
    }
    if n == 2 {
        return Ok(1);
    }
    let factors = prime_factors(n - 1);
    Ok((2..n)
        .find(|&g| factors.iter().all(|&q| pow_mod(g, (n - 1) / q, n) != 1))
        .expect("a prime modulus has a primitive root"))
}

/// Product-weight CBC for prime `N` in `O(sN log N)`.
///
/// With `prod(i) = ∏_{j≤ℓ} (1 + γ_j ω(i z_j / N))`, the candidate merits are
/// `(1/N)[prod(0)(1 + γ_{ℓ+1} ω(0)) + Σ_{i≠0} prod(i) + γ_{ℓ+1} c(z)] − 1`
/// where `c(g^t) = Σ_k prod(g^k) ω(g^{k+t}/N)` is a circular correlation over
/// the exponents of a generator `g`, evaluated by FFT.
pub fn cbc_construct_fast(
    n: u64,
    s: usize,
    params: &SpaceParams,
) -> Result<(LatticeRule, CbcTrace)> {
    params.weights.ensure_dimension(s)?;
    let gamma = params
        .weights
        .product_gammas()
        .ok_or_else(|| precondition("fast CBC needs product weights"))?
        .to_vec();
    let g = primitive_root(n)?;
    let (table, _) = kernel_table(params.alpha, n)?;
    let len = (n - 1) as usize;
    let mut powers = Vec::with_capacity(len);
    let mut cur = 1u64;
    for _ in 0..len {
        powers.push(cur);
        cur = cur * g % n;
    }
    let omega_perm: Vec<Complex64> = powers
        .iter()
        .map(|&p| Complex64::new(table[p as usize], 0.0))
        .collect();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(len);
    let ifft = planner.plan_fft_inverse(len);
    let mut omega_hat = omega_perm.clone();
    fft.process(&mut omega_hat);

    let mut prod: Vec<f64> = (0..n).map(|i| 1.0 + gamma[0] * table[i as usize]).collect();
    let mut z = vec![1u64];
    let first = rule_merit(n, &table, &params.weights, &z);
    let mut trace = CbcTrace {
        steps: vec![CbcStep {
            component: 1,
            merit: first,
        }],
        evaluations: 1,
    };

    for l in 1..s {
        let gl = gamma[l];
        let mut a: Vec<Complex64> = powers
            .iter()
            .map(|&p| Complex64::new(prod[p as usize], 0.0))
            .collect();
        fft.process(&mut a);
        for (ai, bi) in a.iter_mut().zip(&omega_hat) {
            *ai = ai.conj() * bi;
        }
        ifft.process(&mut a);
        let base = prod[0] * (1.0 + gl * table[0]) + pairwise_sum(&prod[1..]);
        let mut values = vec![0.0; len];
        for (t, &p) in powers.iter().enumerate() {
            let corr = a[t].re / len as f64;
            values[(p - 1) as usize] = (base + gl * corr) / n as f64 - 1.0;
        }
        // FFT values carry rounding far above the tie tolerance, so the
        // near-minimal candidates are rescored exactly and the tie rule runs
        // on the rescored values in candidate order.
        let floor = values.iter().copied().fold(f64::INFINITY, f64::min);
        let band = floor + REFINE_BAND * floor.abs().max(f64::MIN_POSITIVE);
        let mut zc = z.clone();
        zc.push(0);
        let (cands, exact): (Vec<u64>, Vec<f64>) = (1..n)
            .filter(|&c| values[(c - 1) as usize] <= band)
            .map(|c| {
                *zc.last_mut().expect("nonempty") = c;
                (c, rule_merit(n, &table, &params.weights, &zc))
            })
            .unzip();
        let pick = argmin_first(&exact);
        let best = cands[pick];
        for (i, pi) in prod.iter_mut().enumerate() {
            *pi *= 1.0 + gl * table[(i as u64 * best % n) as usize];
        }
        z.push(best);
        trace.steps.push(CbcStep {
            component: best,
            merit: exact[pick],
        });
        trace.evaluations += len as u64;
    }
    Ok((LatticeRule::new(n, z)?, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::korobov::p_merit;
    use crate::special::euler_totient;
    use crate::weights::WeightSet;
    use approx::assert_relative_eq;

    fn inverse_square(s: usize) -> WeightSet {
        WeightSet::product((1..=s).map(|j| (j as f64).powi(-2)).collect()).unwrap()
    }

    #[test]
    fn first_component_is_one() {
        let p = SpaceParams::new(1.0, inverse_square(1)).unwrap();
        for n in [2u64, 7, 12] {
            assert_eq!(cbc_construct(n, 1, &p).unwrap().0.z(), &[1]);
        }
        assert_eq!(cbc_construct_fast(13, 1, &p).unwrap().0.z(), &[1]);
    }

    #[test]
    fn symmetric_tie_goes_to_smaller_candidate() {
        let p = SpaceParams::new(1.0, WeightSet::uniform_product(1.0, 2).unwrap()).unwrap();
        let (rule, trace) = cbc_construct(5, 2, &p).unwrap();
        assert_eq!(rule.z(), &[1, 2]);
        // Brute force over z2: P(1, z) = P(1, N - z).
        let vals: Vec<f64> = (1..5)
            .map(|z2| {
                p_merit(&LatticeRule::new(5, vec![1, z2]).unwrap(), &p)
                    .unwrap()
                    .p_value
            })
            .collect();
        assert_relative_eq!(vals[1], vals[2], max_relative = 1e-14);
        assert!(vals[1] < vals[0] && vals[1] < vals[3]);
        assert_eq!(trace.steps[1].merit, vals[1]);
    }

    #[test]
    fn argmin_prefers_first_near_tie() {
        assert_eq!(argmin_first(&[1.0, 1.0 - 1e-15, 2.0]), 0);
        assert_eq!(argmin_first(&[1.0, 0.9, 0.9]), 1);
    }

    #[test]
    fn primitive_roots() {
        assert_eq!(primitive_root(2).unwrap(), 1);
        assert_eq!(primitive_root(13).unwrap(), 2);
        assert_eq!(primitive_root(31).unwrap(), 3);
        assert!(primitive_root(12).is_err());
    }

    #[test]
    fn fast_matches_naive() {
        for (n, s) in [(13u64, 4usize), (31, 5), (2, 3), (3, 3)] {
            let p = SpaceParams::new(1.0, inverse_square(s)).unwrap();
            let (a, ta) = cbc_construct(n, s, &p).unwrap();
            let (b, tb) = cbc_construct_fast(n, s, &p).unwrap();
            assert_eq!(a.z(), b.z(), "N = {n}");
            for (x, y) in ta.steps.iter().zip(&tb.steps) {
                assert_relative_eq!(x.merit, y.merit, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn fast_rejects_composite_and_non_product() {
        let p = SpaceParams::new(1.0, inverse_square(2)).unwrap();
        assert!(cbc_construct_fast(12, 2, &p).is_err());
        let pod =
            SpaceParams::new(1.0, WeightSet::pod(vec![1.0, 0.5], vec![1.0, 1.0]).unwrap()).unwrap();
        assert!(cbc_construct_fast(13, 2, &pod).is_err());
    }

    #[test]
    fn trace_is_reproduced_by_evaluation() {
        let p = SpaceParams::new(2.0, "pod:Gamma=k!;gamma=j^-3@5".parse().unwrap()).unwrap();
        let (rule, trace) = cbc_construct(37, 5, &p).unwrap();
        for (l, step) in trace.steps.iter().enumerate() {
            let v = p_merit(&rule.prefix(l + 1), &p).unwrap().p_value;
            assert_eq!(v, step.merit);
        }
    }

    #[test]
    fn prefix_property() {
        let p = SpaceParams::new(1.0, inverse_square(6)).unwrap();
        let (full, _) = cbc_construct(29, 6, &p).unwrap();
        for l in 1..6 {
            let (part, _) = cbc_construct(29, l, &p).unwrap();
            assert_eq!(part.z(), &full.z()[..l]);
        }
    }

    #[test]
    fn proposition_bound_holds() {
        for n in [8u64, 13, 30, 64] {
            for (alpha, lambdas) in [(1.0, vec![1.0, 0.75]), (2.0, vec![1.0, 0.5])] {
                let w = inverse_square(3);
                let p = SpaceParams::new(alpha, w.clone()).unwrap();
                let (rule, _) = cbc_construct(n, 3, &p).unwrap();
                let value = p_merit(&rule, &p).unwrap().p_value;
                for lambda in lambdas {
                    let bound = (w.weighted_zeta_sum(3, lambda, alpha).unwrap()
                        / euler_totient(n) as f64)
                        .powf(1.0 / lambda);
                    assert!(
                        value <= bound * (1.0 + 1e-9),
                        "N {n} alpha {alpha} lambda {lambda}"
                    );
                }
            }
        }
    }

    #[test]
    fn fractional_alpha_uses_residue_kernel() {
        let p = SpaceParams::new(1.5, inverse_square(3)).unwrap();
        let (rule, trace) = cbc_construct(17, 3, &p).unwrap();
        assert_eq!(p_merit(&rule, &p).unwrap().p_value, trace.steps[2].merit);
        let (fast, _) = cbc_construct_fast(17, 3, &p).unwrap();
        assert_eq!(fast.z(), rule.z());
    }

    #[test]
    fn fast_matches_naive_on_high_smoothness_ties() {
        // At alpha = 2 the FFT rounding exceeds the tie tolerance.
        let p = SpaceParams::new(2.0, inverse_square(8)).unwrap();
        for n in [31u64, 127] {
            let (naive, naive_trace) = cbc_construct(n, 8, &p).unwrap();
            let (fast, fast_trace) = cbc_construct_fast(n, 8, &p).unwrap();
            assert_eq!(fast.z(), naive.z());
            assert_eq!(fast_trace.steps, naive_trace.steps);
        }
    }
}
