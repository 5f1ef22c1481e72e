//! Riemann and Hurwitz zeta functions, Euler's totient and a fixed-order summation.

use crate::error::{domain, Result};

/// Bernoulli numbers `B_2, B_4, …, B_16`.
const BERNOULLI_EVEN: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

const DIRECT_TERMS: usize = 12;

/// Hurwitz zeta `ζ(x, a) = Σ_{k≥0} (k + a)^{-x}` for `x > 1`, `a > 0`.
///
/// Direct summation of the first terms followed by an Euler–Maclaurin tail.
pub fn hurwitz_zeta(x: f64, a: f64) -> Result<f64> {
    if !(x > 1.0) {
        return Err(domain(format!(
            "zeta({x}) diverges: argument must exceed 1"
        )));
    }
    if !(a > 0.0) {
        return Err(domain(format!(
            "Hurwitz zeta needs a positive shift, got {a}"
        )));
    }
    let mut head = 0.0;
    for k in 0..DIRECT_TERMS {
        head += (k as f64 + a).powf(-x);
    }
    let n = DIRECT_TERMS as f64 + a;
    let mut tail = n.powf(1.0 - x) / (x - 1.0) + 0.5 * n.powf(-x);
    // (x)_{2j-1} n^{-x-2j+1} / (2j)!, built up incrementally.
    let mut rising = x;
    let mut factorial = 2.0;
    let mut power = n.powf(-x - 1.0);
    for (j, b2j) in BERNOULLI_EVEN.iter().enumerate() {
        tail += b2j / factorial * rising * power;
        let two_j = 2.0 * (j as f64 + 1.0);
        rising *= (x + two_j - 1.0) * (x + two_j);
        factorial *= (two_j + 1.0) * (two_j + 2.0);
        power /= n * n;
    }
    Ok(head + tail)
}

/// Riemann zeta `ζ(x)` for `x > 1`.
pub fn zeta(x: f64) -> Result<f64> {
    hurwitz_zeta(x, 1.0)
}

/// Euler's totient by trial-division factorization.
pub fn euler_totient(n: u64) -> u64 {
    assert!(n >= 1, "totient is defined for n >= 1");
    let mut rest = n;
    let mut phi = n;
    let mut p = 2u64;
    while p * p <= rest {
        if rest.is_multiple_of(p) {
            while rest.is_multiple_of(p) {
                rest /= p;
            }
            phi -= phi / p;
        }
        p += 1;
    }
    if rest > 1 {
        phi -= phi / rest;
    }
    phi
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime factors in increasing order.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Pairwise (cascade) summation. The reduction tree depends only on the
/// slice length, so results are bitwise reproducible.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 16;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zeta_known_values() {
        assert!((zeta(2.0).unwrap() - PI * PI / 6.0).abs() < 1e-14);
        assert!((zeta(4.0).unwrap() - PI.powi(4) / 90.0).abs() < 1e-14);
        assert!((zeta(6.0).unwrap() - PI.powi(6) / 945.0).abs() < 1e-14);
        // Apéry's constant.
        assert!((zeta(3.0).unwrap() - 1.202_056_903_159_594_3).abs() < 1e-14);
    }

    #[test]
    fn zeta_near_pole_matches_laurent_expansion() {
        // ζ(1 + ε) = 1/ε + γ − γ₁ ε + O(ε²)
        let eps = 1e-3;
        let euler_gamma = 0.577_215_664_901_532_9;
        let stieltjes1 = -0.072_815_845_483_676_7;
        let approx = 1.0 / eps + euler_gamma - stieltjes1 * eps;
        assert!((zeta(1.0 + eps).unwrap() - approx).abs() < 1e-6);
    }

    #[test]
    fn zeta_rejects_divergent_arguments() {
        assert!(matches!(zeta(1.0), Err(crate::Error::Domain(_))));
        assert!(zeta(0.5).is_err());
        assert!(hurwitz_zeta(2.0, 0.0).is_err());
    }

    #[test]
    fn hurwitz_half_shift() {
        // ζ(x, 1/2) = (2^x − 1) ζ(x)
        for &x in &[1.5, 2.0, 3.0, 4.5] {
            let lhs = hurwitz_zeta(x, 0.5).unwrap();
            let rhs = (2f64.powf(x) - 1.0) * zeta(x).unwrap();
            assert!((lhs - rhs).abs() < 1e-13 * rhs, "x = {x}");
        }
    }

    #[test]
    fn totient_examples() {
        assert_eq!(euler_totient(1), 1);
        assert_eq!(euler_totient(12), 4);
        assert_eq!(euler_totient(13), 12);
        for n in 1..200u64 {
            let brute = (1..=n).filter(|&k| gcd(k, n) == 1).count() as u64;
            assert_eq!(euler_totient(n), brute, "n = {n}");
        }
    }

    #[test]
    fn pairwise_sum_matches_naive_on_integers() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 499_500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }
}
