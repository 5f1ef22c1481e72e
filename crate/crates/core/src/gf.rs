//! Polynomials over the prime field `ℤ_b` and the digit map `ν_m`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, resource, usage, Error, Result};
use crate::special::is_prime;

/// Largest supported base.
pub const MAX_BASE: u32 = 7;

/// Cap on the number of trial divisors in [`GfPoly::is_irreducible`].
pub const IRREDUCIBILITY_TRIALS_MAX: u64 = 1 << 22;

/// A polynomial over `ℤ_b`, coefficients lowest degree first with no
/// trailing zeros. The zero polynomial has no coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawPoly")]
pub struct GfPoly {
    b: u32,
    coeffs: Vec<u32>,
}

#[derive(Deserialize)]
struct RawPoly {
    b: u32,
    coeffs: Vec<u32>,
}

impl TryFrom<RawPoly> for GfPoly {
    type Error = Error;
    fn try_from(raw: RawPoly) -> Result<Self> {
        GfPoly::new(raw.b, raw.coeffs)
    }
}

pub fn check_base(b: u32) -> Result<()> {
    if b > MAX_BASE || !is_prime(b as u64) {
        return Err(usage(format!("base b = {b} must be a prime <= {MAX_BASE}")));
    }
    Ok(())
}

impl GfPoly {
    /// Reduces every coefficient mod `b`.
    pub fn new(b: u32, coeffs: Vec<u32>) -> Result<Self> {
        check_base(b)?;
        Ok(Self::from_reduced(
            b,
            coeffs.into_iter().map(|c| c % b).collect(),
        ))
    }

    fn from_reduced(b: u32, mut coeffs: Vec<u32>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        GfPoly { b, coeffs }
    }

    pub fn zero(b: u32) -> Self {
        GfPoly {
            b,
            coeffs: Vec::new(),
        }
    }

    pub fn one(b: u32) -> Self {
        GfPoly { b, coeffs: vec![1] }
    }

    /// `x^d`.
    pub fn monomial(b: u32, d: usize) -> Self {
        let mut coeffs = vec![0; d + 1];
        coeffs[d] = 1;
        GfPoly { b, coeffs }
    }

    pub fn base(&self) -> u32 {
        self.b
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    /// Coefficient of `x^i` (zero above the degree).
    pub fn coeff(&self, i: usize) -> u32 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last() == Some(&1)
    }

    /// `Σ c_i b^i`; orders polynomials for tie-breaking.
    pub fn encode(&self) -> u64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0u64, |acc, &c| acc * self.b as u64 + c as u64)
    }

    /// Inverse of [`GfPoly::encode`].
    pub fn from_encoding(b: u32, mut k: u64) -> Self {
        let mut coeffs = Vec::new();
        while k > 0 {
            coeffs.push((k % b as u64) as u32);
            k /= b as u64;
        }
        GfPoly { b, coeffs }
    }

    fn same_base(&self, other: &GfPoly) -> Result<()> {
        if self.b != other.b {
            return Err(Error::BaseMismatch(self.b, other.b));
        }
        Ok(())
    }

    pub fn add(&self, other: &GfPoly) -> Result<GfPoly> {
        self.same_base(other)?;
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len)
            .map(|i| (self.coeff(i) + other.coeff(i)) % self.b)
            .collect();
        Ok(Self::from_reduced(self.b, coeffs))
    }

    pub fn neg(&self) -> GfPoly {
        let coeffs = self.coeffs.iter().map(|&c| (self.b - c) % self.b).collect();
        Self::from_reduced(self.b, coeffs)
    }

    pub fn sub(&self, other: &GfPoly) -> Result<GfPoly> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &GfPoly) -> Result<GfPoly> {
        self.same_base(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(GfPoly::zero(self.b));
        }
        let mut out = vec![0u32; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &c) in other.coeffs.iter().enumerate() {
                out[i + j] = (out[i + j] + a * c) % self.b;
            }
        }
        Ok(Self::from_reduced(self.b, out))
    }

    pub fn scale(&self, c: u32) -> GfPoly {
        Self::from_reduced(
            self.b,
            self.coeffs
                .iter()
                .map(|&x| x * (c % self.b) % self.b)
                .collect(),
        )
    }

    /// Quotient and remainder of division by a nonzero `divisor`.
    pub fn div_rem(&self, divisor: &GfPoly) -> Result<(GfPoly, GfPoly)> {
        self.same_base(divisor)?;
        let dd = divisor
            .degree()
            .ok_or_else(|| domain("division by the zero polynomial"))?;
        let b = self.b;
        let lead_inv = inverse_mod(divisor.coeffs[dd], b);
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((GfPoly::zero(b), self.clone()));
        }
        let mut quot = vec![0u32; rem.len() - dd];
        for shift in (0..quot.len()).rev() {
            let c = rem[shift + dd] * lead_inv % b;
            if c == 0 {
                continue;
            }
            quot[shift] = c;
            for (i, &d) in divisor.coeffs.iter().enumerate() {
                rem[shift + i] = (rem[shift + i] + b * b - c * d % b) % b;
            }
        }
        rem.truncate(dd);
        Ok((Self::from_reduced(b, quot), Self::from_reduced(b, rem)))
    }

    pub fn rem(&self, divisor: &GfPoly) -> Result<GfPoly> {
        Ok(self.div_rem(divisor)?.1)
    }

    /// `(self · other) mod p`.
    pub fn mulmod(&self, other: &GfPoly, p: &GfPoly) -> Result<GfPoly> {
        self.same_base(p)?;
        self.mul(other)?.rem(p)
    }

    /// Irreducibility by trial division over every monic polynomial of degree
    /// `1 ..= deg/2`.
    pub fn is_irreducible(&self) -> Result<bool> {
        let d = self
            .degree()
            .filter(|&d| d >= 1)
            .ok_or_else(|| usage("irreducibility needs degree >= 1"))?;
        let b = self.b as u64;
        let trials: u64 = (1..=d / 2)
            .map(|k| b.saturating_pow(k as u32))
            .fold(0, u64::saturating_add);
        if trials > IRREDUCIBILITY_TRIALS_MAX {
            return Err(resource(format!(
                "irreducibility test needs {trials} trial divisions"
            )));
        }
        for k in 1..=d / 2 {
            let monic = b.pow(k as u32);
            for low in 0..monic {
                let cand = GfPoly::from_encoding(self.b, monic + low);
                if cand.degree() == Some(k) && self.rem(&cand)?.is_zero() {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

impl fmt::Display for GfPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match (i, c) {
                (0, _) => write!(f, "{c}")?,
                (1, 1) => write!(f, "x")?,
                (1, _) => write!(f, "{c}x")?,
                (_, 1) => write!(f, "x^{i}")?,
                _ => write!(f, "{c}x^{i}")?,
            }
        }
        Ok(())
    }
}

/// Multiplicative inverse of a nonzero residue mod the prime `b`.
pub(crate) fn inverse_mod(a: u32, b: u32) -> u32 {
    (1..b)
        .find(|&x| a * x % b == 1)
        .expect("nonzero residue mod a prime")
}

/// The monic irreducible polynomial of degree `m` with the smallest encoding.
pub fn smallest_irreducible(b: u32, m: usize) -> Result<GfPoly> {
    check_base(b)?;
    if m == 0 {
        return Err(usage("degree m must be at least 1"));
    }
    let monic = (b as u64)
        .checked_pow(m as u32)
        .ok_or_else(|| resource(format!("b^m overflows for b = {b}, m = {m}")))?;
    for low in 0..monic {
        let p = GfPoly::from_encoding(b, monic + low);
        if p.is_irreducible()? {
            return Ok(p);
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

/// `tr_m(k)`: the polynomial whose `x^i` coefficient is the `i`-th base-`b`
/// digit of `k`, for `i < m`.
pub fn tr_m(k: u64, m: usize, b: u32) -> GfPoly {
    let modulus = (b as u64).saturating_pow(m as u32);
    GfPoly::from_encoding(b, if modulus == u64::MAX { k } else { k % modulus })
}

/// Digits `t_1 … t_m` of a truncated Laurent expansion and the value `Σ t_i b^{-i}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigitExpansion {
    pub b: u32,
    pub digits: Vec<u32>,
}

impl DigitExpansion {
    /// `Σ t_i b^{m-i}`, the value times `b^m`.
    pub fn numerator(&self) -> u64 {
        self.digits
            .iter()
            .fold(0u64, |acc, &t| acc * self.b as u64 + t as u64)
    }

    pub fn denominator(&self) -> u64 {
        (self.b as u64).pow(self.digits.len() as u32)
    }

    pub fn value(&self) -> f64 {
        self.numerator() as f64 / self.denominator() as f64
    }
}

/// `ν_m(numer / p)` by the synthetic-division recurrence
/// `p_m t_k = a_{m−k} − Σ_{i<k} p_{m−k+i} t_i`, with `a` the coefficients of
/// `numer mod p`.
pub fn nu_m(numer: &GfPoly, p: &GfPoly, m: usize) -> Result<DigitExpansion> {
    numer.same_base(p)?;
    if p.degree() != Some(m) {
        return Err(usage(format!(
            "nu_m needs deg p = m = {m}, got {:?}",
            p.degree()
        )));
    }
    let b = p.b;
    let a = numer.rem(p)?;
    let lead_inv = inverse_mod(p.coeffs[m], b);
    let mut t = vec![0u32; m + 1];
    for k in 1..=m {
        let mut acc = a.coeff(m - k) as u64;
        for i in 1..k {
            acc += (b as u64 - 1) * (p.coeffs[m - k + i] as u64 * t[i] as u64 % b as u64);
        }
        t[k] = (acc % b as u64) as u32 * lead_inv % b;
    }
    Ok(DigitExpansion {
        b,
        digits: t[1..].to_vec(),
    })
}
