//! Coordinate weights `γ_u` and the function-space parameters built from them.
//!
//! Four families are supported:
//!
//! * **product** `γ_u = ∏_{j∈u} γ_j`,
//! * **POD** (product and order dependent) `γ_u = Γ_{|u|} ∏_{j∈u} γ_j`,
//! * **order dependent** `γ_u = Γ_{|u|}`,
//! * **explicit** maps from subsets to values, with unlisted subsets weighted 0.
//!
//! Sequences can be given as lists or as small formulas such as `j^-2`,
//! `0.5*j^-3` or `k!`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, usage, Error, Result};
use crate::special::zeta;
use crate::subset::{nonempty_subsets, Subset, MAX_COORDS};

/// Dimension assumed for formula-defined sequences when none is given.
pub const DEFAULT_S_MAX: usize = 64;

/// Explicit weight maps are enumerated over all `2^s` subsets, so they are capped.
pub const EXPLICIT_S_MAX: usize = 20;

/// Generic subset enumeration cap for sums that have no closed form.
pub const ENUMERATION_S_MAX: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub enum WeightKind {
    Product { gamma: Vec<f64> },
    Pod { order: Vec<f64>, gamma: Vec<f64> },
    OrderDependent { order: Vec<f64> },
    Explicit { values: BTreeMap<Subset, f64> },
}

/// A weight set `γ = (γ_u)` defined for all nonempty `u ⊆ {1, …, s_max}`.
///
/// Sequences are stored zero-based: `gamma[j - 1]` is `γ_j` and `order[k - 1]` is `Γ_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WeightSpec", into = "WeightSpec")]
pub struct WeightSet {
    kind: WeightKind,
    s_max: usize,
}

fn check_values(name: &str, values: &[f64]) -> Result<()> {
    for (i, &v) in values.iter().enumerate() {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(usage(format!(
                "{name}[{}] = {v} is not a finite nonnegative weight",
                i + 1
            )));
        }
    }
    Ok(())
}

impl WeightSet {
    pub fn product(gamma: Vec<f64>) -> Result<Self> {
        check_values("gamma", &gamma)?;
        if gamma.is_empty() || gamma.len() > MAX_COORDS {
            return Err(usage(format!(
                "product weights need 1..={MAX_COORDS} entries"
            )));
        }
        let s_max = gamma.len();
        Ok(WeightSet {
            kind: WeightKind::Product { gamma },
            s_max,
        })
    }

    pub fn pod(order: Vec<f64>, gamma: Vec<f64>) -> Result<Self> {
        check_values("Gamma", &order)?;
        check_values("gamma", &gamma)?;
        let s_max = order.len().min(gamma.len());
        if s_max == 0 || s_max > MAX_COORDS {
            return Err(usage(format!("POD weights need 1..={MAX_COORDS} entries")));
        }
        Ok(WeightSet {
            kind: WeightKind::Pod { order, gamma },
            s_max,
        })
    }

    pub fn order_dependent(order: Vec<f64>) -> Result<Self> {
        check_values("Gamma", &order)?;
        if order.is_empty() || order.len() > MAX_COORDS {
            return Err(usage(format!(
                "order-dependent weights need 1..={MAX_COORDS} entries"
            )));
        }
        let s_max = order.len();
        Ok(WeightSet {
            kind: WeightKind::OrderDependent { order },
            s_max,
        })
    }

    /// Explicit weights over `{1, …, s_max}`; subsets not in `values` get weight 0.
    pub fn explicit(values: BTreeMap<Subset, f64>, s_max: usize) -> Result<Self> {
        if s_max == 0 || s_max > EXPLICIT_S_MAX {
            return Err(usage(format!(
                "explicit weights support 1..={EXPLICIT_S_MAX} coordinates"
            )));
        }
        let full = Subset::full(s_max);
        for (u, &v) in &values {
            if u.is_empty() {
                return Err(usage("explicit weights cannot assign the empty subset"));
            }
            if !u.is_subset_of(full) {
                return Err(usage(format!("subset {u} exceeds s_max = {s_max}")));
            }
            if !(v >= 0.0) || !v.is_finite() {
                return Err(usage(format!(
                    "weight of {u} = {v} is not finite and nonnegative"
                )));
            }
        }
        Ok(WeightSet {
            kind: WeightKind::Explicit { values },
            s_max,
        })
    }

    /// Product weights with the same `γ_j = value` for `j = 1..=s`.
    pub fn uniform_product(value: f64, s: usize) -> Result<Self> {
        Self::product(vec![value; s])
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn s_max(&self) -> usize {
        self.s_max
    }

    /// `Some(γ_1, …)` for product weights.
    pub fn product_gammas(&self) -> Option<&[f64]> {
        match &self.kind {
            WeightKind::Product { gamma } => Some(gamma),
            _ => None,
        }
    }

    pub fn ensure_dimension(&self, s: usize) -> Result<()> {
        if s == 0 || s > self.s_max {
            return Err(usage(format!(
                "weights are defined for 1..={} coordinates, requested s = {s}",
                self.s_max
            )));
        }
        Ok(())
    }

    /// `γ_u` for a nonempty `u ⊆ {1, …, s_max}`.
    pub fn weight(&self, u: Subset) -> Result<f64> {
        if u.is_empty() {
            return Err(usage("weight of the empty subset is undefined"));
        }
        if u.max_coord() > self.s_max {
            return Err(usage(format!("subset {u} exceeds s_max = {}", self.s_max)));
        }
        Ok(self.weight_unchecked(u))
    }

    pub(crate) fn weight_unchecked(&self, u: Subset) -> f64 {
        match &self.kind {
            WeightKind::Product { gamma } => u.indices().map(|i| gamma[i]).product(),
            WeightKind::Pod { order, gamma } => {
                order[u.len() - 1] * u.indices().map(|i| gamma[i]).product::<f64>()
            }
            WeightKind::OrderDependent { order } => order[u.len() - 1],
            WeightKind::Explicit { values } => values.get(&u).copied().unwrap_or(0.0),
        }
    }

    /// The weight set `(γ_u^λ)`.
    pub fn powf(&self, lambda: f64) -> WeightSet {
        let pw = |v: &Vec<f64>| v.iter().map(|x| x.powf(lambda)).collect::<Vec<_>>();
        let kind = match &self.kind {
            WeightKind::Product { gamma } => WeightKind::Product { gamma: pw(gamma) },
            WeightKind::Pod { order, gamma } => WeightKind::Pod {
                order: pw(order),
                gamma: pw(gamma),
            },
            WeightKind::OrderDependent { order } => WeightKind::OrderDependent { order: pw(order) },
            WeightKind::Explicit { values } => WeightKind::Explicit {
                values: values.iter().map(|(u, v)| (*u, v.powf(lambda))).collect(),
            },
        };
        WeightSet {
            kind,
            s_max: self.s_max,
        }
    }

    /// The weight set `(c·γ_u)` for `c ≥ 0`.
    pub fn scaled(&self, c: f64) -> WeightSet {
        assert!(c >= 0.0, "weights must stay nonnegative");
        let kind = match &self.kind {
            WeightKind::Product { gamma } if !gamma.is_empty() => {
                // Scale only the order factor of an equivalent POD form so that
                // every γ_u is multiplied by exactly c.
                WeightKind::Pod {
                    order: vec![c; gamma.len()],
                    gamma: gamma.clone(),
                }
            }
            WeightKind::Product { gamma } => WeightKind::Product {
                gamma: gamma.clone(),
            },
            WeightKind::Pod { order, gamma } => WeightKind::Pod {
                order: order.iter().map(|x| c * x).collect(),
                gamma: gamma.clone(),
            },
            WeightKind::OrderDependent { order } => WeightKind::OrderDependent {
                order: order.iter().map(|x| c * x).collect(),
            },
            WeightKind::Explicit { values } => WeightKind::Explicit {
                values: values.iter().map(|(u, v)| (*u, c * v)).collect(),
            },
        };
        WeightSet {
            kind,
            s_max: self.s_max,
        }
    }

    /// True when every `γ_u` with `u ⊆ {1, …, s}` is zero.
    pub fn all_zero(&self, s: usize) -> bool {
        match &self.kind {
            WeightKind::Explicit { values } => {
                let full = Subset::full(s);
                values
                    .iter()
                    .all(|(u, &v)| v == 0.0 || !u.is_subset_of(full))
            }
            _ => self.subset_sum(s, &vec![1.0; s]) == 0.0,
        }
    }

    /// `Σ_{∅≠u⊆{1..s}} γ_u ∏_{j∈u} factors[j-1]` using the structure of the weights:
    /// a product collapse, an elementary-symmetric recursion for POD and
    /// order-dependent weights, or the listed entries of an explicit map.
    pub fn subset_sum(&self, s: usize, factors: &[f64]) -> f64 {
        debug_assert!(factors.len() >= s && s <= self.s_max);
        match &self.kind {
            WeightKind::Product { gamma } => {
                let mut prod = 1.0;
                for j in 0..s {
                    prod *= 1.0 + gamma[j] * factors[j];
                }
                prod - 1.0
            }
            WeightKind::Pod { order, gamma } => {
                let esp = elementary_symmetric(s, |j| gamma[j] * factors[j]);
                (1..=s).map(|l| order[l - 1] * esp[l]).sum()
            }
            WeightKind::OrderDependent { order } => {
                let esp = elementary_symmetric(s, |j| factors[j]);
                (1..=s).map(|l| order[l - 1] * esp[l]).sum()
            }
            WeightKind::Explicit { values } => {
                let full = Subset::full(s);
                values
                    .iter()
                    .filter(|(u, _)| u.is_subset_of(full))
                    .map(|(u, &g)| g * u.indices().map(|i| factors[i]).product::<f64>())
                    .sum()
            }
        }
    }

    /// Same quantity as [`WeightSet::subset_sum`] by enumerating all `2^s − 1` subsets.
    pub fn subset_sum_enumerated(&self, s: usize, factors: &[f64]) -> Result<f64> {
        if s > ENUMERATION_S_MAX {
            return Err(Error::Resource(format!(
                "2^{s} subset enumeration exceeds s = {ENUMERATION_S_MAX}"
            )));
        }
        self.ensure_dimension(s)?;
        Ok(nonempty_subsets(s)
            .map(|u| self.weight_unchecked(u) * u.indices().map(|i| factors[i]).product::<f64>())
            .sum())
    }

    /// `Σ_{∅≠u⊆{1..s}} γ_u^λ (2ζ(2αλ))^{|u|}`.
    pub fn weighted_zeta_sum(&self, s: usize, lambda: f64, alpha: f64) -> Result<f64> {
        self.ensure_dimension(s)?;
        let x = 2.0 * alpha * lambda;
        if !(x > 1.0) {
            return Err(domain(format!(
                "2·alpha·lambda = {x} must exceed 1 for zeta to converge"
            )));
        }
        let c = 2.0 * zeta(x)?;
        Ok(self.powf(lambda).subset_sum(s, &vec![c; s]))
    }

    /// Whether `γ_v ≥ γ_u` for all nonempty `v ⊂ u ⊆ {1, …, s}`.
    ///
    /// Structured kinds use closed conditions on their sequences; explicit maps
    /// scan every single-element removal, which implies the pairwise condition
    /// by transitivity.
    pub fn check_monotone(&self, s: usize) -> Result<bool> {
        self.ensure_dimension(s)?;
        Ok(match &self.kind {
            WeightKind::Product { gamma } => pod_monotone(s, |_| 1.0, |j| gamma[j]),
            WeightKind::Pod { order, gamma } => pod_monotone(s, |l| order[l - 1], |j| gamma[j]),
            WeightKind::OrderDependent { order } => (2..=s).all(|l| order[l - 2] >= order[l - 1]),
            WeightKind::Explicit { .. } => self.check_monotone_scan(s)?,
        })
    }

    /// Single-element removal scan over all `2^s` subsets.
    pub fn check_monotone_scan(&self, s: usize) -> Result<bool> {
        self.ensure_dimension(s)?;
        if s > ENUMERATION_S_MAX {
            return Err(Error::Resource(format!(
                "monotonicity scan over 2^{s} subsets"
            )));
        }
        for u in nonempty_subsets(s).filter(|u| u.len() >= 2) {
            let gu = self.weight_unchecked(u);
            for j in u.coords() {
                if self.weight_unchecked(u.remove(j)) < gu {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// `e_0, …, e_s` of the values `x(0), …, x(s-1)`.
pub(crate) fn elementary_symmetric(s: usize, x: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut e = vec![0.0; s + 1];
    e[0] = 1.0;
    for j in 0..s {
        let xj = x(j);
        for l in (1..=j + 1).rev() {
            e[l] += e[l - 1] * xj;
        }
    }
    e
}

/// Monotonicity of `Γ_{|u|} ∏ γ_j`: removing `j` from a size-`l` set with a
/// nonzero remaining product must not decrease the weight, i.e. `Γ_{l-1} ≥ Γ_l γ_j`
/// whenever `l - 1` other coordinates carry nonzero `γ`.
fn pod_monotone(s: usize, order: impl Fn(usize) -> f64, gamma: impl Fn(usize) -> f64) -> bool {
    let nonzero = (0..s).filter(|&j| gamma(j) > 0.0).count();
    for j in 0..s {
        let gj = gamma(j);
        let others = nonzero - usize::from(gj > 0.0);
        for l in 2..=s {
            if others + 1 < l {
                break;
            }
            if order(l - 1) < order(l) * gj {
                return false;
            }
        }
    }
    true
}

/// `α` and `γ` of a weighted Korobov or Walsh space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceParams {
    pub alpha: f64,
    pub weights: WeightSet,
}

impl SpaceParams {
    pub fn new(alpha: f64, weights: WeightSet) -> Result<Self> {
        if !(alpha > 0.5) || !alpha.is_finite() {
            return Err(domain(format!(
                "smoothness alpha = {alpha} must exceed 1/2"
            )));
        }
        Ok(SpaceParams { alpha, weights })
    }

    /// `α` as an integer when it is one.
    pub fn integer_alpha(&self) -> Option<u32> {
        integer_alpha(self.alpha)
    }
}

pub(crate) fn integer_alpha(alpha: f64) -> Option<u32> {
    (alpha.fract() == 0.0 && alpha >= 1.0 && alpha <= u32::MAX as f64).then_some(alpha as u32)
}

// ---------------------------------------------------------------------------
// Sequence formulas and textual weight specifications
// ---------------------------------------------------------------------------

/// A sequence term `c · j^e` or `c · j!` in the one-based index `j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Formula {
    pub coeff: f64,
    pub exponent: f64,
    pub factorial: bool,
}

impl Formula {
    pub fn eval(&self, j: usize) -> f64 {
        let base = if self.factorial {
            (1..=j).map(|i| i as f64).product::<f64>()
        } else {
            (j as f64).powf(self.exponent)
        };
        self.coeff * base
    }

    pub fn materialize(&self, len: usize) -> Vec<f64> {
        (1..=len).map(|j| self.eval(j)).collect()
    }
}

fn parse_number(s: &str) -> Result<f64> {
    let cleaned = s
        .trim()
        .trim_start_matches('(')
        .trim_end_matches(')')
        .replace('−', "-");
    cleaned
        .parse::<f64>()
        .map_err(|_| usage(format!("cannot parse number '{s}'")))
}

impl std::str::FromStr for Formula {
    type Err = Error;

    /// Accepts `j^e`, `c*j^e`, `c·j^e`, `j`, `j!`, `c*j!` and plain constants `c`;
    /// `k` may be used in place of `j`.
    fn from_str(text: &str) -> Result<Self> {
        let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if t.is_empty() {
            return Err(usage("empty sequence formula"));
        }
        let (coeff, term) = match t.find(['*', '·']) {
            Some(pos) => {
                let sep_len = t[pos..].chars().next().map_or(1, char::len_utf8);
                (parse_number(&t[..pos])?, &t[pos + sep_len..])
            }
            None if t.starts_with('j') || t.starts_with('k') => (1.0, t.as_str()),
            None => {
                return Ok(Formula {
                    coeff: parse_number(&t)?,
                    exponent: 0.0,
                    factorial: false,
                })
            }
        };
        let rest = term
            .strip_prefix('j')
            .or_else(|| term.strip_prefix('k'))
            .ok_or_else(|| {
                usage(format!(
                    "formula '{text}' must use the index variable j or k"
                ))
            })?;
        let formula = if rest.is_empty() {
            Formula {
                coeff,
                exponent: 1.0,
                factorial: false,
            }
        } else if rest == "!" {
            Formula {
                coeff,
                exponent: 0.0,
                factorial: true,
            }
        } else if let Some(e) = rest.strip_prefix('^') {
            Formula {
                coeff,
                exponent: parse_number(e)?,
                factorial: false,
            }
        } else {
            return Err(usage(format!("unrecognized formula '{text}'")));
        };
        if !(formula.coeff >= 0.0) {
            return Err(usage(format!("formula '{text}' yields negative weights")));
        }
        Ok(formula)
    }
}

/// A sequence given inline as numbers or as a formula string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SequenceSpec {
    List(Vec<f64>),
    Formula(String),
}

impl SequenceSpec {
    fn materialize(&self, s_max: usize) -> Result<Vec<f64>> {
        match self {
            SequenceSpec::List(v) => Ok(v.clone()),
            SequenceSpec::Formula(f) => Ok(f.parse::<Formula>()?.materialize(s_max)),
        }
    }

    fn parse_text(text: &str) -> Result<Self> {
        let t = text.trim().trim_start_matches('[').trim_end_matches(']');
        if t.contains(',') || t.parse::<f64>().is_err() && !t.contains(['j', 'k']) {
            let values = t.split(',').map(parse_number).collect::<Result<Vec<_>>>()?;
            Ok(SequenceSpec::List(values))
        } else {
            Ok(SequenceSpec::Formula(t.to_string()))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplicitEntry {
    pub u: Vec<usize>,
    pub value: f64,
}

/// Serialized form of a [`WeightSet`].
///
/// ```json
/// {"kind": "product", "gamma": "j^-2", "s_max": 16}
/// {"kind": "pod", "Gamma": "k!", "gamma": [1.0, 0.5]}
/// {"kind": "order", "Gamma": [1.0, 0.5, 0.25]}
/// {"kind": "explicit", "entries": [{"u": [1], "value": 0.5}], "s_max": 3}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WeightSpec {
    Product {
        gamma: SequenceSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        s_max: Option<usize>,
    },
    Pod {
        #[serde(rename = "Gamma")]
        order: SequenceSpec,
        gamma: SequenceSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        s_max: Option<usize>,
    },
    Order {
        #[serde(rename = "Gamma")]
        order: SequenceSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        s_max: Option<usize>,
    },
    Explicit {
        entries: Vec<ExplicitEntry>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        s_max: Option<usize>,
    },
}

impl TryFrom<WeightSpec> for WeightSet {
    type Error = Error;

    fn try_from(spec: WeightSpec) -> Result<Self> {
        let cap = |v: Vec<f64>, s: Option<usize>| match s {
            Some(s) => v.into_iter().take(s).collect(),
            None => v,
        };
        match spec {
            WeightSpec::Product { gamma, s_max } => {
                let len = s_max.unwrap_or(DEFAULT_S_MAX);
                WeightSet::product(cap(gamma.materialize(len)?, s_max))
            }
            WeightSpec::Pod {
                order,
                gamma,
                s_max,
            } => {
                let listed = [&order, &gamma]
                    .iter()
                    .filter_map(|seq| match seq {
                        SequenceSpec::List(v) => Some(v.len()),
                        SequenceSpec::Formula(_) => None,
                    })
                    .min();
                let len = s_max.or(listed).unwrap_or(DEFAULT_S_MAX);
                WeightSet::pod(
                    cap(order.materialize(len)?, Some(len)),
                    cap(gamma.materialize(len)?, Some(len)),
                )
            }
            WeightSpec::Order { order, s_max } => {
                let len = s_max.unwrap_or(DEFAULT_S_MAX);
                WeightSet::order_dependent(cap(order.materialize(len)?, s_max))
            }
            WeightSpec::Explicit { entries, s_max } => {
                let mut values = BTreeMap::new();
                let mut widest = 1;
                for e in entries {
                    let u = Subset::from_coords(&e.u)?;
                    widest = widest.max(u.max_coord());
                    values.insert(u, e.value);
                }
                WeightSet::explicit(values, s_max.unwrap_or(widest))
            }
        }
    }
}

impl From<WeightSet> for WeightSpec {
    fn from(w: WeightSet) -> Self {
        match w.kind {
            WeightKind::Product { gamma } => WeightSpec::Product {
                gamma: SequenceSpec::List(gamma),
                s_max: None,
            },
            WeightKind::Pod { order, gamma } => WeightSpec::Pod {
                order: SequenceSpec::List(order),
                gamma: SequenceSpec::List(gamma),
                s_max: Some(w.s_max),
            },
            WeightKind::OrderDependent { order } => WeightSpec::Order {
                order: SequenceSpec::List(order),
                s_max: None,
            },
            WeightKind::Explicit { values } => WeightSpec::Explicit {
                entries: values
                    .into_iter()
                    .map(|(u, value)| ExplicitEntry {
                        u: u.to_vec(),
                        value,
                    })
                    .collect(),
                s_max: Some(w.s_max),
            },
        }
    }
}

impl std::str::FromStr for WeightSet {
    type Err = Error;

    /// Parses the compact command-line form:
    ///
    /// * `product:j^-2` or `product:1,0.5,0.25`
    /// * `pod:Gamma=k!;gamma=j^-2`
    /// * `order:1,0.5,0.25` or `order:k^-1`
    /// * `explicit:1=0.5;1,2=0.25` (subsets as coordinate lists)
    ///
    /// A trailing `@S` (e.g. `product:j^-2@16`) sets `s_max`.
    fn from_str(text: &str) -> Result<Self> {
        let (body, s_max) = match text.rsplit_once('@') {
            Some((b, s)) => (
                b,
                Some(
                    s.trim()
                        .parse::<usize>()
                        .map_err(|_| usage(format!("bad s_max '{s}'")))?,
                ),
            ),
            None => (text, None),
        };
        let (kind, rest) = body
            .split_once(':')
            .ok_or_else(|| usage(format!("weights '{text}' must look like kind:spec")))?;
        let spec = match kind.trim() {
            "product" => WeightSpec::Product {
                gamma: SequenceSpec::parse_text(rest)?,
                s_max,
            },
            "order" => WeightSpec::Order {
                order: SequenceSpec::parse_text(rest)?,
                s_max,
            },
            "pod" => {
                let mut order = None;
                let mut gamma = None;
                for part in rest.split(';') {
                    let (key, value) = part.split_once('=').ok_or_else(|| {
                        usage(format!("pod component '{part}' must be key=value"))
                    })?;
                    match key.trim() {
                        "Gamma" | "G" => order = Some(SequenceSpec::parse_text(value)?),
                        "gamma" | "g" => gamma = Some(SequenceSpec::parse_text(value)?),
                        other => return Err(usage(format!("unknown pod component '{other}'"))),
                    }
                }
                WeightSpec::Pod {
                    order: order.ok_or_else(|| usage("pod weights need Gamma="))?,
                    gamma: gamma.ok_or_else(|| usage("pod weights need gamma="))?,
                    s_max,
                }
            }
            "explicit" => {
                let mut entries = Vec::new();
                for part in rest.split(';').filter(|p| !p.trim().is_empty()) {
                    let (u, value) = part.split_once('=').ok_or_else(|| {
                        usage(format!("explicit entry '{part}' must be coords=value"))
                    })?;
                    let u = u
                        .trim()
                        .trim_start_matches('{')
                        .trim_end_matches('}')
                        .split(',')
                        .map(|c| {
                            c.trim()
                                .parse::<usize>()
                                .map_err(|_| usage(format!("bad coordinate '{c}'")))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    entries.push(ExplicitEntry {
                        u,
                        value: parse_number(value)?,
                    });
                }
                WeightSpec::Explicit { entries, s_max }
            }
            other => return Err(usage(format!("unknown weight kind '{other}'"))),
        };
        WeightSet::try_from(spec)
    }
}

impl fmt::Display for WeightSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        match &self.kind {
            WeightKind::Product { gamma } => write!(f, "product:{}", list(gamma)),
            WeightKind::Pod { order, gamma } => {
                write!(f, "pod:Gamma={};gamma={}", list(order), list(gamma))
            }
            WeightKind::OrderDependent { order } => write!(f, "order:{}", list(order)),
            WeightKind::Explicit { values } => {
                let parts: Vec<_> = values
                    .iter()
                    .map(|(u, v)| format!("{}={v}", list_coords(*u)))
                    .collect();
                write!(f, "explicit:{}@{}", parts.join(";"), self.s_max)
            }
        }
    }
}

fn list_coords(u: Subset) -> String {
    u.coords()
        .map(|j| j.to_string())
        .collect::<Vec<_>>()
        .join(",")
}
