//! Product and chain rules for the ABR derivative, as truncated double series.
//!
//! Product rule: ABR D(uv) = Σ_m v^{(m)}·B/(1−α)·Σ_n (−λ)^n C(−nα, m)·I^{αn+m} u.
//! Chain rule: RL I^{mα} φ = Σ_n C(−mα, n)(t−a)^{n+mα}/Γ(n+mα+1)·φ^{(n)} with
//! φ^{(n)} from Faà di Bruno's formula, summed against (−λ)^m.

use crate::ab_ops::{abr_derivative_series, ABParams};
use crate::error::{Error, Result};
use crate::funcmodel::{PowerSum, SampledFn, SmoothFn};
use crate::policy::{KahanSum, TruncationPolicy};
use crate::rl_ops::power_rule;
use crate::specialfn::{mittag_leffler2, recip_gamma};
use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

/// (P_1, …, P_n) with Σ P_i = k and Σ i·P_i = n.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartitionTuple {
    pub n: usize,
    pub k: usize,
    pub parts: Vec<u32>,
}

impl PartitionTuple {
    /// n!/Π P_i!(i!)^{P_i}
    pub fn weight(&self) -> f64 {
        let mut w = 1.0;
        for i in 1..=self.n {
            w *= i as f64;
        }
        let mut fact_i = 1.0;
        for (idx, &p) in self.parts.iter().enumerate() {
            fact_i *= (idx + 1) as f64;
            for j in 1..=p {
                w /= j as f64 * fact_i;
            }
        }
        w
    }

    /// Π (g^{(i)})^{P_i} given derivatives d[i] = g^{(i)}.
    pub fn monomial(&self, d: &[f64]) -> f64 {
        self.parts.iter().enumerate().map(|(idx, &p)| d[idx + 1].powi(p as i32)).product()
    }
}

type PartitionCache = RwLock<HashMap<(usize, usize), Arc<Vec<PartitionTuple>>>>;

fn partition_cache() -> &'static PartitionCache {
    static CACHE: OnceLock<PartitionCache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// All partitions of n into exactly k parts, as multiplicity tuples, in lexicographic order.
pub fn enumerate_partitions(n: usize, k: usize) -> Result<Arc<Vec<PartitionTuple>>> {
    if n == 0 || k == 0 || k > n {
        return Err(Error::InvalidParams(format!("partitions need 1 ≤ k ≤ n, got n={n}, k={k}")));
    }
    if let Some(hit) = partition_cache().read().unwrap().get(&(n, k)) {
        return Ok(hit.clone());
    }
    let mut out = Vec::new();
    let mut parts = vec![0u32; n];
    fill(n, k, n, &mut parts, &mut out);
    out.sort();
    let out = Arc::new(out);
    partition_cache().write().unwrap().insert((n, k), out.clone());
    Ok(out)
}

// choose multiplicities for part sizes ≤ `largest`, descending
fn fill(rem_n: usize, rem_k: usize, largest: usize, parts: &mut Vec<u32>, out: &mut Vec<PartitionTuple>) {
    if rem_n == 0 && rem_k == 0 {
        let n = parts.iter().enumerate().map(|(i, &p)| (i + 1) * p as usize).sum();
        let k = parts.iter().map(|&p| p as usize).sum();
        out.push(PartitionTuple { n, k, parts: parts.clone() });
        return;
    }
    if largest == 0 || rem_k == 0 || rem_n < rem_k || rem_n > rem_k * largest {
        return;
    }
    let max_count = (rem_n / largest).min(rem_k);
    for c in (0..=max_count).rev() {
        parts[largest - 1] = c as u32;
        fill(rem_n - c * largest, rem_k - c, largest - 1, parts, out);
    }
    parts[largest - 1] = 0;
}

/// x(x−1)…(x−n+1)/n!
pub fn generalized_binomial(x: f64, n: usize) -> f64 {
    let mut r = 1.0;
    for j in 0..n {
        r *= (x - j as f64) / (j + 1) as f64;
    }
    r
}

/// Caps on the series index (powers of −λ) and the classical Leibniz/Faà di Bruno index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RuleTruncation {
    pub m_outer: usize,
    pub n_inner: usize,
}

impl Default for RuleTruncation {
    fn default() -> Self {
        RuleTruncation { m_outer: 40, n_inner: 12 }
    }
}

impl RuleTruncation {
    pub fn new(m_outer: usize, n_inner: usize) -> Result<Self> {
        if m_outer == 0 || n_inner == 0 {
            return Err(Error::InvalidParams("rule truncation indices must be at least 1".into()));
        }
        Ok(RuleTruncation { m_outer, n_inner })
    }
}

/// The Leibniz-index brackets of the product rule and their sum on a grid.
#[derive(Debug, Clone)]
pub struct ProductRuleResult {
    /// brackets[m] = B/(1−α)·Σ_n (−λ)^n C(−nα, m)·I^{αn+m} u
    pub brackets: Vec<PowerSum>,
    pub values: SampledFn,
    pub trunc: RuleTruncation,
}

/// m-th bracket of the product rule, exact on a power sum.
pub fn product_bracket(u: &PowerSum, p: &ABParams, m: usize, trunc: &RuleTruncation) -> Result<PowerSum> {
    let alpha = p.alpha();
    let lambda = p.lambda();
    let mut terms = Vec::new();
    for n in 0..=trunc.m_outer {
        let w = (-lambda).powi(n as i32) * generalized_binomial(-(n as f64) * alpha, m);
        if w == 0.0 {
            continue;
        }
        let mu = alpha * n as f64 + m as f64;
        let piece = if mu == 0.0 { u.clone() } else { power_rule(u, mu)? };
        terms.extend(piece.terms().iter().map(|&(c, e)| (w * c, e)));
    }
    Ok(PowerSum::new(u.base(), terms)?.scale(p.prefactor()))
}

/// ABR D^α(u·v) by the product rule on `n` grid points of [a, b].
pub fn product_rule(
    u: &PowerSum,
    v: &SmoothFn,
    p: &ABParams,
    trunc: &RuleTruncation,
    b: f64,
    n: usize,
) -> Result<ProductRuleResult> {
    if u.base() != p.base() {
        return Err(Error::InvalidParams("u must be expanded about the operator base".into()));
    }
    let brackets = (0..=trunc.n_inner).map(|m| product_bracket(u, p, m, trunc)).collect::<Result<Vec<_>>>()?;
    let values = SampledFn::from_fn(p.base(), b, n, |t| {
        let mut acc = KahanSum::default();
        for (m, br) in brackets.iter().enumerate() {
            let dv = v.deriv(m, t)?;
            if dv != 0.0 {
                acc.add(dv * br.eval(t)?);
            }
        }
        Ok(acc.value())
    })?;
    Ok(ProductRuleResult { brackets, values, trunc: *trunc })
}

/// One (m, n, k) contribution of the chain rule at a fixed t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainTerm {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub contribution: f64,
}

/// φ^{(n)} split by k: B_{n,k} = Σ over partitions of n into k parts, times f^{(k)}(g).
fn faa_di_bruno_parts(f: &SmoothFn, gd: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(n);
    for k in 1..=n {
        let bell: f64 = enumerate_partitions(n, k)?.iter().map(|pt| pt.weight() * pt.monomial(gd)).sum();
        out.push(if bell == 0.0 { 0.0 } else { f.deriv(k, gd[0])? * bell });
    }
    Ok(out)
}

/// Term-resolved double sum of the chain rule at t (excluding the E_α leading term).
pub fn chain_rule_terms(f: &SmoothFn, g: &SmoothFn, p: &ABParams, trunc: &RuleTruncation, t: f64) -> Result<Vec<ChainTerm>> {
    let x = t - p.base();
    if x < 0.0 {
        return Err(Error::Domain(format!("t = {t} lies before the base point")));
    }
    let alpha = p.alpha();
    let lambda = p.lambda();
    let gd = (0..=trunc.n_inner).map(|i| g.deriv(i, t)).collect::<Result<Vec<_>>>()?;
    let parts = (1..=trunc.n_inner).map(|n| faa_di_bruno_parts(f, &gd, n)).collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for m in 1..=trunc.m_outer {
        let lead = p.prefactor() * (-lambda).powi(m as i32);
        for n in 1..=trunc.n_inner {
            let e = n as f64 + m as f64 * alpha;
            let w = lead * generalized_binomial(-(m as f64) * alpha, n) * x.powf(e) * recip_gamma(e + 1.0);
            for (k, &fk) in parts[n - 1].iter().enumerate() {
                out.push(ChainTerm { m, n, k: k + 1, contribution: w * fk });
            }
        }
    }
    Ok(out)
}

/// Chain-rule value at t: B/(1−α)·E_α(−λ(t−a)^α)·f(g(t)) plus the double sum.
pub fn chain_rule_at(
    f: &SmoothFn,
    g: &SmoothFn,
    p: &ABParams,
    trunc: &RuleTruncation,
    t: f64,
    pol: &TruncationPolicy,
) -> Result<f64> {
    let x = t - p.base();
    let ml = mittag_leffler2(p.alpha(), 1.0, -p.lambda() * x.max(0.0).powf(p.alpha()), pol)?;
    let mut acc = KahanSum::default();
    acc.add(p.prefactor() * ml * f.eval(g.eval(t)));
    // m-major order so the alternating powers of −λ are accumulated in sequence
    for term in chain_rule_terms(f, g, p, trunc, t)? {
        acc.add(term.contribution);
    }
    Ok(acc.value())
}

/// Chain rule on `n` grid points of [a, b].
pub fn chain_rule(
    f: &SmoothFn,
    g: &SmoothFn,
    p: &ABParams,
    trunc: &RuleTruncation,
    b: f64,
    n: usize,
    pol: &TruncationPolicy,
) -> Result<SampledFn> {
    SampledFn::from_fn(p.base(), b, n, |t| chain_rule_at(f, g, p, trunc, t, pol))
}

/// Max gap between the product rule and the direct series ABR D(u·v), for u, v power sums.
#[allow(clippy::too_many_arguments)]
pub fn product_rule_gap(
    u: &PowerSum,
    v: &PowerSum,
    p: &ABParams,
    trunc: &RuleTruncation,
    lo: f64,
    hi: f64,
    n: usize,
    pol: &TruncationPolicy,
) -> Result<f64> {
    let rule = product_rule(u, &SmoothFn::from(v), p, trunc, hi, n)?;
    let (direct, _) = abr_derivative_series(&u.mul(v)?, p, pol, hi)?;
    let mut worst = 0.0f64;
    for (j, got) in rule.values.values().iter().enumerate() {
        let t = rule.values.t(j);
        if t >= lo {
            worst = worst.max((got - direct.eval(t)?).abs());
        }
    }
    Ok(worst)
}
