//! Power series solutions f(t) = Σ a_k t^{kα} of ABC D^α f = P + Q f².
//!
//! Matching coefficients of t^{mα} gives 0 = P + Q a_0² and, for m > 0,
//! B/(1−α)·Σ_{k=1}^m a_k(−λ)^{m−k}Γ(kα+1)/Γ(mα+1) = Q·Σ_{k=0}^m a_k a_{m−k}.
//! Both inner sums of the recursion for a_m run over k = 1..m−1, so every
//! a_m with m ≥ 1 vanishes and the series is the equilibrium √(−P/Q).

use crate::ab_ops::{ABParams, Normalization};
use crate::error::{Error, Result};
use crate::funcmodel::PowerSum;
use crate::rl_ops::gamma_ratio;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RootSign {
    #[default]
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiSpec {
    pub p: f64,
    pub q: f64,
    pub params: ABParams,
    pub sign: RootSign,
    /// The stated initial value; the series is fixed by P and Q alone.
    pub f0: Option<f64>,
}

impl RiccatiSpec {
    pub fn new(p: f64, q: f64, alpha: f64, norm: Normalization, sign: RootSign) -> Result<Self> {
        if q == 0.0 || !q.is_finite() || !p.is_finite() {
            return Err(Error::InvalidParams(format!("Riccati needs finite P and nonzero Q, got P={p}, Q={q}")));
        }
        let ratio = -p / q;
        if ratio < 0.0 {
            return Err(Error::ComplexRoot(ratio));
        }
        Ok(RiccatiSpec { p, q, params: ABParams::new(alpha, 0.0, norm)?, sign, f0: None })
    }

    pub fn a0(&self) -> f64 {
        let r = (-self.p / self.q).sqrt();
        match self.sign {
            RootSign::Plus => r,
            RootSign::Minus => -r,
        }
    }
}

/// Weight of a_k in the t^{mα} coefficient of ABC D^α t^{kα}.
fn abc_weight(params: &ABParams, k: usize, m: usize) -> f64 {
    let alpha = params.alpha();
    params.prefactor() * (-params.lambda()).powi((m - k) as i32) * gamma_ratio(k as f64 * alpha + 1.0, m as f64 * alpha + 1.0)
}

/// a_0 … a_M by the coefficient recursion.
pub fn riccati_coefficients(spec: &RiccatiSpec, m_max: usize) -> Result<Vec<f64>> {
    let a0 = spec.a0();
    let denom = 2.0 * spec.q * a0 - spec.params.prefactor();
    if m_max > 0 && denom.abs() <= 1e-14 * spec.params.prefactor() {
        return Err(Error::DenominatorZero);
    }
    let mut a = vec![a0];
    for m in 1..=m_max {
        let lhs: f64 = (1..m).map(|k| a[k] * abc_weight(&spec.params, k, m)).sum();
        let quad: f64 = (1..m).map(|k| a[k] * a[m - k]).sum();
        a.push((lhs - spec.q * quad) / denom);
    }
    Ok(a)
}

/// Partial sum Σ a_k t^{kα}.
pub fn riccati_eval(coeffs: &[f64], alpha: f64, t: f64) -> f64 {
    if t == 0.0 {
        return coeffs.first().copied().unwrap_or(0.0);
    }
    coeffs.iter().enumerate().map(|(k, a)| a * t.powf(k as f64 * alpha)).sum()
}

/// Coefficients c_0 … c_{m_max} of ABC D^α(Σ a_k t^{kα}) = Σ c_m t^{mα}; c_0 = 0.
pub fn ansatz_abc_coefficients(coeffs: &[f64], params: &ABParams, m_max: usize) -> Vec<f64> {
    (0..=m_max).map(|m| (1..=m.min(coeffs.len().saturating_sub(1))).map(|k| coeffs[k] * abc_weight(params, k, m)).sum()).collect()
}

/// The ansatz as a power sum about 0.
pub fn ansatz_powersum(coeffs: &[f64], alpha: f64) -> Result<PowerSum> {
    PowerSum::new(0.0, coeffs.iter().enumerate().map(|(k, &a)| (a, k as f64 * alpha)))
}

/// Largest relative defect of the coefficient identity over m = 0..M.
pub fn coefficient_identity_defect(spec: &RiccatiSpec, coeffs: &[f64]) -> f64 {
    let m_max = coeffs.len().saturating_sub(1);
    let lhs = ansatz_abc_coefficients(coeffs, &spec.params, m_max);
    (0..=m_max)
        .map(|m| {
            let conv: f64 = (0..=m).map(|k| coeffs[k] * coeffs[m - k]).sum();
            let rhs = spec.q * conv + if m == 0 { spec.p } else { 0.0 };
            let scale = lhs[m].abs().max(rhs.abs()).max(spec.p.abs()).max(f64::MIN_POSITIVE);
            (lhs[m] - rhs).abs() / scale
        })
        .fold(0.0, f64::max)
}

/// Max over `n` points of [lo, hi] of |ABC D^α f_M − P − Q f_M²|, both sides
/// truncated at t^{Mα}.
pub fn riccati_residual(spec: &RiccatiSpec, m_max: usize, lo: f64, hi: f64, n: usize) -> Result<f64> {
    let a = riccati_coefficients(spec, m_max)?;
    let d = ansatz_abc_coefficients(&a, &spec.params, m_max);
    let alpha = spec.params.alpha();
    // t^{mα} coefficients of P + Q f², truncated at m_max
    let rhs: Vec<f64> =
        (0..=m_max).map(|m| spec.q * (0..=m).map(|k| a[k] * a[m - k]).sum::<f64>() + if m == 0 { spec.p } else { 0.0 }).collect();
    let diff: Vec<f64> = d.iter().zip(&rhs).map(|(x, y)| x - y).collect();
    let steps = n.max(2) - 1;
    Ok((0..=steps).map(|i| riccati_eval(&diff, alpha, lo + (hi - lo) * i as f64 / steps as f64).abs()).fold(0.0, f64::max))
}
