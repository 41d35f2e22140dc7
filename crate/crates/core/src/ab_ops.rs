//! Atangana–Baleanu derivatives (ABR, ABC) and the AB integral.
//!
//! The ABR derivative has two independent evaluation paths: the kernel form
//! B/(1−α)·[f(t) + ∫ f(x)·∂E_α(−λ(t−x)^α) dx] by product-trapezoid quadrature,
//! and the series B/(1−α)·Σ (−λ)^n I^{αn} f of Riemann–Liouville integrals,
//! with λ = α/(1−α).

use crate::convolution::{ml_convolve, MlKernel};
use crate::error::{Error, Result};
use crate::funcmodel::{PowerSum, SampledFn, SmoothFn};
use crate::policy::{StopRule, TruncationPolicy};
use crate::rl_ops::{power_rule, rl_integral_grid, rl_integral_power};
use crate::specialfn::{ln_gamma, mittag_leffler2};
use serde::{Deserialize, Serialize};

/// Normalisation function B(α).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Normalization {
    /// B ≡ 1
    #[default]
    Unit,
    /// B(α) = e^{λα}. Only λ = 0 satisfies B(1) = 1, but any λ gives
    /// B(α)B(β) = B(α+β).
    Exponential { lambda: f64 },
}

impl Normalization {
    pub fn value(&self, alpha: f64) -> f64 {
        match *self {
            Normalization::Unit => 1.0,
            Normalization::Exponential { lambda } => (lambda * alpha).exp(),
        }
    }
}

/// Order, base point and normalisation shared by every AB operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ABParams {
    alpha: f64,
    base: f64,
    norm: Normalization,
}

impl ABParams {
    pub fn new(alpha: f64, base: f64, norm: Normalization) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParams(format!("AB order {alpha} outside the open interval (0, 1)")));
        }
        if !base.is_finite() {
            return Err(Error::InvalidParams(format!("base point {base} is not finite")));
        }
        if let Normalization::Exponential { lambda } = norm {
            if !lambda.is_finite() {
                return Err(Error::InvalidParams(format!("normalisation rate {lambda} is not finite")));
            }
            if lambda != 0.0 {
                log::warn!("B(alpha) = exp({lambda}*alpha) does not satisfy B(0) = B(1) = 1");
            }
        }
        Ok(ABParams { alpha, base, norm })
    }

    /// α with B ≡ 1 and base point 0.
    pub fn unit(alpha: f64) -> Result<Self> {
        ABParams::new(alpha, 0.0, Normalization::Unit)
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        ABParams::new(alpha, self.base, self.norm)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn norm(&self) -> Normalization {
        self.norm
    }

    /// B(α)
    pub fn b(&self) -> f64 {
        self.norm.value(self.alpha)
    }

    /// λ = α/(1−α)
    pub fn lambda(&self) -> f64 {
        self.alpha / (1.0 - self.alpha)
    }

    /// B(α)/(1−α)
    pub fn prefactor(&self) -> f64 {
        self.b() / (1.0 - self.alpha)
    }
}

/// Truncation metadata of a series evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ABSeriesReport {
    pub terms_used: usize,
    /// Bound on the omitted tail over the evaluation horizon.
    pub tail_estimate: f64,
}

fn check_base_f(p: &ABParams, base: f64) -> Result<()> {
    if base != p.base {
        return Err(Error::InvalidParams(format!("function is expanded about {base} but the operator base is {}", p.base)));
    }
    Ok(())
}

fn horizon(p: &ABParams, t_max: f64) -> Result<f64> {
    let span = t_max - p.base;
    if !(span > 0.0 && span.is_finite()) {
        return Err(Error::InvalidParams(format!("series horizon {t_max} must lie beyond the base point")));
    }
    Ok(span)
}

/// Σ_n (−λ)^n I^{αn+shift} g, scaled by B/(1−α), truncated by `pol` on [a, t_max].
fn series_power(
    g: &PowerSum,
    p: &ABParams,
    shift: f64,
    t_max: f64,
    pol: &TruncationPolicy,
) -> Result<(PowerSum, ABSeriesReport)> {
    let span = horizon(p, t_max)?;
    let alpha = p.alpha;
    let lambda = p.lambda();
    // majorant of the n-th term on [a, t_max]
    let bound = |n: usize| -> f64 {
        let mu = alpha * n as f64 + shift;
        g.terms()
            .iter()
            .map(|&(c, e)| {
                let ln_mag = n as f64 * lambda.ln() + ln_gamma(e + 1.0) - ln_gamma(e + mu + 1.0) + (e + mu) * span.ln();
                c.abs() * ln_mag.exp()
            })
            .sum()
    };
    let mut terms: Vec<(f64, f64)> = Vec::new();
    let mut stop = StopRule::default();
    let mut majorant = 0.0;
    let mut used = None;
    for n in 0..pol.max_terms {
        let mu = alpha * n as f64 + shift;
        let piece = if mu == 0.0 { g.clone() } else { power_rule(g, mu)? };
        let sign_pow = if n % 2 == 0 { 1.0 } else { -1.0 } * lambda.powi(n as i32);
        terms.extend(piece.terms().iter().map(|&(c, e)| (c * sign_pow, e)));
        let b = bound(n);
        if !b.is_finite() {
            return Err(Error::Overflow { what: "AB series term", x: t_max });
        }
        majorant += b;
        if stop.update(b, pol.threshold(majorant)) {
            used = Some(n + 1);
            break;
        }
    }
    let Some(terms_used) = used else {
        return Err(Error::NoConvergence { what: "AB derivative series", terms: pol.max_terms });
    };
    let b1 = bound(terms_used);
    let b2 = bound(terms_used + 1);
    let tail = if b1 == 0.0 {
        0.0
    } else if b2 < b1 {
        b1 / (1.0 - b2 / b1)
    } else {
        f64::INFINITY
    };
    let out = PowerSum::new(g.base(), terms)?.scale(p.prefactor());
    Ok((out, ABSeriesReport { terms_used, tail_estimate: tail * p.prefactor() }))
}

/// ABR derivative by the series of RL integrals on a power sum, truncated
/// with respect to the horizon [a, t_max].
pub fn abr_derivative_series(
    f: &PowerSum,
    p: &ABParams,
    pol: &TruncationPolicy,
    t_max: f64,
) -> Result<(PowerSum, ABSeriesReport)> {
    check_base_f(p, f.base())?;
    series_power(f, p, 0.0, t_max, pol)
}

/// ABR series path on grid samples: each I^{αn} by product-trapezoid quadrature.
pub fn abr_derivative_series_grid(f: &SampledFn, p: &ABParams, pol: &TruncationPolicy) -> Result<(SampledFn, ABSeriesReport)> {
    check_base_f(p, f.a())?;
    let span = f.b() - f.a();
    let lambda = p.lambda();
    let fmax = f.max_abs_from(f.a());
    let bound = |n: usize| -> f64 {
        let mu = p.alpha * n as f64;
        fmax * (n as f64 * lambda.ln() + mu * span.ln() - ln_gamma(mu + 1.0)).exp()
    };
    let mut acc = f.values().to_vec();
    let mut stop = StopRule::default();
    let mut majorant = bound(0);
    stop.update(majorant, pol.threshold(majorant));
    let mut used = None;
    for n in 1..pol.max_terms {
        let mu = p.alpha * n as f64;
        let term = rl_integral_grid(f, mu)?;
        let c = if n % 2 == 0 { 1.0 } else { -1.0 } * lambda.powi(n as i32);
        for (a, v) in acc.iter_mut().zip(term.values()) {
            *a += c * v;
        }
        let b = bound(n);
        majorant += b;
        if stop.update(b, pol.threshold(majorant)) {
            used = Some(n + 1);
            break;
        }
    }
    let Some(terms_used) = used else {
        return Err(Error::NoConvergence { what: "AB derivative series", terms: pol.max_terms });
    };
    let (b1, b2) = (bound(terms_used), bound(terms_used + 1));
    let tail = if b1 == 0.0 {
        0.0
    } else if b2 < b1 {
        b1 / (1.0 - b2 / b1)
    } else {
        f64::INFINITY
    };
    let k = p.prefactor();
    let out = SampledFn::new(f.a(), f.b(), acc.into_iter().map(|v| k * v).collect())?;
    Ok((out, ABSeriesReport { terms_used, tail_estimate: tail * k }))
}

/// ABR derivative by product-trapezoid quadrature of the differentiated kernel.
pub fn abr_derivative_kernel(f: &SampledFn, p: &ABParams, pol: &TruncationPolicy) -> Result<SampledFn> {
    check_base_f(p, f.a())?;
    if f.singular_at_base() {
        return Err(Error::SingularAtBase(f.a()));
    }
    let kernel = MlKernel::Derivative { alpha: p.alpha, c: -p.lambda() };
    let conv = ml_convolve(kernel, f.values(), f.h(), pol)?;
    let k = p.prefactor();
    SampledFn::new(f.a(), f.b(), f.values().iter().zip(conv).map(|(v, c)| k * (v + c)).collect())
}

/// ABC derivative by the series B/(1−α)·Σ (−λ)^n I^{αn+1} f′ on a power sum.
pub fn abc_derivative_series(
    f: &PowerSum,
    p: &ABParams,
    pol: &TruncationPolicy,
    t_max: f64,
) -> Result<(PowerSum, ABSeriesReport)> {
    check_base_f(p, f.base())?;
    series_power(&f.derivative()?, p, 1.0, t_max, pol)
}

/// ABC derivative by quadrature of exact f′ samples against E_α(−λ(t−x)^α).
pub fn abc_derivative_kernel(f: &SmoothFn, p: &ABParams, b: f64, n: usize, pol: &TruncationPolicy) -> Result<SampledFn> {
    let df = f.sample_deriv(1, p.base, b, n)?;
    let kernel = MlKernel::Value { alpha: p.alpha, c: -p.lambda() };
    let conv = ml_convolve(kernel, df.values(), df.h(), pol)?;
    let k = p.prefactor();
    SampledFn::new(p.base, b, conv.into_iter().map(|v| k * v).collect())
}

/// ABC derivative of grid samples, taking f(a) from the first sample:
/// ABR D f − B/(1−α)·f(a)·E_α(−λ(t−a)^α).
pub fn abc_derivative_sampled(f: &SampledFn, p: &ABParams, pol: &TruncationPolicy) -> Result<SampledFn> {
    abc_derivative_sampled_with_initial(f, f.values()[0], p, pol)
}

/// As [`abc_derivative_sampled`] but with an explicitly supplied initial value.
pub fn abc_derivative_sampled_with_initial(f: &SampledFn, f0: f64, p: &ABParams, pol: &TruncationPolicy) -> Result<SampledFn> {
    let abr = abr_derivative_kernel(f, p, pol)?;
    if f0 == 0.0 {
        return Ok(abr);
    }
    let k = p.prefactor() * f0;
    let mut values = abr.values().to_vec();
    for (j, v) in values.iter_mut().enumerate() {
        let x = f.t(j) - f.a();
        *v -= k * mittag_leffler2(p.alpha, 1.0, -p.lambda() * x.powf(p.alpha), pol)?;
    }
    SampledFn::new(f.a(), f.b(), values)
}

/// AB integral (1−α)/B·f + α/B·I^α f on a power sum (exact).
pub fn ab_integral(f: &PowerSum, p: &ABParams) -> Result<PowerSum> {
    check_base_f(p, f.base())?;
    let b = p.b();
    f.scale((1.0 - p.alpha) / b).add(&rl_integral_power(f, p.alpha)?.scale(p.alpha / b))
}

/// AB integral on grid samples.
pub fn ab_integral_grid(f: &SampledFn, p: &ABParams) -> Result<SampledFn> {
    check_base_f(p, f.a())?;
    let b = p.b();
    f.lin_comb((1.0 - p.alpha) / b, &rl_integral_grid(f, p.alpha)?, p.alpha / b)
}

/// Max-norm residuals of the inverse, Newton–Leibniz and commutativity identities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityReport {
    /// AB I^α(ABR D^α f) − f
    pub left_inverse: f64,
    /// ABR D^α(AB I^α f) − f
    pub right_inverse: f64,
    /// AB I^α(ABC D^α f) − (f − f(a))
    pub newton_leibniz: f64,
    /// ABR D^α ABR D^β f − ABR D^β ABR D^α f
    pub commute_derivatives: f64,
    /// AB I^α AB I^β f − AB I^β AB I^α f
    pub commute_integrals: f64,
    /// ABR D^α AB I^β f − AB I^β ABR D^α f
    pub commute_mixed: f64,
}

impl IdentityReport {
    pub fn entries(&self) -> [(&'static str, f64); 6] {
        [
            ("left_inverse", self.left_inverse),
            ("right_inverse", self.right_inverse),
            ("newton_leibniz", self.newton_leibniz),
            ("commute_derivatives", self.commute_derivatives),
            ("commute_integrals", self.commute_integrals),
            ("commute_mixed", self.commute_mixed),
        ]
    }

    pub fn max(&self) -> f64 {
        self.entries().iter().map(|e| e.1).fold(0.0, f64::max)
    }
}

/// Evaluate the six identities of the AB calculus for `f` on `n` points of `[lo, hi]`.
pub fn verify_inverse_identities(
    f: &PowerSum,
    p: &ABParams,
    beta: f64,
    pol: &TruncationPolicy,
    lo: f64,
    hi: f64,
    n: usize,
) -> Result<IdentityReport> {
    check_base_f(p, f.base())?;
    let q = p.with_alpha(beta)?;
    let d = |g: &PowerSum, pp: &ABParams| abr_derivative_series(g, pp, pol, hi).map(|r| r.0);
    let i = |g: &PowerSum, pp: &ABParams| ab_integral(g, pp);
    let resid = |x: PowerSum, y: &PowerSum| -> Result<f64> { x.sub(y)?.max_abs_on(lo, hi, n) };

    let left_inverse = resid(i(&d(f, p)?, p)?, f)?;
    let right_inverse = resid(d(&i(f, p)?, p)?, f)?;
    let fa = f.value_at_base()?;
    let shifted = f.sub(&PowerSum::constant(f.base(), fa))?;
    let nl = ab_integral(&abc_derivative_series(f, p, pol, hi)?.0, p)?;
    let newton_leibniz = resid(nl, &shifted)?;
    let commute_derivatives = resid(d(&d(f, &q)?, p)?, &d(&d(f, p)?, &q)?)?;
    let commute_integrals = resid(i(&i(f, &q)?, p)?, &i(&i(f, p)?, &q)?)?;
    let commute_mixed = resid(d(&i(f, &q)?, p)?, &i(&d(f, p)?, &q)?)?;
    Ok(IdentityReport { left_inverse, right_inverse, newton_leibniz, commute_derivatives, commute_integrals, commute_mixed })
}
