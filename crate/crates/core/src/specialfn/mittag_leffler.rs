use super::gamma::{gamma_sign, ln_gamma, recip_gamma};
use crate::error::{Error, Result};
use crate::policy::{KahanSum, StopRule, TruncationPolicy};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Arguments below this value are rejected rather than evaluated with lost digits.
pub const ML_MIN_ARG: f64 = -50.0;

/// Argument of the one-parameter Mittag-Leffler function E_α(x).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MLArg {
    pub alpha: f64,
    pub x: f64,
}

impl MLArg {
    pub fn new(alpha: f64, x: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !x.is_finite() {
            return Err(Error::Domain(format!("Mittag-Leffler argument {x} is not finite")));
        }
        Ok(MLArg { alpha, x })
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParams(format!("Mittag-Leffler order {alpha} outside (0, 1]")));
    }
    Ok(())
}

/// E_α(x) = Σ x^n / Γ(αn + 1).
pub fn mittag_leffler(arg: MLArg, pol: &TruncationPolicy) -> Result<f64> {
    mittag_leffler2(arg.alpha, 1.0, arg.x, pol)
}

/// Two-parameter function E_{α,β}(x) = Σ x^n / Γ(αn + β), for α ∈ (0, 1] and β > 0.
///
/// The power series is used directly unless alternating cancellation would
/// cost more than a few digits, in which case E_{α,β}(x) is recovered as the
/// inverse Laplace transform of s^(α-β)/(s^α - x) at t = 1.
pub fn mittag_leffler2(alpha: f64, beta: f64, x: f64, pol: &TruncationPolicy) -> Result<f64> {
    check_alpha(alpha)?;
    if !(beta > 0.0) {
        return Err(Error::InvalidParams(format!("second Mittag-Leffler parameter {beta} must be positive")));
    }
    if !x.is_finite() {
        return Err(Error::Domain(format!("Mittag-Leffler argument {x} is not finite")));
    }
    if x < ML_MIN_ARG {
        return Err(Error::NoConvergence { what: "Mittag-Leffler series below x = -50", terms: 0 });
    }
    if alpha == 1.0 && beta == 1.0 {
        let v = x.exp();
        if !v.is_finite() {
            return Err(Error::Overflow { what: "Mittag-Leffler", x });
        }
        return Ok(v);
    }
    if x >= 0.0 {
        return series(alpha, beta, x, pol).map(|(s, _)| s);
    }
    if let Ok((sum, abs_sum)) = series(alpha, beta, x, pol) {
        if 4.0 * f64::EPSILON * abs_sum <= 1e-12 * sum.abs() {
            return Ok(sum);
        }
    }
    Ok(contour(alpha, beta, x))
}

fn series(alpha: f64, beta: f64, x: f64, pol: &TruncationPolicy) -> Result<(f64, f64)> {
    if x == 0.0 {
        let v = recip_gamma(beta);
        return Ok((v, v.abs()));
    }
    let ax = x.abs();
    let lnx = ax.ln();
    let mut sum = KahanSum::default();
    let mut abs_sum = 0.0;
    let mut stop = StopRule::default();
    for n in 0..pol.max_terms {
        let arg = alpha * n as f64 + beta;
        let mag = if n as f64 * lnx < 700.0 && arg < 170.0 {
            ax.powi(n as i32) * recip_gamma(arg)
        } else {
            (n as f64 * lnx - ln_gamma(arg)).exp() * gamma_sign(arg)
        };
        let term = if x < 0.0 && n % 2 == 1 { -mag } else { mag };
        sum.add(term);
        abs_sum += term.abs();
        if !sum.value().is_finite() {
            return Err(Error::Overflow { what: "Mittag-Leffler", x });
        }
        if stop.update(term.abs(), pol.threshold(sum.value())) {
            return Ok((sum.value(), abs_sum));
        }
    }
    Err(Error::NoConvergence { what: "Mittag-Leffler series", terms: pol.max_terms })
}

/// Weideman–Trefethen cotangent contour for the Bromwich integral at t = 1.
fn contour(alpha: f64, beta: f64, x: f64) -> f64 {
    const N: usize = 32;
    const C: f64 = 0.6407;
    let nf = N as f64;
    let h = 2.0 * PI / nf;
    let mut acc = 0.0;
    // the integrand is conjugate-symmetric, so only θ > 0 is summed
    for k in N / 2..N {
        let theta = (k as f64 + 0.5) * h - PI;
        let ct = C * theta;
        let cot = ct.cos() / ct.sin();
        let z = Complex64::new(nf * (-0.6122 + 0.5017 * theta * cot), nf * 0.2645 * theta);
        let dz = Complex64::new(nf * 0.5017 * cot_minus_csc2(ct), nf * 0.2645);
        let f = z.powf(alpha - beta) / (z.powf(alpha) - x);
        acc += (h * z.exp() * f * dz).im;
    }
    acc / PI
}

/// cot(u) - u/sin²(u), written as (sin 2u - 2u)/(2 sin²u) to avoid cancellation near 0.
fn cot_minus_csc2(u: f64) -> f64 {
    let x = 2.0 * u;
    let sin_x_minus_x = if x.abs() < 1.0 {
        let x2 = x * x;
        let mut term = x;
        let mut acc = 0.0;
        let mut k = 1.0;
        loop {
            term *= -x2 / ((2.0 * k) * (2.0 * k + 1.0));
            acc += term;
            if term.abs() <= 1e-17 * acc.abs() {
                break;
            }
            k += 1.0;
        }
        acc
    } else {
        x.sin() - x
    };
    let s = u.sin();
    sin_x_minus_x / (2.0 * s * s)
}

/// d/du E_α(c·u^α) = (z/u)·E_{α,α}(z) with z = c·u^α, for u > 0.
pub fn mittag_leffler_kernel_dt(alpha: f64, c: f64, u: f64, pol: &TruncationPolicy) -> Result<f64> {
    check_alpha(alpha)?;
    if !(u > 0.0) {
        return Err(Error::Domain(format!("kernel derivative needs u > 0, got {u}")));
    }
    if c == 0.0 {
        return Ok(0.0);
    }
    let z = c * u.powf(alpha);
    Ok(z / u * mittag_leffler2(alpha, alpha, z, pol)?)
}
