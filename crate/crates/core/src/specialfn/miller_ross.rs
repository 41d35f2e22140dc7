use super::gamma::{gamma_sign, ln_gamma, recip_gamma};
use crate::error::{Error, Result};
use crate::policy::{KahanSum, StopRule, TruncationPolicy};
use crate::quad;

/// Argument of the Miller–Ross function E_t(ν, a).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MillerRossArg {
    pub nu: f64,
    pub a_coef: f64,
    pub t: f64,
}

impl MillerRossArg {
    pub fn new(nu: f64, a_coef: f64, t: f64) -> Result<Self> {
        if !(nu.is_finite() && a_coef.is_finite() && t.is_finite()) {
            return Err(Error::Domain("Miller-Ross arguments must be finite".into()));
        }
        if t < 0.0 || (t == 0.0 && nu < 0.0) {
            return Err(Error::Domain(format!("Miller-Ross function needs t > 0 (nu = {nu}, t = {t})")));
        }
        Ok(MillerRossArg { nu, a_coef, t })
    }
}

/// E_t(ν, a) = t^ν Σ (a t)^n / Γ(ν + n + 1).
pub fn miller_ross(arg: MillerRossArg, pol: &TruncationPolicy) -> Result<f64> {
    let MillerRossArg { nu, a_coef, t } = MillerRossArg::new(arg.nu, arg.a_coef, arg.t)?;
    if t == 0.0 {
        return Ok(if nu == 0.0 { 1.0 } else { 0.0 });
    }
    let v = t.powf(nu) * mittag_leffler_one(nu + 1.0, a_coef * t, pol)?;
    if !v.is_finite() {
        return Err(Error::Overflow { what: "Miller-Ross function", x: t });
    }
    Ok(v)
}

/// E_{1,β}(z) = Σ z^n / Γ(n + β) for any real β.
pub fn mittag_leffler_one(beta: f64, z: f64, pol: &TruncationPolicy) -> Result<f64> {
    if z >= -2.0 {
        return series(beta, z, pol);
    }
    if z <= -ALGEBRAIC_MIN_Z {
        // the exponential part is below e^{-40} relative
        return mittag_leffler_one_algebraic(beta, z);
    }
    if beta > 0.0 {
        return integral_form(beta, -z);
    }
    // E_{1,β}(z) = 1/Γ(β) + z·E_{1,β+1}(z)
    Ok(recip_gamma(beta) + z * mittag_leffler_one(beta + 1.0, z, pol)?)
}

/// Smallest −z accepted by [`mittag_leffler_one_algebraic`] on the negative
/// axis; the asymptotic series is then accurate to about e^{−|z|}.
pub const ALGEBRAIC_MIN_Z: f64 = 40.0;

/// Smallest positive z accepted by [`mittag_leffler_one_algebraic`].
pub const ALGEBRAIC_MIN_POS_Z: f64 = 1.0;

/// Algebraic part of E_{1,β}(z), asymptotically −Σ_{j≥1} z^{−j}/Γ(β−j).
///
/// For z > 0 this is E_{1,β}(z) − z^{1−β}e^z, so sums of E_{1,β} whose
/// exponential parts cancel analytically can be formed without touching e^z.
/// For z < 0 it is E_{1,β}(z) itself up to O(|z|^{1−β}e^{z}).
pub fn mittag_leffler_one_algebraic(beta: f64, z: f64) -> Result<f64> {
    if !beta.is_finite() || !(z >= ALGEBRAIC_MIN_POS_Z || z <= -ALGEBRAIC_MIN_Z) {
        return Err(Error::Domain(format!(
            "algebraic part needs z >= {ALGEBRAIC_MIN_POS_Z} or z <= -{ALGEBRAIC_MIN_Z}, got {z}"
        )));
    }
    if z > 0.0 {
        // −Γ(β−1, z) e^z z^{1−β} / Γ(β−1)
        let s = beta - 1.0;
        let rg = recip_gamma(s);
        if rg == 0.0 {
            return Ok(0.0);
        }
        return Ok(-rg * upper_gamma_cf(s, z)?);
    }
    let mut sum = KahanSum::default();
    let mut last = f64::INFINITY;
    let mut zpow = 1.0;
    for j in 1..(2.0 * z.abs()) as usize {
        zpow /= z;
        let term = zpow * recip_gamma(beta - j as f64);
        // optimal truncation: stop once terms start to grow
        if term.abs() > last && j as f64 > beta {
            break;
        }
        sum.add(-term);
        if term != 0.0 {
            last = term.abs();
        }
        if term.abs() <= 1e-18 * sum.value().abs() {
            break;
        }
    }
    Ok(sum.value())
}

/// e^z z^{−s} Γ(s, z) by the Legendre continued fraction (modified Lentz).
fn upper_gamma_cf(s: f64, z: f64) -> Result<f64> {
    const TINY: f64 = 1e-300;
    let mut b = z + 1.0 - s;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64 - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            return Ok(h);
        }
    }
    Err(Error::NoConvergence { what: "incomplete gamma continued fraction", terms: 10_000 })
}

fn series(beta: f64, z: f64, pol: &TruncationPolicy) -> Result<f64> {
    if z == 0.0 {
        return Ok(recip_gamma(beta));
    }
    let az = z.abs();
    let lnz = az.ln();
    let mut sum = KahanSum::default();
    let mut stop = StopRule::default();
    for n in 0..pol.max_terms {
        let arg = n as f64 + beta;
        let mag = if n as f64 * lnz < 700.0 && arg < 170.0 {
            az.powi(n as i32) * recip_gamma(arg)
        } else {
            (n as f64 * lnz - ln_gamma(arg)).exp() * gamma_sign(arg)
        };
        let term = if z < 0.0 && n % 2 == 1 { -mag } else { mag };
        sum.add(term);
        if !sum.value().is_finite() {
            return Err(Error::Overflow { what: "Miller-Ross series", x: z });
        }
        // terms sitting on Γ poles are exact zeros and must not end the sum early
        if arg <= 0.0 && arg == arg.floor() {
            continue;
        }
        if stop.update(term.abs(), pol.threshold(sum.value())) {
            return Ok(sum.value());
        }
    }
    Err(Error::NoConvergence { what: "Miller-Ross series", terms: pol.max_terms })
}

/// E_{1,β}(-x) = (1/Γ(β))·[1 - (x/β)∫₀¹ exp(-x(1 - w^{1/β})) dw] for β > 0.
fn integral_form(beta: f64, x: f64) -> Result<f64> {
    let inv = 1.0 / beta;
    let integral = quad::integrate(|w| (-x * (1.0 - w.powf(inv))).exp(), 0.0, 1.0, 0.0, 1e-15)?;
    Ok(recip_gamma(beta) * (1.0 - x * inv * integral))
}
