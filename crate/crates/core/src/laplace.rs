//! Laplace-domain transfer functions of the AB operators and fixed-Talbot inversion.

use crate::ab_ops::ABParams;
use crate::error::{Error, Result};
use crate::funcmodel::FnLiteral;
use crate::specialfn::gamma;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// Default number of Talbot nodes. Roundoff in the contour sum grows like
/// e^{2m/5}·ε, so double precision tops out near m ≈ 24–32.
pub const TALBOT_DEFAULT_NODES: usize = 24;
pub const TALBOT_MIN_NODES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransferKind {
    Abr,
    Abc,
    Rl,
    User,
}

type Map = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// A transform F(s), analytic on Re s > `abscissa`.
#[derive(Clone)]
pub struct TransferFn {
    kind: TransferKind,
    abscissa: f64,
    map: Map,
}

impl fmt::Debug for TransferFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransferFn").field("kind", &self.kind).field("abscissa", &self.abscissa).finish()
    }
}

impl TransferFn {
    pub fn new(kind: TransferKind, abscissa: f64, map: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static) -> Self {
        TransferFn { kind, abscissa, map: Arc::new(map) }
    }

    pub fn kind(&self) -> TransferKind {
        self.kind
    }

    /// Real part beyond which the transform is analytic.
    pub fn abscissa(&self) -> f64 {
        self.abscissa
    }

    /// Evaluate with the domain check Re s > max(0, abscissa).
    pub fn eval(&self, s: Complex64) -> Result<Complex64> {
        if !(s.re > self.abscissa.max(0.0)) {
            return Err(Error::Domain(format!("transform evaluated at Re(s) = {} outside its half-plane", s.re)));
        }
        Ok((self.map)(s))
    }

    /// Analytic continuation used on the Talbot contour; no domain check.
    pub fn eval_unchecked(&self, s: Complex64) -> Complex64 {
        (self.map)(s)
    }

    /// Pointwise product, e.g. a transfer function times a forcing transform.
    pub fn mul(&self, other: &TransferFn) -> TransferFn {
        let (a, b) = (self.map.clone(), other.map.clone());
        TransferFn { kind: TransferKind::User, abscissa: self.abscissa.max(other.abscissa), map: Arc::new(move |s| a(s) * b(s)) }
    }

    pub fn invert(&self, t: f64, m: usize) -> Result<f64> {
        talbot_invert_shifted(|s| self.eval_unchecked(s), t, m, self.abscissa.max(0.0))
    }
}

/// B/(1−α)·s^α/(s^α + λ).
pub fn abr_transfer(p: &ABParams) -> TransferFn {
    let (alpha, lambda, k) = (p.alpha(), p.lambda(), p.prefactor());
    TransferFn::new(TransferKind::Abr, 0.0, move |s| {
        let sa = s.powf(alpha);
        k * sa / (sa + lambda)
    })
}

/// B/(1−α)·s^{α−1}/(s^α + λ); multiplies s·f̂ − f(0).
pub fn abc_transfer(p: &ABParams) -> TransferFn {
    let (alpha, lambda, k) = (p.alpha(), p.lambda(), p.prefactor());
    TransferFn::new(TransferKind::Abc, 0.0, move |s| {
        let sa = s.powf(alpha);
        k * sa / (s * (sa + lambda))
    })
}

/// s^{−μ}, the transform of RL I^μ.
pub fn rl_integral_transfer(mu: f64) -> TransferFn {
    TransferFn::new(TransferKind::Rl, 0.0, move |s| s.powf(-mu))
}

/// Transform of a function literal in the shifted variable t − a.
pub fn literal_transform(f: &FnLiteral, base: f64, horizon: f64) -> Result<TransferFn> {
    if let FnLiteral::Exp { rate, scale } = *f {
        let c = scale * (rate * base).exp();
        return Ok(TransferFn::new(TransferKind::User, rate, move |s| c / (s - rate)));
    }
    let ps = f.to_powersum(base, horizon)?;
    let terms = ps.terms().iter().map(|&(c, e)| Ok((c * gamma(e + 1.0)?, -e - 1.0))).collect::<Result<Vec<_>>>()?;
    Ok(TransferFn::new(TransferKind::User, 0.0, move |s| terms.iter().map(|&(c, e)| c * s.powf(e)).sum()))
}

/// Fixed-Talbot inversion of F at t > 0 with m nodes.
pub fn talbot_invert<F: Fn(Complex64) -> Complex64>(f: F, t: f64, m: usize) -> Result<f64> {
    talbot_invert_shifted(f, t, m, 0.0)
}

/// Fixed-Talbot inversion on the contour translated right by `shift`, so that
/// singularities with real part below `shift` are enclosed.
pub fn talbot_invert_shifted<F: Fn(Complex64) -> Complex64>(f: F, t: f64, m: usize, shift: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("Talbot inversion needs t > 0, got {t}")));
    }
    if m < TALBOT_MIN_NODES {
        return Err(Error::InvalidParams(format!("Talbot needs at least {TALBOT_MIN_NODES} nodes, got {m}")));
    }
    let r = 2.0 * m as f64 / (5.0 * t);
    let first = 0.5 * (f(Complex64::new(r + shift, 0.0)) * (r * t).exp()).re;
    let mut sum = first;
    let mut biggest = first.abs();
    let mut last = 0.0f64;
    for k in 1..m {
        let theta = k as f64 * PI / m as f64;
        let cot = theta.cos() / theta.sin();
        let s = Complex64::new(r * theta * cot, r * theta);
        let sigma = theta + (theta * cot - 1.0) * cot;
        let term = ((s * t).exp() * f(s + shift) * Complex64::new(1.0, sigma)).re;
        if !term.is_finite() {
            return Err(Error::Oscillation(t));
        }
        biggest = biggest.max(term.abs());
        last = term.abs();
        sum += term;
    }
    if !sum.is_finite() || last > 1e-6 * biggest.max(f64::MIN_POSITIVE) {
        return Err(Error::Oscillation(t));
    }
    Ok(r / m as f64 * sum * (shift * t).exp())
}

/// Invert at every time in `ts`, in parallel when the feature is on.
pub fn talbot_invert_many<F>(f: F, ts: &[f64], m: usize, shift: f64) -> Result<Vec<f64>>
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        ts.par_iter().map(|&t| talbot_invert_shifted(&f, t, m, shift)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        ts.iter().map(|&t| talbot_invert_shifted(&f, t, m, shift)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ab_ops::abr_derivative_series;
    use crate::funcmodel::PowerSum;
    use crate::policy::TruncationPolicy;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn known_pairs() {
        let m = TALBOT_DEFAULT_NODES;
        assert!((talbot_invert(|s| 1.0 / (s * s), 1.5, m).unwrap() - 1.5).abs() < 1e-8);
        assert!((talbot_invert(|s| 1.0 / (s + 1.0), 1.0, m).unwrap() - (-1.0f64).exp()).abs() < 1e-8);
        let want = 1.0 / gamma(1.5).unwrap();
        assert!((talbot_invert(|s| s.powf(-1.5), 1.0, m).unwrap() - want).abs() < 1e-7);
    }

    #[test]
    fn shifted_contour_encloses_growth() {
        let got = talbot_invert_shifted(|s| 1.0 / (s - 3.0), 2.0, 24, 3.0).unwrap();
        assert!((got / 6.0f64.exp() - 1.0).abs() < 1e-9);
        let via = literal_transform(&FnLiteral::Exp { rate: 3.0, scale: 1.0 }, 0.0, 2.0).unwrap();
        assert!((via.invert(2.0, 24).unwrap() / 6.0f64.exp() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn transfer_values() {
        let p = ABParams::unit(0.5).unwrap();
        assert!((abr_transfer(&p).eval(c(4.0)).unwrap().re - 4.0 / 3.0).abs() < 1e-15);
        assert!((abr_transfer(&p).eval(c(1.0)).unwrap().re - 1.0).abs() < 1e-15);
        assert!((abc_transfer(&p).eval(c(1.0)).unwrap().re - 1.0).abs() < 1e-15);
        assert!(abr_transfer(&p).eval(c(-1.0)).is_err());
        assert!(abr_transfer(&p).eval(Complex64::new(0.0, 2.0)).is_err());
    }

    #[test]
    fn abr_of_square_matches_series() {
        let p = ABParams::unit(0.5).unwrap();
        let (s, _) =
            abr_derivative_series(&PowerSum::monomial(0.0, 1.0, 2.0).unwrap(), &p, &TruncationPolicy::default(), 2.0).unwrap();
        let tf = abr_transfer(&p);
        for j in 0..20 {
            let t = 0.1 + 0.1 * j as f64;
            let got = talbot_invert(|z| tf.eval_unchecked(z) * 2.0 / (z * z * z), t, 24).unwrap();
            assert!((got - s.eval(t).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn too_few_nodes_and_bad_time() {
        assert!(matches!(talbot_invert(|s| 1.0 / s, 1.0, 8), Err(Error::InvalidParams(_))));
        assert!(matches!(talbot_invert(|s| 1.0 / s, 0.0, 24), Err(Error::Domain(_))));
    }

    #[test]
    fn node_count_tradeoff() {
        // more nodes is not better in double precision
        let err = |m| (talbot_invert(|s| s.powf(-1.5), 1.0, m).unwrap() - 1.0 / gamma(1.5).unwrap()).abs();
        assert!(err(24) < 1e-10);
        assert!(err(64) > err(24));
    }
}
