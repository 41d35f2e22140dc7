//! Function representations: exact generalized power sums, uniform-grid
//! samples, and smooth functions with exact derivatives.

use crate::error::{Error, Result};
use crate::policy::KahanSum;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// Exponents closer than this are merged into one term.
pub const EXPONENT_MERGE_TOL: f64 = 1e-12;

/// Σ c_i (t − a)^{β_i} with strictly increasing exponents β_i > −1.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSum {
    base: f64,
    terms: Vec<(f64, f64)>,
}

impl PowerSum {
    /// Build from `(coef, expo)` pairs; duplicate exponents are merged and zero
    /// coefficients dropped.
    pub fn new<I: IntoIterator<Item = (f64, f64)>>(base: f64, terms: I) -> Result<Self> {
        if !base.is_finite() {
            return Err(Error::InvalidParams(format!("power sum base {base} is not finite")));
        }
        let mut raw: Vec<(f64, f64)> = terms.into_iter().collect();
        for &(c, e) in &raw {
            if !c.is_finite() || !e.is_finite() {
                return Err(Error::InvalidParams(format!("non-finite power sum term ({c}, {e})")));
            }
            if e <= -1.0 && c != 0.0 {
                return Err(Error::Domain(format!("exponent {e} is not integrable at the base point")));
            }
        }
        raw.sort_by(|x, y| x.1.total_cmp(&y.1));
        let mut terms: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        let mut i = 0;
        while i < raw.len() {
            let expo = raw[i].1;
            let mut acc = KahanSum::default();
            while i < raw.len() && raw[i].1 - expo <= EXPONENT_MERGE_TOL {
                acc.add(raw[i].0);
                i += 1;
            }
            let c = acc.value();
            if c != 0.0 {
                terms.push((c, expo));
            }
        }
        Ok(PowerSum { base, terms })
    }

    pub fn zero(base: f64) -> Self {
        PowerSum { base, terms: Vec::new() }
    }

    pub fn constant(base: f64, c: f64) -> Self {
        PowerSum::new(base, [(c, 0.0)]).expect("constant term is valid")
    }

    pub fn monomial(base: f64, coef: f64, expo: f64) -> Result<Self> {
        PowerSum::new(base, [(coef, expo)])
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    /// `(coef, expo)` pairs in increasing exponent order.
    pub fn terms(&self) -> &[(f64, f64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Σ c_i (t − a)^{β_i}.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let x = t - self.base;
        if x < 0.0 {
            return Err(Error::Domain(format!("t = {t} lies before the base point {}", self.base)));
        }
        if x == 0.0 {
            return self.value_at_base();
        }
        let mut acc = KahanSum::default();
        for &(c, e) in &self.terms {
            acc.add(c * x.powf(e));
        }
        Ok(acc.value())
    }

    /// f(a): the constant coefficient, or `SingularAtBase` if a negative power is present.
    pub fn value_at_base(&self) -> Result<f64> {
        let mut v = 0.0;
        for &(c, e) in &self.terms {
            if e < 0.0 {
                return Err(Error::SingularAtBase(self.base));
            }
            if e.abs() <= EXPONENT_MERGE_TOL {
                v += c;
            }
        }
        Ok(v)
    }

    pub fn scale(&self, k: f64) -> PowerSum {
        if k == 0.0 {
            return PowerSum::zero(self.base);
        }
        PowerSum { base: self.base, terms: self.terms.iter().map(|&(c, e)| (c * k, e)).collect() }
    }

    fn check_base(&self, other: &PowerSum) -> Result<()> {
        if self.base != other.base {
            return Err(Error::InvalidParams(format!(
                "power sums expanded about different points ({} and {})",
                self.base, other.base
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &PowerSum) -> Result<PowerSum> {
        self.check_base(other)?;
        PowerSum::new(self.base, self.terms.iter().chain(other.terms.iter()).copied())
    }

    pub fn sub(&self, other: &PowerSum) -> Result<PowerSum> {
        self.add(&other.scale(-1.0))
    }

    /// Pointwise product (exponents add).
    pub fn mul(&self, other: &PowerSum) -> Result<PowerSum> {
        self.check_base(other)?;
        let mut out = Vec::with_capacity(self.terms.len() * other.terms.len());
        for &(c1, e1) in &self.terms {
            for &(c2, e2) in &other.terms {
                out.push((c1 * c2, e1 + e2));
            }
        }
        PowerSum::new(self.base, out)
    }

    /// Ordinary first derivative. Constant terms vanish.
    pub fn derivative(&self) -> Result<PowerSum> {
        let terms = self.terms.iter().filter(|(_, e)| e.abs() > EXPONENT_MERGE_TOL).map(|&(c, e)| (c * e, e - 1.0));
        PowerSum::new(self.base, terms)
    }

    /// k-th derivative at t (falling-factorial power rule).
    pub fn derivative_at(&self, k: usize, t: f64) -> Result<f64> {
        let x = t - self.base;
        if x < 0.0 {
            return Err(Error::Domain(format!("t = {t} lies before the base point {}", self.base)));
        }
        let mut acc = KahanSum::default();
        for &(c, e) in &self.terms {
            let mut ff = 1.0;
            for j in 0..k {
                ff *= e - j as f64;
            }
            if ff == 0.0 {
                continue;
            }
            if x == 0.0 && e - (k as f64) < 0.0 {
                return Err(Error::SingularAtBase(self.base));
            }
            acc.add(c * ff * x.powf(e - k as f64));
        }
        Ok(acc.value())
    }

    /// Largest absolute value on an `n`-point uniform grid over `[lo, hi]`.
    pub fn max_abs_on(&self, lo: f64, hi: f64, n: usize) -> Result<f64> {
        let mut m: f64 = 0.0;
        for j in 0..n {
            let t = lo + (hi - lo) * j as f64 / (n - 1).max(1) as f64;
            m = m.max(self.eval(t)?.abs());
        }
        Ok(m)
    }
}

impl fmt::Display for PowerSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let var = if self.base == 0.0 { "t".to_string() } else { format!("(t-{})", self.base) };
        for (i, &(c, e)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c:e}*{var}^{e}")?;
        }
        Ok(())
    }
}

/// Values of a function on the uniform grid t_j = a + j·h, h = (b − a)/(n − 1).
///
/// Outputs of singular operators may carry a non-finite value at t_0; such
/// grids are marked by [`SampledFn::singular_at_base`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFn {
    a: f64,
    b: f64,
    values: Vec<f64>,
    singular_at_base: bool,
}

impl SampledFn {
    pub fn new(a: f64, b: f64, values: Vec<f64>) -> Result<Self> {
        Self::check_grid(a, b, values.len())?;
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("sampled value at index {j} is not finite")));
        }
        Ok(SampledFn { a, b, values, singular_at_base: false })
    }

    /// Grid whose first value is a flagged non-finite sentinel.
    pub fn with_singular_base(a: f64, b: f64, mut values: Vec<f64>) -> Result<Self> {
        Self::check_grid(a, b, values.len())?;
        if let Some(j) = values.iter().skip(1).position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("sampled value at index {} is not finite", j + 1)));
        }
        values[0] = f64::NAN;
        Ok(SampledFn { a, b, values, singular_at_base: true })
    }

    fn check_grid(a: f64, b: f64, n: usize) -> Result<()> {
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(Error::InvalidParams(format!("grid needs finite a < b, got [{a}, {b}]")));
        }
        if n < 2 {
            return Err(Error::InvalidParams(format!("grid needs at least 2 points, got {n}")));
        }
        Ok(())
    }

    /// Sample `f` at the n grid points of `[a, b]`.
    pub fn from_fn<F: Fn(f64) -> Result<f64>>(a: f64, b: f64, n: usize, f: F) -> Result<Self> {
        Self::check_grid(a, b, n)?;
        let h = (b - a) / (n - 1) as f64;
        let values = (0..n).map(|j| f(grid_point(a, b, h, j, n))).collect::<Result<Vec<_>>>()?;
        SampledFn::new(a, b, values)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn h(&self) -> f64 {
        (self.b - self.a) / (self.n() - 1) as f64
    }

    pub fn t(&self, j: usize) -> f64 {
        grid_point(self.a, self.b, self.h(), j, self.n())
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n()).map(|j| self.t(j)).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn singular_at_base(&self) -> bool {
        self.singular_at_base
    }

    pub fn same_grid(&self, other: &SampledFn) -> bool {
        self.a == other.a && self.b == other.b && self.n() == other.n()
    }

    /// c1·self + c2·other on a shared grid.
    pub fn lin_comb(&self, c1: f64, other: &SampledFn, c2: f64) -> Result<SampledFn> {
        if !self.same_grid(other) {
            return Err(Error::InvalidParams("sampled functions live on different grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(x, y)| c1 * x + c2 * y).collect();
        Ok(SampledFn { a: self.a, b: self.b, values, singular_at_base: self.singular_at_base || other.singular_at_base })
    }

    /// Largest |value| over grid points with t ≥ `from`, ignoring a flagged base value.
    pub fn max_abs_from(&self, from: f64) -> f64 {
        let start = usize::from(self.singular_at_base);
        (start..self.n()).filter(|&j| self.t(j) >= from - 1e-12).map(|j| self.values[j].abs()).fold(0.0, f64::max)
    }
}

fn grid_point(a: f64, b: f64, h: f64, j: usize, n: usize) -> f64 {
    if j + 1 == n {
        b
    } else {
        a + j as f64 * h
    }
}

type DerivFn = dyn Fn(usize, f64) -> f64 + Send + Sync;

/// A function with exact derivatives of every order up to `max_order`.
#[derive(Clone)]
pub struct SmoothFn {
    deriv: Arc<DerivFn>,
    max_order: Option<usize>,
}

impl fmt::Debug for SmoothFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothFn").field("max_order", &self.max_order).finish_non_exhaustive()
    }
}

impl SmoothFn {
    /// `deriv(k, t)` must return the k-th derivative; `deriv(0, t)` is the value.
    pub fn new<F: Fn(usize, f64) -> f64 + Send + Sync + 'static>(deriv: F, max_order: Option<usize>) -> Self {
        SmoothFn { deriv: Arc::new(deriv), max_order }
    }

    /// scale·e^{rate·t}
    pub fn exp(rate: f64, scale: f64) -> Self {
        SmoothFn::new(move |k, t| scale * rate.powi(k as i32) * (rate * t).exp(), None)
    }

    /// Σ c_i t^i
    pub fn poly(coeffs: Vec<f64>) -> Self {
        SmoothFn::new(
            move |k, t| {
                // Horner over the differentiated coefficients
                let mut h = 0.0;
                for (i, &c) in coeffs.iter().enumerate().skip(k).rev() {
                    let mut ff = 1.0;
                    for j in 0..k {
                        ff *= (i - j) as f64;
                    }
                    h = h * t + c * ff;
                }
                h
            },
            None,
        )
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.deriv)(0, t)
    }

    pub fn deriv(&self, k: usize, t: f64) -> Result<f64> {
        if let Some(m) = self.max_order {
            if k > m {
                return Err(Error::InvalidParams(format!("derivative of order {k} not available (max {m})")));
            }
        }
        Ok((self.deriv)(k, t))
    }

    pub fn max_order(&self) -> Option<usize> {
        self.max_order
    }

    pub fn sample(&self, a: f64, b: f64, n: usize) -> Result<SampledFn> {
        SampledFn::from_fn(a, b, n, |t| Ok(self.eval(t)))
    }

    /// Samples of the k-th derivative.
    pub fn sample_deriv(&self, k: usize, a: f64, b: f64, n: usize) -> Result<SampledFn> {
        SampledFn::from_fn(a, b, n, |t| self.deriv(k, t))
    }
}

impl From<&PowerSum> for SmoothFn {
    fn from(p: &PowerSum) -> Self {
        let p = p.clone();
        SmoothFn::new(move |k, t| p.derivative_at(k, t).unwrap_or(f64::NAN), None)
    }
}

/// Anything that can be sampled on a grid.
pub trait Evaluate {
    fn value(&self, t: f64) -> Result<f64>;
}

impl Evaluate for PowerSum {
    fn value(&self, t: f64) -> Result<f64> {
        self.eval(t)
    }
}

impl Evaluate for SmoothFn {
    fn value(&self, t: f64) -> Result<f64> {
        Ok(self.eval(t))
    }
}

/// Pointwise evaluation of `f` on the uniform n-point grid over `[a, b]`.
pub fn sample<F: Evaluate + ?Sized>(f: &F, a: f64, b: f64, n: usize) -> Result<SampledFn> {
    SampledFn::from_fn(a, b, n, |t| f.value(t))
}

fn one() -> f64 {
    1.0
}

/// Function literal accepted in configuration files and on the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FnLiteral {
    /// Σ c (t − base)^β, terms given as `[coef, expo]` pairs.
    PowerSum {
        #[serde(default)]
        base: f64,
        terms: Vec<(f64, f64)>,
    },
    /// scale·e^{rate·t}
    Exp {
        rate: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    /// Σ coeffs[i]·t^i
    Poly { coeffs: Vec<f64> },
}

impl FnLiteral {
    pub fn to_smooth(&self) -> Result<SmoothFn> {
        Ok(match self {
            FnLiteral::PowerSum { base, terms } => SmoothFn::from(&PowerSum::new(*base, terms.iter().copied())?),
            FnLiteral::Exp { rate, scale } => SmoothFn::exp(*rate, *scale),
            FnLiteral::Poly { coeffs } => SmoothFn::poly(coeffs.clone()),
        })
    }

    /// Exact (or, for `exp`, Taylor-truncated to double precision on
    /// `[base, base + horizon]`) power-sum form about `base`.
    pub fn to_powersum(&self, base: f64, horizon: f64) -> Result<PowerSum> {
        match self {
            FnLiteral::PowerSum { base: b, terms } => {
                if *b != base {
                    return Err(Error::InvalidParams(format!(
                        "power sum literal is expanded about {b}, operator base is {base}"
                    )));
                }
                PowerSum::new(base, terms.iter().copied())
            }
            FnLiteral::Poly { coeffs } => {
                // re-expand Σ c_i t^i about the base point
                let mut shifted = vec![0.0; coeffs.len()];
                for (i, &c) in coeffs.iter().enumerate() {
                    let mut binom = 1.0;
                    for (j, s) in shifted.iter_mut().enumerate().take(i + 1) {
                        if j > 0 {
                            binom *= (i + 1 - j) as f64 / j as f64;
                        }
                        *s += c * binom * base.powi((i - j) as i32);
                    }
                }
                PowerSum::new(base, shifted.into_iter().enumerate().map(|(j, c)| (c, j as f64)))
            }
            FnLiteral::Exp { rate, scale } => {
                let x = (rate * horizon).abs();
                let mut terms = vec![(scale * (rate * base).exp(), 0.0)];
                let mut mag = 1.0;
                let mut majorant = 1.0;
                // stop once the remaining Taylor mass is below double precision
                for n in 1..=400 {
                    mag *= x / n as f64;
                    majorant += mag;
                    let c = terms[n - 1].0 * rate / n as f64;
                    terms.push((c, n as f64));
                    if n as f64 > x && mag <= 1e-18 * majorant {
                        break;
                    }
                }
                PowerSum::new(base, terms)
            }
        }
    }

    /// Value at t.
    pub fn eval(&self, t: f64) -> Result<f64> {
        Ok(self.to_smooth()?.eval(t))
    }
}
