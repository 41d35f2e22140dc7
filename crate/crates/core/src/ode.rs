//! Linear and nonlinear fractional ODEs in the AB model, solved by Laplace methods.
//!
//! Factor form: D^α f − A·f = g with D the ABR (ODE2) or ABC (ODE5) derivative.
//! With k = (1−α)A/B and c = kα/((1−k)(1−α)) the solution is
//! f = (1−α)/(B(1−k))·g + 1/(A(1−k))·∫ ∂E_α(c(t−x)^α) g(x) dx [+ f(0)/(1−k)·E_α(c t^α)].
//! k = 1 (ODE1, ODE4) has the closed form through the RL derivative of g.

use crate::ab_ops::{
    ab_integral_grid, abc_derivative_sampled_with_initial, abr_derivative_kernel, abr_derivative_series, ABParams, Normalization,
};
use crate::convolution::{ml_convolve, MlKernel};
use crate::error::{Error, Result};
use crate::funcmodel::{FnLiteral, PowerSum, SampledFn};
use crate::laplace::{literal_transform, talbot_invert_many};
use crate::policy::TruncationPolicy;
use crate::rl_ops::{rl_derivative_grid, rl_derivative_power};
use crate::specialfn::{gamma, mittag_leffler2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::Mutex;

const DEGENERATE_K_TOL: f64 = 1e-12;

#[allow(clippy::upper_case_acronyms)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OdeFamily {
    ODE1,
    ODE2,
    ODE4,
    ODE5,
    SEQ3,
    SEQ6,
}

impl OdeFamily {
    pub fn is_caputo(self) -> bool {
        matches!(self, OdeFamily::ODE4 | OdeFamily::ODE5 | OdeFamily::SEQ6)
    }
}

/// A scalar or a per-factor list in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    fn expand(&self, len: usize, what: &str) -> Result<Vec<f64>> {
        match self {
            OneOrMany::One(x) => Ok(vec![*x; len]),
            OneOrMany::Many(v) if v.len() == len => Ok(v.clone()),
            OneOrMany::Many(v) => Err(Error::InvalidParams(format!("{what}: expected {len} entries, got {}", v.len()))),
        }
    }

    fn len(&self) -> usize {
        match self {
            OneOrMany::One(_) => 1,
            OneOrMany::Many(v) => v.len(),
        }
    }
}

impl Default for OneOrMany {
    fn default() -> Self {
        OneOrMany::One(0.0)
    }
}

/// Uniform grid a = t_0 < … < t_{n−1} = b.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub a: f64,
    pub b: f64,
    pub n: usize,
}

impl Grid {
    pub fn times(&self) -> Result<Vec<f64>> {
        Ok(SampledFn::new(self.a, self.b, vec![0.0; self.n])?.times())
    }

    fn sample(&self, f: &FnLiteral) -> Result<SampledFn> {
        SampledFn::from_fn(self.a, self.b, self.n, |t| f.eval(t))
    }
}

/// One linear factor D^α − A, with its initial value when D is of Caputo type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeFactor {
    pub params: ABParams,
    pub coeff: f64,
    pub f0: f64,
    pub caputo: bool,
}

impl OdeFactor {
    /// k = (1−α)A/B
    pub fn k(&self) -> f64 {
        self.coeff / self.params.prefactor()
    }

    /// Kernel coefficient kα/((1−k)(1−α)).
    pub fn c(&self) -> f64 {
        let (k, a) = (self.k(), self.params.alpha());
        k * a / ((1.0 - k) * (1.0 - a))
    }

    pub fn is_degenerate(&self) -> bool {
        (1.0 - self.k()).abs() < DEGENERATE_K_TOL
    }
}

/// Linear ODE of one of the families ODE1–ODE6 as read from a configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearODESpec {
    pub family: OdeFamily,
    pub alpha: OneOrMany,
    /// Coefficients A of each factor; implied by the family for ODE1/ODE4.
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<OneOrMany>,
    pub g: FnLiteral,
    /// Initial values of the Caputo families, outermost factor first.
    #[serde(default)]
    pub f0: OneOrMany,
    #[serde(default)]
    pub norm: Normalization,
    pub grid: Grid,
}

impl LinearODESpec {
    /// Factors outermost first.
    pub fn factors(&self) -> Result<Vec<OdeFactor>> {
        let caputo = self.family.is_caputo();
        let len = match self.family {
            OdeFamily::SEQ3 | OdeFamily::SEQ6 => self.alpha.len().max(self.coeffs.as_ref().map_or(1, |c| c.len())),
            _ => 1,
        };
        if len == 0 {
            return Err(Error::InvalidParams("sequential ODE needs at least one factor".into()));
        }
        let alphas = self.alpha.expand(len, "alpha")?;
        let f0s = if caputo { self.f0.expand(len, "f0")? } else { vec![0.0; len] };
        let mut out = Vec::with_capacity(len);
        for (i, (&alpha, &f0)) in alphas.iter().zip(&f0s).enumerate() {
            let params = ABParams::new(alpha, self.grid.a, self.norm)?;
            let coeff = match self.family {
                OdeFamily::ODE1 | OdeFamily::ODE4 => params.prefactor(),
                _ => {
                    let c = self.coeffs.as_ref().ok_or_else(|| Error::InvalidParams("missing coefficient A".into()))?;
                    c.expand(len, "A")?[i]
                }
            };
            if !coeff.is_finite() || !f0.is_finite() {
                return Err(Error::InvalidParams("non-finite coefficient or initial value".into()));
            }
            out.push(OdeFactor { params, coeff, f0, caputo });
        }
        Ok(out)
    }
}

/// Solution on the grid, with the exact power-sum form where one exists.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSolution {
    pub f: SampledFn,
    pub exact: Option<PowerSum>,
    /// f(0+) − f(0) for ODE5, when the formula's limit differs from the declared initial value.
    pub initial_gap: Option<f64>,
}

/// Solve one factor on grid forcing.
fn solve_factor(fac: &OdeFactor, g: &SampledFn, pol: &TruncationPolicy) -> Result<SampledFn> {
    let p = &fac.params;
    let alpha = p.alpha();
    if fac.is_degenerate() {
        return degenerate_grid(fac, g);
    }
    if fac.coeff == 0.0 {
        let f = ab_integral_grid(g, p)?;
        return SampledFn::new(g.a(), g.b(), f.values().iter().map(|v| v + fac.f0).collect());
    }
    let k = fac.k();
    let c = fac.c();
    let conv = ml_convolve(MlKernel::Derivative { alpha, c }, g.values(), g.h(), pol)?;
    let w_g = (1.0 - alpha) / (p.b() * (1.0 - k));
    let w_conv = 1.0 / (fac.coeff * (1.0 - k));
    let mut values: Vec<f64> = g.values().iter().zip(&conv).map(|(gv, cv)| w_g * gv + w_conv * cv).collect();
    if fac.caputo && fac.f0 != 0.0 {
        let w0 = fac.f0 / (1.0 - k);
        for (j, v) in values.iter_mut().enumerate() {
            let x = g.t(j) - g.a();
            *v += w0 * mittag_leffler2(alpha, 1.0, c * x.powf(alpha), pol)?;
        }
    }
    SampledFn::new(g.a(), g.b(), values)
}

/// k = 1 on grid forcing; the δ(t) term is dropped (vanishing initial memory).
fn degenerate_grid(fac: &OdeFactor, g: &SampledFn) -> Result<SampledFn> {
    let p = &fac.params;
    let alpha = p.alpha();
    let b = p.b();
    let d = rl_derivative_grid(g, alpha)?;
    let wd = -(1.0 - alpha) * (1.0 - alpha) / (alpha * b);
    let wg = -(1.0 - alpha) / b;
    let w0 = if fac.caputo { (alpha - 1.0) / (alpha * gamma(1.0 - alpha)?) * fac.f0 } else { 0.0 };
    let mut values = Vec::with_capacity(g.n());
    for j in 0..g.n() {
        let x = g.t(j) - g.a();
        let layer = if w0 != 0.0 { w0 * x.powf(-alpha) } else { 0.0 };
        values.push(wd * d.values()[j] + wg * g.values()[j] + layer);
    }
    if d.singular_at_base() || w0 != 0.0 {
        SampledFn::with_singular_base(g.a(), g.b(), values)
    } else {
        SampledFn::new(g.a(), g.b(), values)
    }
}

/// k = 1 on power-sum forcing, exactly.
fn degenerate_exact(fac: &OdeFactor, g: &PowerSum) -> Result<PowerSum> {
    let p = &fac.params;
    let alpha = p.alpha();
    let b = p.b();
    let mut f =
        rl_derivative_power(g, alpha)?.scale(-(1.0 - alpha) * (1.0 - alpha) / (alpha * b)).add(&g.scale(-(1.0 - alpha) / b))?;
    if fac.caputo && fac.f0 != 0.0 {
        let w0 = (alpha - 1.0) / (alpha * gamma(1.0 - alpha)?) * fac.f0;
        f = f.add(&PowerSum::monomial(g.base(), w0, -alpha)?)?;
    }
    Ok(f)
}

/// Solve a linear ODE of any family on its grid.
pub fn solve_linear(spec: &LinearODESpec, pol: &TruncationPolicy) -> Result<LinearSolution> {
    let factors = spec.factors()?;
    let grid = spec.grid;
    match spec.family {
        OdeFamily::ODE1 | OdeFamily::ODE4 => {
            let g = spec.g.to_powersum(grid.a, grid.b - grid.a)?;
            let exact = degenerate_exact(&factors[0], &g)?;
            let values = grid.times()?.into_iter().map(|t| if t > grid.a { exact.eval(t) } else { exact.value_at_base() });
            let f = match values.collect::<Result<Vec<_>>>() {
                Ok(v) => SampledFn::new(grid.a, grid.b, v)?,
                Err(Error::SingularAtBase(_)) => {
                    let mut v = vec![f64::NAN];
                    for t in grid.times()?.into_iter().skip(1) {
                        v.push(exact.eval(t)?);
                    }
                    SampledFn::with_singular_base(grid.a, grid.b, v)?
                }
                Err(e) => return Err(e),
            };
            Ok(LinearSolution { f, exact: Some(exact), initial_gap: None })
        }
        OdeFamily::ODE2 | OdeFamily::ODE5 => {
            let fac = &factors[0];
            if fac.is_degenerate() {
                return Err(Error::DegenerateK(fac.k()));
            }
            let g = grid.sample(&spec.g)?;
            let f = solve_factor(fac, &g, pol)?;
            let initial_gap = if fac.caputo {
                let gap = f.values()[0] - fac.f0;
                if gap.abs() > 1e-12 * fac.f0.abs().max(1.0) {
                    log::warn!("solution starts at f(0+) = {} but f(0) = {} was declared", f.values()[0], fac.f0);
                    Some(gap)
                } else {
                    None
                }
            } else {
                None
            };
            Ok(LinearSolution { f, exact: None, initial_gap })
        }
        OdeFamily::SEQ3 | OdeFamily::SEQ6 => {
            let g = grid.sample(&spec.g)?;
            Ok(LinearSolution { f: solve_sequential(&factors, &g, pol)?, exact: None, initial_gap: None })
        }
    }
}

/// Solve (D_1 − A_1)(D_2 − A_2)…f = g by peeling factors from the outside in.
/// A factor with k = 1 falls back to the RL closed form.
pub fn solve_sequential(factors: &[OdeFactor], g: &SampledFn, pol: &TruncationPolicy) -> Result<SampledFn> {
    let mut j = g.clone();
    for fac in factors {
        j = solve_factor(fac, &j, pol)?;
    }
    Ok(j)
}

/// Apply D − A by quadrature; Caputo factors use the declared initial value.
fn apply_factor(fac: &OdeFactor, f: &SampledFn, pol: &TruncationPolicy) -> Result<SampledFn> {
    let d = if fac.caputo {
        abc_derivative_sampled_with_initial(f, fac.f0, &fac.params, pol)?
    } else {
        abr_derivative_kernel(f, &fac.params, pol)?
    };
    d.lin_comb(1.0, f, -fac.coeff)
}

fn max_interior(values: impl Iterator<Item = (f64, f64)>, from: f64) -> f64 {
    values.filter(|&(t, _)| t >= from).map(|(_, r)| r.abs()).fold(0.0, f64::max)
}

/// Max residual of the defining equation over t ≥ a + (b−a)/20.
///
/// Exact solutions are differentiated by the series path, grid solutions by
/// kernel quadrature.
pub fn linear_residual(spec: &LinearODESpec, sol: &LinearSolution, pol: &TruncationPolicy) -> Result<f64> {
    let factors = spec.factors()?;
    let grid = spec.grid;
    let from = grid.a + (grid.b - grid.a) / 20.0;
    if let Some(exact) = &sol.exact {
        let fac = &factors[0];
        let p = &fac.params;
        let g = spec.g.to_powersum(grid.a, grid.b - grid.a)?;
        let (d, _) = abr_derivative_series(exact, p, pol, grid.b)?;
        let lhs = d.sub(&exact.scale(fac.coeff))?.sub(&g)?;
        let mut worst = 0.0f64;
        for t in grid.times()?.into_iter().filter(|&t| t >= from) {
            let mut r = lhs.eval(t)?;
            if fac.caputo {
                let x = (t - grid.a).powf(p.alpha());
                r -= p.prefactor() * fac.f0 * mittag_leffler2(p.alpha(), 1.0, -p.lambda() * x, pol)?;
            }
            worst = worst.max(r.abs());
        }
        return Ok(worst);
    }
    let mut r = sol.f.clone();
    for fac in factors.iter().rev() {
        r = apply_factor(fac, &r, pol)?;
    }
    let g = grid.sample(&spec.g)?;
    Ok(max_interior(r.times().into_iter().zip(r.values().iter().zip(g.values()).map(|(a, b)| a - b)), from))
}

/// Independent solution path: invert f̂ = ĝ/∏(transfer − A) by fixed Talbot.
pub fn solve_linear_talbot(spec: &LinearODESpec, ts: &[f64], m: usize) -> Result<Vec<f64>> {
    let factors = spec.factors()?;
    let grid = spec.grid;
    let g_hat = literal_transform(&spec.g, grid.a, grid.b - grid.a)?;
    let mut shift = g_hat.abscissa().max(0.0);
    for fac in &factors {
        if !fac.is_degenerate() && fac.c() > 0.0 {
            shift = shift.max(fac.c().powf(1.0 / fac.params.alpha()));
        }
    }
    let f_hat = move |s: Complex64| {
        let mut j = g_hat.eval_unchecked(s);
        for fac in &factors {
            let p = &fac.params;
            let sa = s.powf(p.alpha());
            let t = p.prefactor() * sa / (sa + p.lambda());
            if fac.caputo {
                j += t / s * fac.f0;
            }
            j /= t - fac.coeff;
        }
        j
    };
    let shifted: Vec<f64> = ts.iter().map(|t| t - grid.a).collect();
    talbot_invert_many(f_hat, &shifted, m, shift)
}

/// Root selection for the quadratic in f̂.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
    /// The root vanishing as |s| → ∞ (the minus root), checked for consistency at every node.
    #[default]
    Auto,
}

/// ABC D^α f − A·(f∗f) = g with f(0) = f0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearConvSpec {
    pub alpha: f64,
    #[serde(rename = "A")]
    pub coeff: f64,
    pub g: FnLiteral,
    #[serde(default)]
    pub f0: f64,
    #[serde(default)]
    pub branch: Branch,
    #[serde(default)]
    pub norm: Normalization,
}

/// f̂(s) from the quadratic, or the reason it cannot be formed.
fn nonlinear_root(p: &ABParams, a: f64, f0: f64, branch: Branch, g_hat: Complex64, s: Complex64) -> Result<Complex64> {
    let sa = s.powf(p.alpha());
    let t = p.prefactor() * sa / (sa + p.lambda());
    let q = g_hat + t / s * f0;
    let disc = t * t - 4.0 * a * q;
    if disc.norm() <= 1e-14 * t.norm_sqr() {
        return Err(Error::DiscriminantZero(format!("at s = {s}")));
    }
    let mut w = disc.sqrt();
    let align = (w * t.conj()).re;
    if branch == Branch::Auto && align.abs() <= 1e-10 * w.norm() * t.norm() {
        return Err(Error::BranchAmbiguity(format!("roots equidistant from the transfer value at s = {s}")));
    }
    if align < 0.0 {
        w = -w;
    }
    Ok(match branch {
        Branch::Plus => (t + w) / (2.0 * a),
        // (T − w)/(2A) without cancellation
        Branch::Minus | Branch::Auto => 2.0 * q / (t + w),
    })
}

/// Solve the nonlinear convolution ODE on `grid` with `m` Talbot nodes.
pub fn solve_nonlinear_conv(spec: &NonlinearConvSpec, grid: Grid, m: usize) -> Result<SampledFn> {
    if spec.coeff == 0.0 || !spec.coeff.is_finite() {
        return Err(Error::InvalidParams("nonlinear coefficient A must be finite and nonzero".into()));
    }
    let p = ABParams::new(spec.alpha, grid.a, spec.norm)?;
    let g_hat = literal_transform(&spec.g, grid.a, grid.b - grid.a)?;
    let failure: Mutex<Option<Error>> = Mutex::new(None);
    let f_hat = |s: Complex64| match nonlinear_root(&p, spec.coeff, spec.f0, spec.branch, g_hat.eval_unchecked(s), s) {
        Ok(v) => v,
        Err(e) => {
            failure.lock().unwrap().get_or_insert(e);
            Complex64::new(f64::NAN, 0.0)
        }
    };
    let times = grid.times()?;
    let shifted: Vec<f64> = times.iter().skip(1).map(|t| t - grid.a).collect();
    let inverted = talbot_invert_many(f_hat, &shifted, m, g_hat.abscissa().max(0.0));
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    // f(0+) from s·f̂(s) as s → ∞
    let mut values = vec![spec.f0 + spec.g.eval(grid.a)? / p.prefactor()];
    values.extend(inverted?);
    SampledFn::new(grid.a, grid.b, values)
}

/// Trapezoid convolution (f∗f)(t_n) = ∫_a^{t_n} f(x) f(t_n − x) dx.
pub fn self_convolution(f: &SampledFn) -> Vec<f64> {
    let v = f.values();
    let h = f.h();
    (0..v.len())
        .map(|n| {
            if n == 0 {
                return 0.0;
            }
            let inner: f64 = (1..n).map(|j| v[j] * v[n - j]).sum();
            h * (inner + v[0] * v[n])
        })
        .collect()
}

/// Max of |ABC D^α f − A·(f∗f) − g| over t ≥ `from`.
pub fn nonlinear_residual(spec: &NonlinearConvSpec, f: &SampledFn, from: f64, pol: &TruncationPolicy) -> Result<f64> {
    let p = ABParams::new(spec.alpha, f.a(), spec.norm)?;
    let d = abc_derivative_sampled_with_initial(f, spec.f0, &p, pol)?;
    let ff = self_convolution(f);
    let mut worst = 0.0f64;
    for j in 0..f.n() {
        let t = f.t(j);
        if t >= from {
            worst = worst.max((d.values()[j] - spec.coeff * ff[j] - spec.g.eval(t)?).abs());
        }
    }
    Ok(worst)
}
