//! Product-trapezoid convolution weights.
//!
//! All weakly singular convolutions ∫_a^t k(t − x) f(x) dx are evaluated
//! exactly on the piecewise-linear interpolant of `f`, which reduces every
//! scheme to `out[n] = start[n]·f[0] + Σ_{j=1}^{n} band[n − j]·f[j]`.

use crate::error::Result;
use crate::policy::TruncationPolicy;
use crate::specialfn::{ln_gamma, mittag_leffler2};
use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

#[derive(Debug)]
pub(crate) struct Weights {
    pub start: Vec<f64>,
    pub band: Vec<f64>,
}

impl Weights {
    fn len(&self) -> usize {
        self.band.len()
    }

    /// Apply to samples `f` (f.len() ≤ self.len()); out[0] = 0.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let n = f.len();
        debug_assert!(n <= self.len());
        let row = |i: usize| -> f64 {
            if i == 0 {
                return 0.0;
            }
            let mut acc = self.start[i] * f[0];
            for j in 1..=i {
                acc += self.band[i - j] * f[j];
            }
            acc
        };
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(row).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..n).map(row).collect()
        }
    }
}

type Key = (u8, u64, u64, u64);

fn cache() -> &'static RwLock<HashMap<Key, Arc<Weights>>> {
    static CACHE: OnceLock<RwLock<HashMap<Key, Arc<Weights>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Look up weights of length ≥ n, building (and caching) them when missing.
fn cached<F: FnOnce(usize) -> Result<Weights>>(key: Key, n: usize, build: F) -> Result<Arc<Weights>> {
    if let Some(w) = cache().read().expect("weight cache poisoned").get(&key) {
        if w.len() >= n {
            return Ok(Arc::clone(w));
        }
    }
    let w = Arc::new(build(n)?);
    let mut guard = cache().write().expect("weight cache poisoned");
    let entry = guard.entry(key).or_insert_with(|| Arc::clone(&w));
    if entry.len() < w.len() {
        *entry = Arc::clone(&w);
    }
    Ok(w)
}

fn binomials(p: f64, upto: usize) -> Vec<f64> {
    let mut b = vec![1.0; upto + 1];
    for i in 1..=upto {
        b[i] = b[i - 1] * (p - (i - 1) as f64) / i as f64;
    }
    b
}

/// Weights for the Riemann–Liouville integral of order μ > 0 with step h.
pub(crate) fn rl_weights(mu: f64, h: f64, n: usize) -> Result<Arc<Weights>> {
    cached((0, mu.to_bits(), 0, h.to_bits()), n, |n| Ok(build_rl_weights(mu, h, n)))
}

fn build_rl_weights(mu: f64, h: f64, n: usize) -> Weights {
    let p = mu + 1.0;
    // every weight is h^μ/Γ(μ+2)·k^p·bracket_k; the scale is kept in log form
    let ln_scale = mu * h.ln() - ln_gamma(mu + 2.0);
    let switch = (2.0 * p).max(4.0);
    let binom = binomials(p, 60);
    let mut band = vec![0.0; n];
    let mut start = vec![0.0; n];
    for k in 0..n {
        let kf = k as f64;
        if k == 0 {
            band[0] = ln_scale.exp();
            continue;
        }
        // second difference of x^p at k, divided by k^p
        let bracket = if kf < switch {
            (1.0 + 1.0 / kf).powf(p) - 2.0 + (1.0 - 1.0 / kf).powf(p)
        } else {
            let inv2 = 1.0 / (kf * kf);
            let mut acc = 0.0;
            let mut pw = 1.0;
            for j in 1..30 {
                pw *= inv2;
                let term = binom[2 * j] * pw;
                acc += term;
                if term.abs() <= 1e-17 * acc.abs() {
                    break;
                }
            }
            2.0 * acc
        };
        band[k] = (ln_scale + p * kf.ln()).exp() * bracket;
    }
    for (m, s) in start.iter_mut().enumerate().skip(1) {
        let mf = m as f64;
        // (m−1)^p − (m−1−μ)m^μ, divided by m^p
        let bracket = if mf < switch {
            (1.0 - 1.0 / mf).powf(p) - 1.0 + p / mf
        } else {
            let x = -1.0 / mf;
            let mut acc = 0.0;
            let mut pw = x;
            for bi in binom.iter().take(60).skip(2) {
                pw *= x;
                let term = bi * pw;
                acc += term;
                if term.abs() <= 1e-17 * acc.abs() {
                    break;
                }
            }
            acc
        };
        *s = (ln_scale + p * mf.ln()).exp() * bracket;
    }
    Weights { start, band }
}

/// Mittag-Leffler convolution kernels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MlKernel {
    /// k(u) = E_α(c·u^α)
    Value { alpha: f64, c: f64 },
    /// k(u) = d/du E_α(c·u^α), weakly singular at u = 0
    Derivative { alpha: f64, c: f64 },
}

impl MlKernel {
    fn key(&self, h: f64) -> Key {
        match *self {
            MlKernel::Value { alpha, c } => (1, alpha.to_bits(), c.to_bits(), h.to_bits()),
            MlKernel::Derivative { alpha, c } => (2, alpha.to_bits(), c.to_bits(), h.to_bits()),
        }
    }

    /// Zeroth and first moments ∫₀^U k(u) du and ∫₀^U u·k(u) du.
    fn moments(&self, u: f64, pol: &TruncationPolicy) -> Result<(f64, f64)> {
        if u == 0.0 {
            return Ok((0.0, 0.0));
        }
        match *self {
            MlKernel::Value { alpha, c } => {
                let z = c * u.powf(alpha);
                let e2 = mittag_leffler2(alpha, 2.0, z, pol)?;
                let e3 = mittag_leffler2(alpha, 3.0, z, pol)?;
                Ok((u * e2, u * u * (e2 - e3)))
            }
            MlKernel::Derivative { alpha, c } => {
                let z = c * u.powf(alpha);
                let e1 = mittag_leffler2(alpha, 1.0, z, pol)?;
                let e2 = mittag_leffler2(alpha, 2.0, z, pol)?;
                // E_α(z) − 1 = z·E_{α,α+1}(z) keeps digits when z is small
                let m0 = if z.abs() < 0.5 { z * mittag_leffler2(alpha, alpha + 1.0, z, pol)? } else { e1 - 1.0 };
                Ok((m0, u * (e1 - e2)))
            }
        }
    }
}

fn build_kernel_weights(kernel: MlKernel, h: f64, n: usize, pol: &TruncationPolicy) -> Result<Weights> {
    let us: Vec<f64> = (0..=n).map(|m| m as f64 * h).collect();
    #[cfg(feature = "parallel")]
    let moments: Vec<(f64, f64)> = {
        use rayon::prelude::*;
        us.par_iter().map(|&u| kernel.moments(u, pol)).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let moments: Vec<(f64, f64)> = us.iter().map(|&u| kernel.moments(u, pol)).collect::<Result<_>>()?;
    // per cell m: weight on the near node (right) and on the far node (left)
    let mut left = vec![0.0; n];
    let mut right = vec![0.0; n];
    for m in 0..n {
        let a = moments[m + 1].0 - moments[m].0;
        let c = (moments[m + 1].1 - moments[m].1) / h;
        let mf = m as f64;
        left[m] = c - mf * a;
        right[m] = (mf + 1.0) * a - c;
    }
    let mut band = vec![0.0; n];
    let mut start = vec![0.0; n];
    for k in 0..n {
        band[k] = right[k] + if k > 0 { left[k - 1] } else { 0.0 };
        if k > 0 {
            start[k] = left[k - 1];
        }
    }
    Ok(Weights { start, band })
}

/// ∫_{t_0}^{t_n} k(t_n − x) f(x) dx at every grid node, for samples `f` with step `h`.
pub(crate) fn ml_convolve(kernel: MlKernel, f: &[f64], h: f64, pol: &TruncationPolicy) -> Result<Vec<f64>> {
    let w = cached(kernel.key(h), f.len(), |n| build_kernel_weights(kernel, h, n, pol))?;
    Ok(w.apply(f))
}
