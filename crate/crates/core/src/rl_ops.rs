//! Riemann–Liouville and Caputo differintegrals: exact on [`PowerSum`],
//! product-trapezoid (integrals) and L1 (derivatives) on [`SampledFn`].

use crate::convolution::rl_weights;
use crate::error::{Error, Result};
use crate::funcmodel::{PowerSum, SampledFn, SmoothFn};
use crate::specialfn::{gamma_sign, ln_gamma, recip_gamma};

/// Γ(x)/Γ(y) for x > 0; zero when y is a pole of Γ.
pub(crate) fn gamma_ratio(x: f64, y: f64) -> f64 {
    let ry = recip_gamma(y);
    if ry == 0.0 {
        return 0.0;
    }
    if x < 170.0 && y.abs() < 170.0 {
        return crate::specialfn::gamma(x).unwrap_or(f64::NAN) * ry;
    }
    (ln_gamma(x) - ln_gamma(y)).exp() * gamma_sign(x) * gamma_sign(y)
}

/// Power rule with shift μ (μ > 0 integrates, μ < 0 differentiates):
/// c(t−a)^β ↦ c·Γ(β+1)/Γ(β+μ+1)·(t−a)^{β+μ}.
pub(crate) fn power_rule(f: &PowerSum, mu: f64) -> Result<PowerSum> {
    let mut out = Vec::with_capacity(f.terms().len());
    for &(c, e) in f.terms() {
        let k = gamma_ratio(e + 1.0, e + mu + 1.0);
        if k != 0.0 {
            out.push((c * k, e + mu));
        }
    }
    PowerSum::new(f.base(), out)
}

fn check_order(mu: f64, what: &str) -> Result<()> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidParams(format!("{what} order must be positive, got {mu}")));
    }
    Ok(())
}

fn check_derivative_order(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParams(format!("derivative order {alpha} outside (0, 1)")));
    }
    Ok(())
}

/// RL integral I^μ on a power sum (exact).
pub fn rl_integral_power(f: &PowerSum, mu: f64) -> Result<PowerSum> {
    check_order(mu, "integral")?;
    power_rule(f, mu)
}

/// RL integral I^μ on grid samples by the product trapezoid rule; the value at t_0 is 0.
pub fn rl_integral_grid(f: &SampledFn, mu: f64) -> Result<SampledFn> {
    check_order(mu, "integral")?;
    if f.singular_at_base() {
        return Err(Error::SingularAtBase(f.a()));
    }
    let w = rl_weights(mu, f.h(), f.n())?;
    SampledFn::new(f.a(), f.b(), w.apply(f.values()))
}

/// RL derivative D^α, α ∈ (0, 1), on a power sum (exact).
pub fn rl_derivative_power(f: &PowerSum, alpha: f64) -> Result<PowerSum> {
    check_derivative_order(alpha)?;
    power_rule(f, -alpha)
}

/// RL derivative on grid samples: L1 Caputo scheme plus f(a)(t−a)^{−α}/Γ(1−α).
///
/// When f(a) ≠ 0 the value at t_0 is a flagged NaN.
pub fn rl_derivative_grid(f: &SampledFn, alpha: f64) -> Result<SampledFn> {
    let caputo = caputo_derivative_grid(f, alpha)?;
    let fa = f.values()[0];
    if fa == 0.0 {
        return Ok(caputo);
    }
    let rg = recip_gamma(1.0 - alpha);
    let mut values = caputo.values().to_vec();
    for (j, v) in values.iter_mut().enumerate().skip(1) {
        *v += fa * (f.t(j) - f.a()).powf(-alpha) * rg;
    }
    SampledFn::with_singular_base(f.a(), f.b(), values)
}

/// Caputo derivative on a power sum: I^{1−α} applied to f′.
pub fn caputo_derivative_power(f: &PowerSum, alpha: f64) -> Result<PowerSum> {
    check_derivative_order(alpha)?;
    power_rule(&f.derivative()?, 1.0 - alpha)
}

/// Caputo derivative of a smooth function: product trapezoid on exact f′ samples.
pub fn caputo_derivative_smooth(f: &SmoothFn, alpha: f64, a: f64, b: f64, n: usize) -> Result<SampledFn> {
    check_derivative_order(alpha)?;
    rl_integral_grid(&f.sample_deriv(1, a, b, n)?, 1.0 - alpha)
}

/// Caputo derivative on grid samples by the L1 scheme.
pub fn caputo_derivative_grid(f: &SampledFn, alpha: f64) -> Result<SampledFn> {
    check_derivative_order(alpha)?;
    if f.singular_at_base() {
        return Err(Error::SingularAtBase(f.a()));
    }
    let n = f.n();
    let h = f.h();
    let beta = 1.0 - alpha;
    let b: Vec<f64> = (0..n).map(|k| ((k + 1) as f64).powf(beta) - (k as f64).powf(beta)).collect();
    let diffs: Vec<f64> = f.values().windows(2).map(|w| w[1] - w[0]).collect();
    let scale = h.powf(-alpha) * recip_gamma(2.0 - alpha);
    let row = |i: usize| -> f64 {
        let mut acc = 0.0;
        for j in 0..i {
            acc += b[i - 1 - j] * diffs[j];
        }
        scale * acc
    };
    #[cfg(feature = "parallel")]
    let values: Vec<f64> = {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(row).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let values: Vec<f64> = (0..n).map(row).collect();
    SampledFn::new(f.a(), f.b(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcmodel::sample;
    use crate::specialfn::gamma;

    fn ps(terms: &[(f64, f64)]) -> PowerSum {
        PowerSum::new(0.0, terms.iter().copied()).unwrap()
    }

    #[test]
    fn power_rule_examples() {
        // I^{αn} t² = 2/Γ(3+αn)·t^{2+αn}
        let out = rl_integral_power(&ps(&[(1.0, 2.0)]), 0.9).unwrap();
        assert_eq!(out.terms().len(), 1);
        assert!((out.terms()[0].0 - 2.0 / gamma(3.9).unwrap()).abs() < 1e-15);
        // I^1 of 1 is t − a
        let out = rl_integral_power(&PowerSum::constant(2.0, 1.0), 1.0).unwrap();
        assert_eq!(out.terms(), &[(1.0, 1.0)]);
        // I^{2/3} t = Γ(2)/Γ(8/3)·t^{5/3}
        let out = rl_integral_power(&ps(&[(1.0, 1.0)]), 2.0 / 3.0).unwrap();
        assert!((out.terms()[0].0 - 1.0 / gamma(8.0 / 3.0).unwrap()).abs() < 1e-15);
        assert!((out.terms()[0].1 - 5.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn derivative_examples() {
        let alpha = 0.35;
        // D^α 1 = t^{−α}/Γ(1−α)
        let d = rl_derivative_power(&PowerSum::constant(0.0, 1.0), alpha).unwrap();
        assert!((d.terms()[0].0 - 1.0 / gamma(1.0 - alpha).unwrap()).abs() < 1e-15);
        assert_eq!(d.terms()[0].1, -alpha);
        // D^α t^α = Γ(α+1)
        let d = rl_derivative_power(&ps(&[(1.0, alpha)]), alpha).unwrap();
        assert!((d.eval(0.7).unwrap() - gamma(1.0 + alpha).unwrap()).abs() < 1e-14);
        // D^α t^{α−1} = 0
        assert!(rl_derivative_power(&ps(&[(1.0, alpha - 1.0)]), alpha).unwrap().is_zero());
        assert!(rl_derivative_power(&PowerSum::zero(0.0), alpha).unwrap().is_zero());
    }

    #[test]
    fn caputo_examples() {
        assert!(caputo_derivative_power(&PowerSum::constant(0.0, 4.0), 0.5).unwrap().is_zero());
        let d = caputo_derivative_power(&ps(&[(1.0, 1.0)]), 0.3).unwrap();
        assert!((d.eval(1.3).unwrap() - 1.3f64.powf(0.7) / gamma(1.7).unwrap()).abs() < 1e-14);
        let d = caputo_derivative_power(&ps(&[(1.0, 2.0)]), 0.5).unwrap();
        assert!((d.eval(1.0).unwrap() - 2.0 / gamma(2.5).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn grid_integral_examples() {
        let one = SampledFn::new(0.0, 1.0, vec![1.0; 257]).unwrap();
        let v = rl_integral_grid(&one, 0.5).unwrap();
        assert!((v.values()[256] - std::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-12);
        assert_eq!(v.values()[0], 0.0);
        let z = rl_integral_grid(&SampledFn::new(0.0, 1.0, vec![0.0; 9]).unwrap(), 0.7).unwrap();
        assert!(z.values().iter().all(|&x| x == 0.0));
        let t = sample(&ps(&[(1.0, 1.0)]), 0.0, 1.0, 33).unwrap();
        assert!((rl_integral_grid(&t, 1.0).unwrap().values()[32] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn grid_semigroup_and_convergence() {
        let f = ps(&[(1.0, 2.0)]);
        let g = sample(&f, 0.0, 1.0, 2049).unwrap();
        let lhs = rl_integral_grid(&rl_integral_grid(&g, 0.3).unwrap(), 0.5).unwrap();
        let rhs = rl_integral_grid(&g, 0.8).unwrap();
        let gap = lhs.lin_comb(1.0, &rhs, -1.0).unwrap().max_abs_from(0.0);
        assert!(gap < 1e-6, "gap {gap}");
        // exact on power sums
        let a = rl_integral_power(&rl_integral_power(&f, 0.3).unwrap(), 0.5).unwrap();
        let b = rl_integral_power(&f, 0.8).unwrap();
        assert!(a.sub(&b).unwrap().max_abs_on(0.0, 1.0, 50).unwrap() < 1e-15);

        for &mu in &[0.3, 0.5, 0.9] {
            let exact = rl_integral_power(&f, mu).unwrap();
            let errs: Vec<f64> = [129usize, 257, 513]
                .iter()
                .map(|&n| {
                    let out = rl_integral_grid(&sample(&f, 0.0, 1.0, n).unwrap(), mu).unwrap();
                    (0..n).map(|j| (out.values()[j] - exact.eval(out.t(j)).unwrap()).abs()).fold(0.0, f64::max)
                })
                .collect();
            for w in errs.windows(2) {
                let order = (w[0] / w[1]).log2();
                assert!(order >= 1.8, "mu={mu}: order {order}");
            }
        }
    }

    #[test]
    fn rl_minus_caputo_is_initial_term() {
        let alpha = 0.4;
        let f = ps(&[(1.5, 0.0), (1.0, 1.0), (-0.5, 2.0)]);
        let g = sample(&f, 0.0, 1.0, 513).unwrap();
        let rl = rl_derivative_grid(&g, alpha).unwrap();
        let cap = caputo_derivative_grid(&g, alpha).unwrap();
        assert!(rl.singular_at_base() && rl.values()[0].is_nan());
        for j in 1..g.n() {
            let t = g.t(j);
            let want = 1.5 * t.powf(-alpha) / gamma(1.0 - alpha).unwrap();
            assert!((rl.values()[j] - cap.values()[j] - want).abs() < 1e-6 * want.abs().max(1.0));
        }
        // L1 against the exact Caputo derivative
        let exact = caputo_derivative_power(&f, alpha).unwrap();
        for j in (64..g.n()).step_by(64) {
            assert!((cap.values()[j] - exact.eval(g.t(j)).unwrap()).abs() < 1e-3);
        }
    }

    #[test]
    fn smooth_caputo_matches_power_rule() {
        let f = SmoothFn::poly(vec![0.0, 0.0, 1.0]);
        let d = caputo_derivative_smooth(&f, 0.5, 0.0, 1.0, 513).unwrap();
        assert!((d.values()[512] - 2.0 / gamma(2.5).unwrap()).abs() < 1e-6);
    }

    proptest::proptest! {
        #[test]
        fn grid_integral_is_linear(c1 in -3.0f64..3.0, c2 in -3.0f64..3.0, mu in 0.1f64..2.0) {
            let f = sample(&ps(&[(1.0, 0.5)]), 0.0, 1.0, 65).unwrap();
            let g = sample(&ps(&[(1.0, 2.0)]), 0.0, 1.0, 65).unwrap();
            let lhs = rl_integral_grid(&f.lin_comb(c1, &g, c2).unwrap(), mu).unwrap();
            let rhs = rl_integral_grid(&f, mu).unwrap().lin_comb(c1, &rl_integral_grid(&g, mu).unwrap(), c2).unwrap();
            for (x, y) in lhs.values().iter().zip(rhs.values()) {
                proptest::prop_assert!((x - y).abs() <= 1e-13 * x.abs().max(1.0));
            }
        }

        #[test]
        fn power_integral_semigroup(mu in 0.05f64..2.0, nu in 0.05f64..2.0, e in 0.0f64..3.0) {
            let f = ps(&[(1.0, e), (-2.0, e + 0.5)]);
            let a = rl_integral_power(&rl_integral_power(&f, mu).unwrap(), nu).unwrap();
            let b = rl_integral_power(&f, mu + nu).unwrap();
            proptest::prop_assert!(a.sub(&b).unwrap().max_abs_on(0.0, 2.0, 21).unwrap() < 1e-12);
        }
    }
}
