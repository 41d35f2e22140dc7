//! When do AB integrals compose? Defects, the integral and differential
//! conditions, the indicial polynomial and its Miller–Ross solution family.

use crate::ab_ops::Normalization;
use crate::error::{Error, Result};
use crate::funcmodel::{PowerSum, SampledFn};
use crate::policy::TruncationPolicy;
use crate::rl_ops::{rl_derivative_grid, rl_derivative_power, rl_integral_power};
use crate::specialfn::{miller_ross, mittag_leffler_one_algebraic, MillerRossArg, ALGEBRAIC_MIN_POS_Z};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemigroupCase {
    pub alpha: f64,
    pub beta: f64,
    pub norm: Normalization,
}

impl SemigroupCase {
    pub fn new(alpha: f64, beta: f64, norm: Normalization) -> Result<Self> {
        for x in [alpha, beta] {
            if !(x > 0.0 && x < 1.0) {
                return Err(Error::InvalidParams(format!("order {x} outside (0, 1)")));
            }
        }
        if let Normalization::Exponential { lambda } = norm {
            if lambda != 0.0 {
                log::warn!("exponential normalisation with rate {lambda} violates B(0) = B(1) = 1");
            }
        }
        Ok(SemigroupCase { alpha, beta, norm })
    }
}

/// (1−μ)/B(μ)·f + μ/B(μ)·I^μ f for any μ > 0.
fn ab_integral_order(f: &PowerSum, mu: f64, norm: Normalization) -> Result<PowerSum> {
    let b = norm.value(mu);
    f.scale((1.0 - mu) / b).add(&rl_integral_power(f, mu)?.scale(mu / b))
}

/// (AB I^{α+β} f, AB I^α AB I^β f).
pub fn semigroup_sides(case: &SemigroupCase, f: &PowerSum) -> Result<(PowerSum, PowerSum)> {
    let joint = ab_integral_order(f, case.alpha + case.beta, case.norm)?;
    let nested = ab_integral_order(&ab_integral_order(f, case.beta, case.norm)?, case.alpha, case.norm)?;
    Ok((joint, nested))
}

/// AB I^α(AB I^β f) − AB I^{α+β} f, exactly.
pub fn semigroup_defect(case: &SemigroupCase, f: &PowerSum) -> Result<PowerSum> {
    let (joint, nested) = semigroup_sides(case, f)?;
    nested.sub(&joint)
}

/// Left side of the integral equation the semigroup property imposes on f.
pub fn fie_residual(case: &SemigroupCase, f: &PowerSum) -> Result<PowerSum> {
    let (a, b) = (case.alpha, case.beta);
    let bb = case.norm.value(a) * case.norm.value(b);
    let bs = case.norm.value(a + b);
    let ia = rl_integral_power(f, a)?;
    let ib = rl_integral_power(f, b)?;
    let iab = rl_integral_power(f, a + b)?;
    iab.scale(a * b / bb - (a + b) / bs)
        .add(&ia.scale(a * (1.0 - b) / bb))?
        .add(&ib.scale(b * (1.0 - a) / bb))?
        .add(&f.scale((1.0 - a) * (1.0 - b) / bb - (1.0 - a - b) / bs))
}

fn check_fde_orders(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha > 0.0 && beta > 0.0 && alpha + beta < 1.0) {
        return Err(Error::InvalidParams(format!("differential condition needs α, β > 0 and α + β < 1, got {alpha}, {beta}")));
    }
    Ok(())
}

/// αβ D^{α+β}f + α(1−β)D^β f + β(1−α)D^α f + (αβ−α−β)f, with B(α)B(β) = B(α+β), exactly.
pub fn fde_residual_power(f: &PowerSum, alpha: f64, beta: f64) -> Result<PowerSum> {
    check_fde_orders(alpha, beta)?;
    rl_derivative_power(f, alpha + beta)?
        .scale(alpha * beta)
        .add(&rl_derivative_power(f, beta)?.scale(alpha * (1.0 - beta)))?
        .add(&rl_derivative_power(f, alpha)?.scale(beta * (1.0 - alpha)))?
        .add(&f.scale(alpha * beta - alpha - beta))
}

/// The same residual on grid samples, RL derivatives by the L1 scheme.
pub fn fde_residual_grid(f: &SampledFn, alpha: f64, beta: f64) -> Result<SampledFn> {
    check_fde_orders(alpha, beta)?;
    let dab = rl_derivative_grid(f, alpha + beta)?;
    let db = rl_derivative_grid(f, beta)?;
    let da = rl_derivative_grid(f, alpha)?;
    let values: Vec<f64> = (0..f.n())
        .map(|j| {
            alpha * beta * dab.values()[j]
                + alpha * (1.0 - beta) * db.values()[j]
                + beta * (1.0 - alpha) * da.values()[j]
                + (alpha * beta - alpha - beta) * f.values()[j]
        })
        .collect();
    if dab.singular_at_base() {
        SampledFn::with_singular_base(f.a(), f.b(), values)
    } else {
        SampledFn::new(f.a(), f.b(), values)
    }
}

/// P(x) = (βx^α − β + 1)(αx^β − α + 1) − 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndicialPoly {
    pub alpha: f64,
    pub beta: f64,
}

impl IndicialPoly {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        SemigroupCase::new(alpha, beta, Normalization::Unit)?;
        Ok(IndicialPoly { alpha, beta })
    }

    pub fn eval_expanded(&self, x: f64) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        a * b * x.powf(a + b) + a * (1.0 - b) * x.powf(b) + b * (1.0 - a) * x.powf(a) + (a * b - a - b)
    }

    pub fn eval_factored(&self, x: f64) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        (b * x.powf(a) - b + 1.0) * (a * x.powf(b) - a + 1.0) - 1.0
    }

    /// Roots in y = x^α when α = β: 1 and (α−2)/α.
    pub fn equal_order_roots(&self) -> Option<(f64, f64)> {
        (self.alpha == self.beta).then(|| (1.0, (self.alpha - 2.0) / self.alpha))
    }

    /// α²(y − 1)(y − (α−2)/α) with y = x^α, for α = β.
    pub fn eval_equal_order(&self, x: f64) -> Option<f64> {
        let (r1, r2) = self.equal_order_roots()?;
        let y = x.powf(self.alpha);
        Some(self.alpha * self.alpha * (y - r1) * (y - r2))
    }

    /// dP/dy = 2α(αy − α + 1) for α = β.
    pub fn equal_order_slope(&self, y: f64) -> Option<f64> {
        let a = self.alpha;
        (self.alpha == self.beta).then_some(2.0 * a * (a * y - a + 1.0))
    }
}

/// The Miller–Ross solution of the α = β = 1/q differential condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemigroupSolution {
    q: u32,
}

/// Digits we are willing to lose to cancellation between Miller–Ross terms.
const MAX_CANCELLATION: f64 = 1e8;

impl SemigroupSolution {
    pub fn new(q: u32) -> Result<Self> {
        if q <= 2 {
            return Err(Error::InvalidParams(format!("solution family needs an integer q > 2, got {q}")));
        }
        Ok(SemigroupSolution { q })
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn alpha(&self) -> f64 {
        1.0 / self.q as f64
    }

    /// (root, 1/P′(root)) pairs.
    fn roots(&self) -> [(f64, f64); 2] {
        let a = self.alpha();
        [(1.0, 1.0 / (2.0 * a)), ((a - 2.0) / a, -1.0 / (2.0 * a))]
    }

    /// Σ_roots 1/P′(r) Σ_k r^{q−k−1} E_t(−kα − shift, r^q); shift = μ gives D^μ f.
    fn combination(&self, t: f64, shift: f64, pol: &TruncationPolicy) -> Result<f64> {
        let q = self.q as i32;
        let a = self.alpha();
        let mut sum = 0.0;
        let mut mass = 0.0;
        for (r, w) in self.roots() {
            let rq = r.powi(q);
            let nu = |k: i32| -(k as f64) * a - shift;
            // t^ν(at)^{−ν}e^{at} is the growing part of each term; for even q the
            // weights r^{q−k−1}a^{−ν} sum to zero and only the algebraic parts remain
            let growth: Vec<f64> = (0..q).map(|k| r.powi(q - k - 1) * rq.powf(-nu(k))).collect();
            let cancels = growth.iter().sum::<f64>().abs() <= 1e-12 * growth.iter().map(|g| g.abs()).sum::<f64>();
            let algebraic = rq > 0.0 && rq * t >= ALGEBRAIC_MIN_POS_Z && cancels;
            for k in 0..q {
                let e = if algebraic {
                    t.powf(nu(k)) * mittag_leffler_one_algebraic(nu(k) + 1.0, rq * t)?
                } else {
                    miller_ross(MillerRossArg::new(nu(k), rq, t)?, pol)?
                };
                let term = w * r.powi(q - k - 1) * e;
                sum += term;
                mass += term.abs();
            }
        }
        if mass > MAX_CANCELLATION * sum.abs() {
            return Err(Error::NoConvergence { what: "semigroup solution (cancellation beyond double precision)", terms: 0 });
        }
        Ok(sum)
    }

    pub fn eval(&self, t: f64, pol: &TruncationPolicy) -> Result<f64> {
        self.combination(t, 0.0, pol)
    }

    /// RL D^μ f(t) by the exact shift D^μ E_t(ν, a) = E_t(ν − μ, a).
    pub fn rl_derivative(&self, mu: f64, t: f64, pol: &TruncationPolicy) -> Result<f64> {
        self.combination(t, mu, pol)
    }

    /// α²D^{2α}f + 2α(1−α)D^α f + (α²−2α)f at t.
    pub fn fde_residual_at(&self, t: f64, pol: &TruncationPolicy) -> Result<f64> {
        let a = self.alpha();
        Ok(a * a * self.rl_derivative(2.0 * a, t, pol)?
            + 2.0 * a * (1.0 - a) * self.rl_derivative(a, t, pol)?
            + (a * a - 2.0 * a) * self.eval(t, pol)?)
    }

    /// Max |residual| over n points of [lo, hi].
    pub fn fde_residual(&self, lo: f64, hi: f64, n: usize, pol: &TruncationPolicy) -> Result<f64> {
        let steps = n.max(2) - 1;
        let mut worst = 0.0f64;
        for i in 0..=steps {
            let t = lo + (hi - lo) * i as f64 / steps as f64;
            worst = worst.max(self.fde_residual_at(t, pol)?.abs());
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specialfn::gamma;
    use proptest::prelude::*;

    fn pol() -> TruncationPolicy {
        TruncationPolicy::default()
    }

    fn unit(a: f64, b: f64) -> SemigroupCase {
        SemigroupCase::new(a, b, Normalization::Unit).unwrap()
    }

    #[test]
    fn counterexample_sides() {
        let t = PowerSum::monomial(0.0, 1.0, 1.0).unwrap();
        let (joint, nested) = semigroup_sides(&unit(1.0 / 3.0, 1.0 / 3.0), &t).unwrap();
        let g83 = gamma(8.0 / 3.0).unwrap();
        let g73 = gamma(7.0 / 3.0).unwrap();
        let want_joint = [(1.0 / 3.0, 1.0), (2.0 / (3.0 * g83), 5.0 / 3.0)];
        let want_nested = [(4.0 / 9.0, 1.0), (4.0 / (9.0 * g73), 4.0 / 3.0), (1.0 / (9.0 * g83), 5.0 / 3.0)];
        for (got, want) in joint.terms().iter().zip(want_joint).chain(nested.terms().iter().zip(want_nested)) {
            assert!((got.0 - want.0).abs() < 1e-14 && (got.1 - want.1).abs() < 1e-14);
        }
        assert!(!semigroup_defect(&unit(1.0 / 3.0, 1.0 / 3.0), &t).unwrap().is_zero());
    }

    #[test]
    fn defect_of_zero_and_small_order() {
        assert!(semigroup_defect(&unit(0.3, 0.4), &PowerSum::zero(0.0)).unwrap().is_zero());
        let t = PowerSum::monomial(0.0, 1.0, 1.0).unwrap();
        let d = semigroup_defect(&unit(1e-6, 0.5), &t).unwrap();
        assert!(d.max_abs_on(0.0, 1.0, 101).unwrap() < 1e-4);
    }

    #[test]
    fn integral_condition_is_the_defect() {
        for (a, b) in [(0.2, 0.3), (1.0 / 3.0, 1.0 / 3.0), (0.7, 0.6)] {
            for norm in [Normalization::Unit, Normalization::Exponential { lambda: 0.4 }] {
                let case = SemigroupCase::new(a, b, norm).unwrap();
                let f = PowerSum::new(0.0, [(1.0, 0.0), (-2.0, 0.5), (0.7, 2.0)]).unwrap();
                let diff = fie_residual(&case, &f).unwrap().sub(&semigroup_defect(&case, &f).unwrap()).unwrap();
                assert!(diff.max_abs_on(0.0, 2.0, 41).unwrap() < 1e-13);
            }
        }
    }

    #[test]
    fn indicial_examples() {
        let p = IndicialPoly::new(1.0 / 3.0, 1.0 / 3.0).unwrap();
        let (r1, r2) = p.equal_order_roots().unwrap();
        assert_eq!(r1, 1.0);
        assert!((r2 + 5.0).abs() < 1e-14);
        assert!((p.equal_order_slope(1.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((p.equal_order_slope(r2).unwrap() + 2.0 / 3.0).abs() < 1e-14);
        for i in 0..50 {
            let x = 0.1 + 0.1 * i as f64;
            let e = p.eval_expanded(x);
            assert!((e - p.eval_factored(x)).abs() < 1e-12);
            assert!((e - p.eval_equal_order(x).unwrap()).abs() < 1e-12);
        }
        assert!(IndicialPoly::new(0.3, 0.4).unwrap().equal_order_roots().is_none());
    }

    #[test]
    fn solution_reference_values() {
        let s = SemigroupSolution::new(3).unwrap();
        for (t, want) in
            [(0.5, 8.116_321_061_551_480_820_2), (1.0, 12.581_088_289_997_816_675), (2.0, 33.413_026_857_615_680_428)]
        {
            let got = s.eval(t, &pol()).unwrap();
            assert!(((got - want) / want).abs() < 1e-10, "t={t}: {got}");
        }
        assert!(SemigroupSolution::new(2).is_err());
        // even q: the e^{r^q t} growth cancels across k and is never formed
        let s4 = SemigroupSolution::new(4).unwrap();
        for (t, want) in [
            (1e-4, 502.288_868_018_723_247_37),
            (1e-3, 127.709_567_061_422_443_08),
            (0.01, 35.443_758_731_605_227_736),
            (0.1, 14.195_464_107_756_501_214),
            (0.5, 14.529_338_916_847_377_272),
            (1.0, 22.413_472_127_040_389_601),
            (2.0, 59.422_967_969_504_189_582),
        ] {
            let got = s4.eval(t, &pol()).unwrap();
            assert!(((got - want) / want).abs() < 1e-10, "q=4 t={t}: {got}");
        }
        let s6 = SemigroupSolution::new(6).unwrap();
        for (t, want) in [
            (1e-3, 363.545_643_998_641_683_54),
            (0.01, 87.335_552_738_744_459_33),
            (0.5, 32.824_339_590_982_197_813),
            (1.0, 50.494_962_169_907_165_436),
            (2.0, 133.732_976_421_045_184_7),
        ] {
            let got = s6.eval(t, &pol()).unwrap();
            assert!(((got - want) / want).abs() < 1e-10, "q=6 t={t}: {got}");
        }
    }

    #[test]
    fn solution_satisfies_differential_condition() {
        for q in 3..=6 {
            let s = SemigroupSolution::new(q).unwrap();
            assert!(s.fde_residual(0.5, 2.0, 129, &pol()).unwrap() < 1e-9, "q={q}");
            assert!(s.fde_residual(1e-3, 0.5, 129, &pol()).unwrap() < 1e-8, "q={q} near 0");
        }
    }

    #[test]
    fn identity_is_not_a_solution() {
        let t = PowerSum::monomial(0.0, 1.0, 1.0).unwrap();
        let r = fde_residual_power(&t, 1.0 / 3.0, 1.0 / 3.0).unwrap();
        assert!(r.max_abs_on(0.5, 2.0, 21).unwrap() > 0.1);
        assert!(fde_residual_power(&PowerSum::zero(0.0), 0.3, 0.3).unwrap().is_zero());
        assert!(fde_residual_power(&t, 0.6, 0.6).is_err());
        // grid path agrees with the exact one on a smooth input
        let f = PowerSum::new(0.0, [(1.0, 1.0), (0.5, 2.0)]).unwrap();
        let exact = fde_residual_power(&f, 0.25, 0.25).unwrap();
        let grid = fde_residual_grid(&crate::funcmodel::sample(&f, 0.0, 2.0, 2049).unwrap(), 0.25, 0.25).unwrap();
        for j in (256..2049).step_by(128) {
            assert!((grid.values()[j] - exact.eval(grid.t(j)).unwrap()).abs() < 1e-4);
        }
    }

    proptest! {
        #[test]
        fn one_is_always_a_root(a in 0.01f64..0.99, b in 0.01f64..0.99) {
            prop_assert!(IndicialPoly::new(a, b).unwrap().eval_factored(1.0).abs() < 1e-15);
            prop_assert!(IndicialPoly::new(a, b).unwrap().eval_expanded(1.0).abs() < 1e-15);
        }

        #[test]
        fn zero_sets_of_defect_and_condition_agree(c in proptest::collection::vec(-3.0f64..3.0, 3), e in proptest::collection::vec(0.0f64..3.0, 3)) {
            let f = PowerSum::new(0.0, c.into_iter().zip(e)).unwrap();
            let case = unit(0.3, 0.45);
            let d = semigroup_defect(&case, &f).unwrap().max_abs_on(0.0, 1.0, 21).unwrap();
            let r = fie_residual(&case, &f).unwrap().max_abs_on(0.0, 1.0, 21).unwrap();
            prop_assert_eq!(d < 1e-12, r < 1e-12);
        }
    }
}
