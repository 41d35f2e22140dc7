//! Identity and residual suites behind `mlkcalc verify`.

use super::VerifyArgs;
use crate::ab_ops::{abr_derivative_kernel, abr_derivative_series, verify_inverse_identities, ABParams, Normalization};
use crate::error::Result;
use crate::funcmodel::{sample, FnLiteral, PowerSum};
use crate::laplace::{abr_transfer, literal_transform, talbot_invert, TALBOT_DEFAULT_NODES};
use crate::ode::{self, Branch, Grid, LinearODESpec, NonlinearConvSpec, OdeFamily, OneOrMany};
use crate::policy::TruncationPolicy;
use crate::riccati::{coefficient_identity_defect, riccati_coefficients, riccati_residual, RiccatiSpec, RootSign};
use crate::rules::{product_rule_gap, RuleTruncation};
use crate::semigroup::{IndicialPoly, SemigroupSolution};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Inverse,
    Series,
    Laplace,
    Ode,
    Riccati,
    Rules,
    Semigroup,
    #[default]
    All,
}

impl Suite {
    pub const EACH: [Suite; 7] =
        [Suite::Inverse, Suite::Series, Suite::Laplace, Suite::Ode, Suite::Riccati, Suite::Rules, Suite::Semigroup];

    fn name(self) -> &'static str {
        match self {
            Suite::Inverse => "inverse",
            Suite::Series => "series",
            Suite::Laplace => "laplace",
            Suite::Ode => "ode",
            Suite::Riccati => "riccati",
            Suite::Rules => "rules",
            Suite::Semigroup => "semigroup",
            Suite::All => "all",
        }
    }
}

/// One residual against its tolerance. `value` is None when the computation itself failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    pub value: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub passed: usize,
    pub failed: usize,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.failed == 0
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }
}

struct Collector<'a> {
    suite: &'static str,
    checks: &'a mut Vec<Check>,
}

impl Collector<'_> {
    fn check(&mut self, name: impl Into<String>, tolerance: f64, value: Result<f64>) {
        let name = name.into();
        let (value, error) = match value {
            Ok(v) => (Some(v), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let pass = value.is_some_and(|v| v.is_finite() && v < tolerance);
        self.checks.push(Check { suite: self.suite.into(), name, value, tolerance, pass, error });
    }
}

fn monomials() -> Vec<(&'static str, PowerSum)> {
    let ps = |t: &[(f64, f64)]| PowerSum::new(0.0, t.iter().copied()).expect("valid literal");
    vec![("1", ps(&[(1.0, 0.0)])), ("t", ps(&[(1.0, 1.0)])), ("t^2", ps(&[(1.0, 2.0)])), ("t+t^2", ps(&[(1.0, 1.0), (1.0, 2.0)]))]
}

/// Run `args.suite` (every suite for `all`).
pub fn run_suite(args: &VerifyArgs, pol: &TruncationPolicy) -> VerifyReport {
    let mut checks = Vec::new();
    let suites: Vec<Suite> = if args.suite == Suite::All { Suite::EACH.to_vec() } else { vec![args.suite] };
    for s in suites {
        let mut c = Collector { suite: s.name(), checks: &mut checks };
        match s {
            Suite::Inverse => inverse(&mut c, args, pol),
            Suite::Series => series(&mut c, pol),
            Suite::Laplace => laplace(&mut c, pol),
            Suite::Ode => odes(&mut c, pol),
            Suite::Riccati => riccati(&mut c),
            Suite::Rules => rules(&mut c, pol),
            Suite::Semigroup => semigroup(&mut c, pol),
            Suite::All => unreachable!(),
        }
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    VerifyReport { suite: args.suite, passed: checks.len() - failed, failed, checks }
}

fn inverse(c: &mut Collector, args: &VerifyArgs, pol: &TruncationPolicy) {
    let custom = args.f.is_some() || args.alpha.is_some() || args.beta.is_some();
    let cases: Vec<(String, Result<PowerSum>, f64, f64)> = if custom {
        let f = args.f.clone().unwrap_or(FnLiteral::PowerSum { base: 0.0, terms: vec![(1.0, 1.0)] });
        let alpha = args.alpha.unwrap_or(0.5);
        vec![("f".into(), f.to_powersum(0.0, 2.0), alpha, args.beta.unwrap_or(alpha))]
    } else {
        let mut v = Vec::new();
        for (name, f) in monomials() {
            for a in [0.25, 0.5, 0.75] {
                for b in [0.25, 0.5, 0.75] {
                    v.push((name.to_string(), Ok(f.clone()), a, b));
                }
            }
        }
        v
    };
    for (name, f, a, b) in cases {
        let label = format!("f={name} alpha={a} beta={b}");
        let report = f.and_then(|f| verify_inverse_identities(&f, &ABParams::unit(a)?, b, pol, 0.0, 2.0, 41));
        match report {
            Ok(r) => {
                for (id, v) in r.entries() {
                    c.check(format!("{id} {label}"), 1e-8, Ok(v));
                }
            }
            Err(e) => c.check(label, 1e-8, Err(e)),
        }
    }
}

fn series(c: &mut Collector, pol: &TruncationPolicy) {
    let fs = [
        ("1", FnLiteral::Poly { coeffs: vec![1.0] }),
        ("t", FnLiteral::Poly { coeffs: vec![0.0, 1.0] }),
        ("t^2", FnLiteral::Poly { coeffs: vec![0.0, 0.0, 1.0] }),
        ("e^t", FnLiteral::Exp { rate: 1.0, scale: 1.0 }),
    ];
    for (name, f) in fs {
        let gap = (|| {
            let p = ABParams::unit(0.5)?;
            let kern = abr_derivative_kernel(&sample(&f.to_smooth()?, 0.0, 2.0, 4097)?, &p, pol)?;
            let (ser, _) = abr_derivative_series(&f.to_powersum(0.0, 2.0)?, &p, pol, 2.0)?;
            let mut worst = 0.0f64;
            for (j, v) in kern.values().iter().enumerate() {
                worst = worst.max((v - ser.eval(kern.t(j))?).abs());
            }
            Ok(worst)
        })();
        c.check(format!("kernel vs series f={name} alpha=0.5 n=4097"), 1e-5, gap);
    }
}

fn laplace(c: &mut Collector, pol: &TruncationPolicy) {
    type Pair = (&'static str, fn(Complex64) -> Complex64, fn(f64) -> f64);
    let pairs: [Pair; 3] = [
        ("1/s^2", |s| 1.0 / (s * s), |t| t),
        ("1/(s+1)", |s| 1.0 / (s + 1.0), |t| (-t).exp()),
        ("s^-1.5", |s| s.powf(-1.5), |t| 2.0 * (t / std::f64::consts::PI).sqrt()),
    ];
    for (name, fhat, exact) in pairs {
        let err = (|| {
            let mut worst = 0.0f64;
            for i in 1..=20 {
                let t = 0.1 * i as f64;
                worst = worst.max((talbot_invert(fhat, t, TALBOT_DEFAULT_NODES)? - exact(t)).abs());
            }
            Ok(worst)
        })();
        c.check(format!("talbot {name}"), 1e-7, err);
    }
    let err = (|| {
        let p = ABParams::unit(0.5)?;
        let t2 = FnLiteral::Poly { coeffs: vec![0.0, 0.0, 1.0] };
        let h = abr_transfer(&p).mul(&literal_transform(&t2, 0.0, 2.0)?);
        let (ser, _) = abr_derivative_series(&t2.to_powersum(0.0, 2.0)?, &p, pol, 2.0)?;
        let mut worst = 0.0f64;
        for i in 1..=20 {
            let t = 0.1 * i as f64;
            worst = worst.max((h.invert(t, TALBOT_DEFAULT_NODES)? - ser.eval(t)?).abs());
        }
        Ok(worst)
    })();
    c.check("abr transfer times L{t^2} vs series", 1e-6, err);
}

fn odes(c: &mut Collector, pol: &TruncationPolicy) {
    let grid = Grid { a: 0.0, b: 2.0, n: 2049 };
    let mk = |family, alpha: f64, a: OneOrMany, g: FnLiteral, f0: OneOrMany| LinearODESpec {
        family,
        alpha: OneOrMany::One(alpha),
        coeffs: Some(a),
        g,
        f0,
        norm: Normalization::Unit,
        grid,
    };
    let quad = FnLiteral::Poly { coeffs: vec![1.0, 0.0, 1.0] };
    let specs = [
        (
            "ODE1",
            LinearODESpec { coeffs: None, ..mk(OdeFamily::ODE1, 0.4, OneOrMany::One(0.0), quad.clone(), OneOrMany::One(0.0)) },
        ),
        ("ODE2", mk(OdeFamily::ODE2, 0.5, OneOrMany::One(1.0), quad.clone(), OneOrMany::One(0.0))),
        (
            "ODE4",
            LinearODESpec { coeffs: None, ..mk(OdeFamily::ODE4, 0.4, OneOrMany::One(0.0), quad.clone(), OneOrMany::One(0.5)) },
        ),
        ("ODE5", mk(OdeFamily::ODE5, 0.5, OneOrMany::One(-1.0), quad.clone(), OneOrMany::One(0.0))),
        ("SEQ3", mk(OdeFamily::SEQ3, 0.5, OneOrMany::Many(vec![1.0, -1.0]), quad.clone(), OneOrMany::One(0.0))),
        ("SEQ6", mk(OdeFamily::SEQ6, 0.5, OneOrMany::Many(vec![1.0, -1.0]), quad.clone(), OneOrMany::Many(vec![0.0, 0.0]))),
    ];
    let mut seq = Vec::new();
    for (name, s) in &specs {
        let res = ode::solve_linear(s, pol).and_then(|sol| {
            let r = ode::linear_residual(s, &sol, pol);
            if name.starts_with("SEQ") {
                seq.push(sol.f);
            }
            r
        });
        c.check(format!("{name} residual"), 1e-4, res);
    }
    if let [abr, abc] = &seq[..] {
        let gap = abr.values().iter().zip(abc.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        c.check("SEQ3 vs SEQ6 with zero initial values", 1e-6, Ok(gap));
    }
    let spec = NonlinearConvSpec {
        alpha: 0.5,
        coeff: 0.5,
        g: FnLiteral::Poly { coeffs: vec![0.0, -0.5] },
        f0: 1.0,
        branch: Branch::Auto,
        norm: Normalization::Unit,
    };
    let dev = ode::solve_nonlinear_conv(&spec, Grid { a: 0.0, b: 2.0, n: 41 }, TALBOT_DEFAULT_NODES)
        .map(|f| f.values().iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max));
    c.check("nonlinear g=-At f0=1 gives f=1", 1e-6, dev);
}

fn riccati(c: &mut Collector) {
    for (p, q) in [(-1.0, 1.0), (-4.0, 1.0), (0.0, 1.0)] {
        for sign in [RootSign::Plus, RootSign::Minus] {
            let label = format!("P={p} Q={q} sign={sign:?} alpha=0.3");
            let spec = RiccatiSpec::new(p, q, 0.3, Normalization::Unit, sign);
            let ident = spec.clone().and_then(|s| riccati_coefficients(&s, 8).map(|a| coefficient_identity_defect(&s, &a)));
            c.check(format!("coefficient identity {label}"), 1e-12, ident);
            let res = spec.and_then(|s| riccati_residual(&s, 8, 0.0, 1.0, 41));
            c.check(format!("residual {label}"), 1e-12, res);
        }
    }
}

fn rules(c: &mut Collector, pol: &TruncationPolicy) {
    for a in [0.3, 0.6] {
        let gap = (|| {
            let u = PowerSum::monomial(0.0, 1.0, 2.0)?;
            let v = PowerSum::monomial(0.0, 1.0, 1.0)?;
            product_rule_gap(&u, &v, &ABParams::unit(a)?, &RuleTruncation::default(), 0.1, 2.0, 96, pol)
        })();
        c.check(format!("product rule u=t^2 v=t alpha={a}"), 1e-8, gap);
    }
}

fn semigroup(c: &mut Collector, pol: &TruncationPolicy) {
    let mut worst_root = 0.0f64;
    let mut worst_form = 0.0f64;
    for i in 1..=9 {
        for j in 1..=9 {
            let (a, b) = (0.1 * i as f64, 0.1 * j as f64);
            if let Ok(p) = IndicialPoly::new(a, b) {
                worst_root = worst_root.max(p.eval_factored(1.0).abs()).max(p.eval_expanded(1.0).abs());
            }
        }
        if let Ok(p) = IndicialPoly::new(0.1 * i as f64, 0.1 * i as f64) {
            for k in 0..50 {
                let x = 0.1 + 0.1 * k as f64;
                let d = (p.eval_expanded(x) - p.eval_equal_order(x).unwrap_or(f64::NAN)).abs();
                worst_form = worst_form.max(if d.is_nan() { f64::INFINITY } else { d });
            }
        }
    }
    c.check("indicial P(1) on 9x9 grid", 1e-14, Ok(worst_root));
    c.check("indicial factored vs expanded", 1e-12, Ok(worst_form));
    let res = SemigroupSolution::new(3).and_then(|s| s.fde_residual(0.5, 2.0, 257, pol));
    c.check("solution q=3 differential residual", 1e-3, res);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_identity_case() {
        let args = VerifyArgs {
            suite: Suite::Inverse,
            alpha: Some(0.4),
            beta: None,
            f: Some(FnLiteral::Poly { coeffs: vec![0.0, 1.0] }),
        };
        let r = run_suite(&args, &TruncationPolicy::default());
        assert_eq!(r.checks.len(), 6);
        assert!(r.ok(), "{}", r.to_json());
    }

    #[test]
    fn failures_are_reported_not_raised() {
        let args = VerifyArgs { suite: Suite::Inverse, alpha: Some(1.5), beta: None, f: None };
        let r = run_suite(&args, &TruncationPolicy::default());
        assert_eq!(r.failed, 1);
        assert!(r.checks[0].error.is_some());
    }
}
