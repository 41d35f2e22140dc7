//! End-to-end acceptance criteria. Each criterion prints one PASS/FAIL line
//! with its measured error; the target runs without the libtest harness so
//! the lines always show up in `cargo test` output.

use mlkcalc::ab_ops::{ab_integral, abr_derivative_kernel, abr_derivative_series, verify_inverse_identities, ABParams};
use mlkcalc::laplace::{abr_transfer, literal_transform, talbot_invert, TALBOT_DEFAULT_NODES};
use mlkcalc::ode::{self, Branch, Grid, LinearODESpec, NonlinearConvSpec, OdeFamily, OneOrMany};
use mlkcalc::riccati::{coefficient_identity_defect, riccati_coefficients, riccati_residual, RiccatiSpec, RootSign};
use mlkcalc::rules::{chain_rule_terms, generalized_binomial, product_rule, product_rule_gap, RuleTruncation};
use mlkcalc::semigroup::{semigroup_sides, IndicialPoly, SemigroupCase, SemigroupSolution};
use mlkcalc::specialfn::{gamma, mittag_leffler2};
use mlkcalc::{sample, FnLiteral, Normalization, PowerSum, SmoothFn, TruncationPolicy};
use num_complex::Complex64;
use std::time::{Duration, Instant};

fn pol() -> TruncationPolicy {
    TruncationPolicy::default()
}

fn mono(c: f64, e: f64) -> PowerSum {
    PowerSum::monomial(0.0, c, e).unwrap()
}

fn points(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(id: u32, budget: Duration, body: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = body();
    let took = start.elapsed();
    if took > budget {
        out.pass = false;
        out.detail.push_str(&format!("; over time budget {budget:?}"));
    }
    println!("criterion {id:>2}: {} ({:.2?}) {}", if out.pass { "PASS" } else { "FAIL" }, took, out.detail);
    out
}

fn criterion_01_semigroup_counterexample() {
    let g73 = gamma(7.0 / 3.0).unwrap();
    let g83 = gamma(8.0 / 3.0).unwrap();
    let mut nested_third = 0.0;
    let out = report(1, Duration::from_secs(1), || {
        let case = SemigroupCase::new(1.0 / 3.0, 1.0 / 3.0, Normalization::Unit).unwrap();
        let (joint, nested) = semigroup_sides(&case, &mono(1.0, 1.0)).unwrap();
        let printed_joint = [(1.0 / 3.0, 1.0), (2.0 / (3.0 * g83), 5.0 / 3.0)];
        let printed_nested = [(4.0 / 9.0, 1.0), (4.0 / (9.0 * g73), 4.0 / 3.0), (1.0 / (3.0 * g83), 5.0 / 3.0)];
        let mut misses = Vec::new();
        let mut cmp = |side: &str, got: &[(f64, f64)], want: &[(f64, f64)]| {
            if got.len() != want.len() {
                misses.push(format!("{side}: {} terms, expected {}", got.len(), want.len()));
                return;
            }
            for (i, (g, w)) in got.iter().zip(want).enumerate() {
                if (g.0 - w.0).abs() > 1e-12 || (g.1 - w.1).abs() > 1e-12 {
                    misses.push(format!("{side}[{i}] = {:.15} vs printed {:.15}", g.0, w.0));
                }
            }
        };
        cmp("AB I^(2/3) t", joint.terms(), &printed_joint);
        cmp("AB I^(1/3) AB I^(1/3) t", nested.terms(), &printed_nested);
        nested_third = nested.terms().get(2).map_or(f64::NAN, |t| t.0);
        Outcome {
            pass: misses.is_empty(),
            detail: if misses.is_empty() { "all coefficients match".into() } else { misses.join("; ") },
        }
    });
    // The printed t^{5/3} coefficient 1/(3Γ(8/3)) drops a factor α/B = 1/3;
    // the composition gives 1/(9Γ(8/3)), which is what is pinned here.
    assert!(!out.pass, "criterion 1 unexpectedly matches the printed coefficient");
    assert!((nested_third - 1.0 / (9.0 * g83)).abs() < 1e-12);
}

fn criterion_02_worked_example_constant() {
    let out = report(2, Duration::from_secs(5), || {
        let mut worst = 0.0f64;
        let mut worst_inv = 0.0f64;
        for alpha in [0.3, 0.5, 0.7] {
            let p = ABParams::unit(alpha).unwrap();
            let (d, _) = abr_derivative_series(&mono(1.0, 0.0), &p, &pol(), 2.0).unwrap();
            for t in points(0.1, 2.0, 257) {
                let want = p.prefactor() * mittag_leffler2(alpha, 1.0, -p.lambda() * t.powf(alpha), &pol()).unwrap();
                worst = worst.max((d.eval(t).unwrap() - want).abs());
            }
            let back = ab_integral(&d, &p).unwrap();
            worst_inv = worst_inv.max(back.sub(&mono(1.0, 0.0)).unwrap().max_abs_on(0.1, 2.0, 257).unwrap());
        }
        Outcome {
            pass: worst < 1e-8 && worst_inv < 1e-8,
            detail: format!("max |series - closed form| = {worst:.1e}, max |AB I(ABR D 1) - 1| = {worst_inv:.1e} (tol 1e-8)"),
        }
    });
    assert!(out.pass);
}

fn criterion_03_path_cross_validation() {
    let out = report(3, Duration::from_secs(60), || {
        let fs = [
            FnLiteral::Poly { coeffs: vec![1.0] },
            FnLiteral::Poly { coeffs: vec![0.0, 1.0] },
            FnLiteral::Poly { coeffs: vec![0.0, 0.0, 1.0] },
            FnLiteral::Exp { rate: 1.0, scale: 1.0 },
        ];
        let mut worst = 0.0f64;
        let mut min_order = f64::INFINITY;
        for alpha in [0.3, 0.5, 0.7] {
            let p = ABParams::unit(alpha).unwrap();
            for (i, f) in fs.iter().enumerate() {
                let (ser, _) = abr_derivative_series(&f.to_powersum(0.0, 2.0).unwrap(), &p, &pol(), 2.0).unwrap();
                let err = |n: usize| {
                    let k = abr_derivative_kernel(&sample(&f.to_smooth().unwrap(), 0.0, 2.0, n).unwrap(), &p, &pol()).unwrap();
                    k.values().iter().enumerate().map(|(j, v)| (v - ser.eval(k.t(j)).unwrap()).abs()).fold(0.0, f64::max)
                };
                worst = worst.max(err(4097));
                // 1 and t are integrated exactly; the order is measured where there is an error to measure
                if i >= 2 {
                    let e: Vec<f64> = [513, 1025, 2049].iter().map(|&n| err(n)).collect();
                    min_order = min_order.min((e[0] / e[1]).log2()).min((e[1] / e[2]).log2());
                }
            }
        }
        Outcome {
            pass: worst < 1e-5 && min_order >= 1.8,
            detail: format!(
                "max kernel-series gap at n=4097 = {worst:.1e} (tol 1e-5), min observed order = {min_order:.2} (need 1.8)"
            ),
        }
    });
    assert!(out.pass);
}

fn criterion_04_identity_suite() {
    let out = report(4, Duration::from_secs(10), || {
        let fs = [mono(1.0, 0.0), mono(1.0, 1.0), mono(1.0, 2.0), PowerSum::new(0.0, [(1.0, 1.0), (1.0, 2.0)]).unwrap()];
        let mut worst = 0.0f64;
        let mut count = 0;
        for f in &fs {
            for a in [0.25, 0.5, 0.75] {
                for b in [0.25, 0.5, 0.75] {
                    let r = verify_inverse_identities(f, &ABParams::unit(a).unwrap(), b, &pol(), 0.0, 2.0, 101).unwrap();
                    worst = worst.max(r.max());
                    count += r.entries().len();
                }
            }
        }
        Outcome { pass: worst < 1e-8, detail: format!("{count} residuals, max {worst:.1e} (tol 1e-8)") }
    });
    assert!(out.pass);
}

fn criterion_05_laplace_consistency() {
    let out = report(5, Duration::from_secs(5), || {
        let p = ABParams::unit(0.5).unwrap();
        let t2 = FnLiteral::Poly { coeffs: vec![0.0, 0.0, 1.0] };
        let h = abr_transfer(&p).mul(&literal_transform(&t2, 0.0, 2.0).unwrap());
        let (ser, _) = abr_derivative_series(&t2.to_powersum(0.0, 2.0).unwrap(), &p, &pol(), 2.0).unwrap();
        let mut worst_op = 0.0f64;
        for t in points(0.1, 2.0, 39) {
            worst_op = worst_op.max((h.invert(t, TALBOT_DEFAULT_NODES).unwrap() - ser.eval(t).unwrap()).abs());
        }
        type Pair = (fn(Complex64) -> Complex64, fn(f64) -> f64);
        let pairs: [Pair; 3] = [
            (|s| 1.0 / (s * s), |t| t),
            (|s| 1.0 / (s + 1.0), |t| (-t).exp()),
            (|s| s.powf(-1.5), |t| 2.0 * (t / std::f64::consts::PI).sqrt()),
        ];
        let mut worst_pair = 0.0f64;
        for (fhat, exact) in pairs {
            for t in points(0.1, 2.0, 39) {
                worst_pair = worst_pair.max((talbot_invert(fhat, t, TALBOT_DEFAULT_NODES).unwrap() - exact(t)).abs());
            }
        }
        Outcome {
            pass: worst_op < 1e-6 && worst_pair < 1e-7,
            detail: format!("ABR t^2 via Talbot vs series {worst_op:.1e} (tol 1e-6), known pairs {worst_pair:.1e} (tol 1e-7)"),
        }
    });
    assert!(out.pass);
}

fn linear(family: OdeFamily, alpha: f64, a: Option<OneOrMany>, g: &FnLiteral, f0: OneOrMany) -> LinearODESpec {
    LinearODESpec {
        family,
        alpha: OneOrMany::One(alpha),
        coeffs: a,
        g: g.clone(),
        f0,
        norm: Normalization::Unit,
        grid: Grid { a: 0.0, b: 2.0, n: 2049 },
    }
}

fn criterion_06_ode_solvers() {
    let out = report(6, Duration::from_secs(120), || {
        let g = FnLiteral::Poly { coeffs: vec![1.0, 0.0, 1.0] };
        let pair = OneOrMany::Many(vec![1.0, -1.0]);
        let seq3 = linear(OdeFamily::SEQ3, 0.5, Some(pair.clone()), &g, OneOrMany::One(0.0));
        let seq6 = linear(OdeFamily::SEQ6, 0.5, Some(pair), &g, OneOrMany::Many(vec![0.0, 0.0]));
        let specs = [
            linear(OdeFamily::ODE1, 0.4, None, &g, OneOrMany::One(0.0)),
            linear(OdeFamily::ODE2, 0.5, Some(OneOrMany::One(1.0)), &g, OneOrMany::One(0.0)),
            linear(OdeFamily::ODE2, 0.5, Some(OneOrMany::One(-1.0)), &g, OneOrMany::One(0.0)),
            linear(OdeFamily::ODE4, 0.4, None, &g, OneOrMany::One(0.5)),
            linear(
                OdeFamily::ODE5,
                0.5,
                Some(OneOrMany::One(-1.0)),
                &FnLiteral::Exp { rate: -1.0, scale: 1.0 },
                OneOrMany::One(0.5),
            ),
            seq3.clone(),
            seq6.clone(),
        ];
        let mut worst_res = 0.0f64;
        for s in &specs {
            let sol = ode::solve_linear(s, &pol()).unwrap();
            worst_res = worst_res.max(ode::linear_residual(s, &sol, &pol()).unwrap());
        }
        let a = ode::solve_linear(&seq3, &pol()).unwrap().f;
        let b = ode::solve_linear(&seq6, &pol()).unwrap().f;
        let gap = (0..a.n()).filter(|&j| a.t(j) >= 0.1).map(|j| (a.values()[j] - b.values()[j]).abs()).fold(0.0, f64::max);
        let nl = NonlinearConvSpec {
            alpha: 0.5,
            coeff: 0.5,
            g: FnLiteral::Poly { coeffs: vec![0.0, -0.5] },
            f0: 1.0,
            branch: Branch::Auto,
            norm: Normalization::Unit,
        };
        let f = ode::solve_nonlinear_conv(&nl, Grid { a: 0.0, b: 2.0, n: 41 }, TALBOT_DEFAULT_NODES).unwrap();
        let dev = f.values().iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
        Outcome {
            pass: gap < 1e-6 && worst_res < 1e-4 && dev < 1e-6,
            detail: format!("SEQ6 vs SEQ3 {gap:.1e} (tol 1e-6), worst residual {worst_res:.1e} (tol 1e-4), nonlinear |f-1| {dev:.1e} (tol 1e-6)"),
        }
    });
    assert!(out.pass);
}

fn criterion_07_riccati() {
    let out = report(7, Duration::from_secs(1), || {
        let mut worst_id = 0.0f64;
        let mut worst_res = 0.0f64;
        // α = 1/2 is avoided: there 2Q·a0 = B/(1−α) for (P, Q) = (−1, 1) and the recursion is undefined
        for alpha in [0.3, 0.6, 0.9] {
            for (p, q) in [(-1.0, 1.0), (-4.0, 1.0), (0.0, 1.0)] {
                for sign in [RootSign::Plus, RootSign::Minus] {
                    let spec = RiccatiSpec::new(p, q, alpha, Normalization::Unit, sign).unwrap();
                    let a = riccati_coefficients(&spec, 10).unwrap();
                    worst_id = worst_id.max(coefficient_identity_defect(&spec, &a));
                    worst_res = worst_res.max(riccati_residual(&spec, 10, 0.0, 1.0, 101).unwrap());
                }
            }
        }
        Outcome {
            pass: worst_id < 1e-12 && worst_res < 1e-12,
            detail: format!("coefficient identity {worst_id:.1e}, residual {worst_res:.1e} (tol 1e-12; constant solutions)"),
        }
    });
    assert!(out.pass);
}

fn criterion_08_rules() {
    let out = report(8, Duration::from_secs(30), || {
        let trunc = RuleTruncation::default();
        let mut worst_prod = 0.0f64;
        for alpha in [0.3, 0.6] {
            let p = ABParams::unit(alpha).unwrap();
            let rule = product_rule(&mono(1.0, 2.0), &SmoothFn::poly(vec![0.0, 1.0]), &p, &trunc, 2.0, 191).unwrap();
            let (direct, _) = abr_derivative_series(&mono(1.0, 3.0), &p, &pol(), 2.0).unwrap();
            for j in 0..rule.values.n() {
                let t = rule.values.t(j);
                if t >= 0.1 {
                    worst_prod = worst_prod.max((rule.values.values()[j] - direct.eval(t).unwrap()).abs());
                }
            }
        }
        let p = ABParams::unit(0.5).unwrap();
        let gaps: Vec<f64> = (1..=5)
            .map(|n| {
                let tr = RuleTruncation::new(40, n).unwrap();
                product_rule_gap(&mono(1.0, 2.0), &mono(1.0, 3.0), &p, &tr, 0.1, 2.0, 96, &pol()).unwrap()
            })
            .collect();
        let monotone = gaps.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-14);
        let alpha = 0.4;
        let p = ABParams::unit(alpha).unwrap();
        let t: f64 = 0.7;
        let terms = chain_rule_terms(
            &SmoothFn::poly(vec![0.0, 0.0, 1.0]),
            &SmoothFn::exp(1.0, 1.0),
            &p,
            &RuleTruncation::new(20, 10).unwrap(),
            t,
        )
        .unwrap();
        let mut worst_chain = 0.0f64;
        for m in 1..=20 {
            for n in 1..=10 {
                let got: f64 = terms.iter().filter(|c| c.m == m && c.n == n).map(|c| c.contribution).sum();
                let want = 2f64.powi(n as i32)
                    * (2.0 * t).exp()
                    * p.prefactor()
                    * (-p.lambda()).powi(m as i32)
                    * generalized_binomial(-(m as f64) * alpha, n)
                    * t.powf(n as f64 + m as f64 * alpha)
                    / gamma(n as f64 + m as f64 * alpha + 1.0).unwrap();
                worst_chain = worst_chain.max((got - want).abs() / want.abs().max(f64::MIN_POSITIVE));
            }
        }
        Outcome {
            pass: worst_prod < 1e-8 && monotone && worst_chain < 1e-10,
            detail: format!(
                "product vs ABR t^3 {worst_prod:.1e} (tol 1e-8), gaps over N_inner=1..5 {} {}, chain per-term rel {worst_chain:.1e} (tol 1e-10)",
                gaps.iter().map(|g| format!("{g:.1e}")).collect::<Vec<_>>().join(" "),
                if monotone { "monotone" } else { "NOT monotone" }
            ),
        }
    });
    assert!(out.pass);
}

fn criterion_09_semigroup() {
    let out = report(9, Duration::from_secs(60), || {
        let mut worst_root = 0.0f64;
        let mut worst_form = 0.0f64;
        for i in 1..=9 {
            for j in 1..=9 {
                let p = IndicialPoly::new(0.1 * i as f64, 0.1 * j as f64).unwrap();
                worst_root = worst_root.max(p.eval_expanded(1.0).abs()).max(p.eval_factored(1.0).abs());
            }
            let p = IndicialPoly::new(0.1 * i as f64, 0.1 * i as f64).unwrap();
            for x in points(0.1, 5.0, 50) {
                worst_form = worst_form.max((p.eval_expanded(x) - p.eval_equal_order(x).unwrap()).abs());
            }
        }
        let fde = SemigroupSolution::new(3).unwrap().fde_residual(0.5, 2.0, 4097, &pol()).unwrap();
        Outcome {
            pass: worst_root < 1e-14 && worst_form < 1e-12 && fde < 1e-3,
            detail: format!("max |P(1)| = {worst_root:.1e} (tol 1e-14, roundoff), factored vs expanded {worst_form:.1e} (tol 1e-12), q=3 residual {fde:.1e} (tol 1e-3)"),
        }
    });
    assert!(out.pass);
}

fn criterion_10_verify_is_deterministic() {
    let out = report(10, Duration::from_secs(60), || {
        let run = || {
            let o = std::process::Command::new(env!("CARGO_BIN_EXE_mlkcalc")).arg("verify").output().expect("binary runs");
            (o.status.code(), o.stdout)
        };
        let (c1, a) = run();
        let (c2, b) = run();
        Outcome {
            pass: a == b && !a.is_empty() && c1 == Some(0) && c2 == Some(0),
            detail: format!("two reports of {} bytes, identical = {}, exit codes {c1:?} {c2:?}", a.len(), a == b),
        }
    });
    assert!(out.pass);
}

fn main() {
    let criteria: [(&str, fn()); 10] = [
        ("criterion_01_semigroup_counterexample", criterion_01_semigroup_counterexample),
        ("criterion_02_worked_example_constant", criterion_02_worked_example_constant),
        ("criterion_03_path_cross_validation", criterion_03_path_cross_validation),
        ("criterion_04_identity_suite", criterion_04_identity_suite),
        ("criterion_05_laplace_consistency", criterion_05_laplace_consistency),
        ("criterion_06_ode_solvers", criterion_06_ode_solvers),
        ("criterion_07_riccati", criterion_07_riccati),
        ("criterion_08_rules", criterion_08_rules),
        ("criterion_09_semigroup", criterion_09_semigroup),
        ("criterion_10_verify_is_deterministic", criterion_10_verify_is_deterministic),
    ];
    let mut broken = Vec::new();
    for (name, check) in criteria {
        if std::panic::catch_unwind(check).is_err() {
            broken.push(name);
        }
    }
    if broken.is_empty() {
        println!("acceptance: all expectations held");
    } else {
        println!("acceptance: unexpected outcome in {}", broken.join(", "));
        std::process::exit(1);
    }
}
