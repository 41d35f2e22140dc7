//! Browser bindings for the `www/` demo page.
//!
//! Each export returns a JSON object `{ "svg": ..., ... }` so the page only
//! has to drop the markup into the DOM and print the numbers.

use mlkcalc::ab_ops::{abr_derivative_kernel, abr_derivative_series};
use mlkcalc::cli::{parse_fn_literal, svg_plot};
use mlkcalc::semigroup::SemigroupSolution;
use mlkcalc::specialfn::mittag_leffler2;
use mlkcalc::{ABParams, Normalization, Result, SampledFn, TruncationPolicy};
use serde_json::json;
use wasm_bindgen::prelude::*;

const MAX_POINTS: usize = 2049;

fn grid(b: f64, n: usize) -> Result<Vec<f64>> {
    if !(2..=MAX_POINTS).contains(&n) {
        return Err(mlkcalc::Error::InvalidParams(format!("points must be in 2..={MAX_POINTS}")));
    }
    Ok(SampledFn::from_fn(0.0, b, n, |_| Ok(0.0))?.times())
}

/// E_{α,β}(λ t^α) on [0, b].
pub fn ml_curve(alpha: f64, beta: f64, lambda: f64, b: f64, n: usize) -> Result<String> {
    let pol = TruncationPolicy::default();
    let t = grid(b, n)?;
    let y = t.iter().map(|&x| mittag_leffler2(alpha, beta, lambda * x.powf(alpha), &pol)).collect::<Result<Vec<_>>>()?;
    let svg = svg_plot(&t, &[(format!("E_{{{alpha},{beta}}}"), y)]);
    Ok(json!({ "svg": svg }).to_string())
}

/// ABR derivative of `f` by the exact series and by kernel quadrature.
pub fn abr_compare(alpha: f64, f: &str, b: f64, n: usize) -> Result<String> {
    let pol = TruncationPolicy::default();
    let lit = parse_fn_literal(f)?;
    let t = grid(b, n)?;
    let p = ABParams::new(alpha, 0.0, Normalization::Unit)?;
    let (series, report) = abr_derivative_series(&lit.to_powersum(0.0, b)?, &p, &pol, b)?;
    let sampled = SampledFn::from_fn(0.0, b, n, |x| lit.eval(x))?;
    let kernel = abr_derivative_kernel(&sampled, &p, &pol)?;
    let s = t.iter().map(|&x| series.eval(x)).collect::<Result<Vec<_>>>()?;
    let k = kernel.values().to_vec();
    // t = 0 is skipped: the kernel path is one-sided there
    let gap = s.iter().zip(&k).skip(1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let svg = svg_plot(&t, &[("series".into(), s), ("kernel".into(), k)]);
    Ok(json!({ "svg": svg, "gap": gap, "terms": report.terms_used }).to_string())
}

/// Closed-form solution of the order-(1/q, 1/q) defect equation.
pub fn semigroup_solution(q: u32, b: f64, n: usize) -> Result<String> {
    let pol = TruncationPolicy::default();
    let sol = SemigroupSolution::new(q)?;
    // the solution blows up like t^{-1+1/q} at the origin
    let lo = b / (n as f64);
    let t: Vec<f64> = SampledFn::from_fn(lo, b, n.clamp(2, MAX_POINTS), |_| Ok(0.0))?.times();
    let y = t.iter().map(|&x| sol.eval(x, &pol)).collect::<Result<Vec<_>>>()?;
    let residual = sol.fde_residual(lo, b, t.len(), &pol)?;
    let svg = svg_plot(&t, &[(format!("q = {q}"), y)]);
    Ok(json!({ "svg": svg, "residual": residual }).to_string())
}

fn js(r: Result<String>) -> std::result::Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = mlCurve)]
pub fn ml_curve_js(alpha: f64, beta: f64, lambda: f64, b: f64, n: usize) -> std::result::Result<String, JsError> {
    js(ml_curve(alpha, beta, lambda, b, n))
}

#[wasm_bindgen(js_name = abrCompare)]
pub fn abr_compare_js(alpha: f64, f: &str, b: f64, n: usize) -> std::result::Result<String, JsError> {
    js(abr_compare(alpha, f, b, n))
}

#[wasm_bindgen(js_name = semigroupSolution)]
pub fn semigroup_solution_js(q: u32, b: f64, n: usize) -> std::result::Result<String, JsError> {
    js(semigroup_solution(q, b, n))
}
