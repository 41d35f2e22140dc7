//! Configuration and execution behind the `mlkcalc` binary.
//!
//! A [`RunConfig`] is either read from JSON or assembled from command-line
//! flags; [`run`] turns it into an [`Artifact`] (a numeric table or a
//! verification report) without touching the filesystem, and
//! [`write_artifact`] renders it.

mod literal;
mod output;
mod verify;

pub use literal::parse_fn_literal;
pub use output::{emit_plot, format_number, svg_plot, table_to_svg, Table};
pub use verify::{run_suite, Check, Suite, VerifyReport};

use crate::ab_ops::{
    ab_integral, ab_integral_grid, abc_derivative_kernel, abc_derivative_series, abr_derivative_kernel, abr_derivative_series,
    ABParams, Normalization,
};
use crate::error::{Error, Result};
use crate::funcmodel::{FnLiteral, PowerSum, SampledFn};
use crate::ode::{self, Branch, Grid, LinearODESpec, NonlinearConvSpec, OdeFamily};
use crate::policy::TruncationPolicy;
use crate::riccati::{self, RiccatiSpec, RootSign};
use crate::rl_ops;
use crate::rules::{self, RuleTruncation};
use crate::semigroup::{self, IndicialPoly, SemigroupCase, SemigroupSolution};
use crate::specialfn::mittag_leffler2;
use serde::{Deserialize, Serialize};
use std::io;
use std::path::{Path, PathBuf};

/// Everything one invocation needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    /// Write here instead of standard output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    /// Overrides the series term cap (and `MLKCALC_MAX_TERMS`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_terms: Option<usize>,
}

impl RunConfig {
    pub fn from_json(src: &str) -> Result<Self> {
        serde_json::from_str(src).map_err(|e| Error::InvalidParams(format!("config: {e}")))
    }

    pub fn policy(&self) -> TruncationPolicy {
        let mut pol = TruncationPolicy::from_env();
        if let Some(cap) = self.max_terms {
            pol.max_terms = cap;
        }
        pol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Svg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    Mlf(MlfArgs),
    AbDeriv(AbDerivArgs),
    AbInt(AbIntArgs),
    Rl(RlArgs),
    Ode(OdeArgs),
    Rule(RuleArgs),
    Semigroup(SemigroupArgs),
    Verify(VerifyArgs),
}

pub fn default_grid() -> Grid {
    Grid { a: 0.0, b: 2.0, n: 257 }
}

fn one() -> f64 {
    1.0
}

fn minus_one() -> f64 {
    -1.0
}

/// E_{α,β}(λ(t − a)^α) on the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlfArgs {
    pub alpha: f64,
    #[serde(default = "one")]
    pub beta: f64,
    #[serde(default = "minus_one")]
    pub lambda: f64,
    #[serde(default = "default_grid")]
    pub grid: Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DerivKind {
    #[default]
    Abr,
    Abc,
}

/// Evaluation path: exact series on power sums, or quadrature on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalPath {
    #[default]
    Series,
    Kernel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbDerivArgs {
    pub alpha: f64,
    pub f: FnLiteral,
    #[serde(default)]
    pub kind: DerivKind,
    #[serde(default)]
    pub path: EvalPath,
    #[serde(default)]
    pub norm: Normalization,
    #[serde(default = "default_grid")]
    pub grid: Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbIntArgs {
    pub alpha: f64,
    pub f: FnLiteral,
    #[serde(default)]
    pub path: EvalPath,
    #[serde(default)]
    pub norm: Normalization,
    #[serde(default = "default_grid")]
    pub grid: Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RlOp {
    #[default]
    Integral,
    Derivative,
    Caputo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RlArgs {
    pub alpha: f64,
    pub f: FnLiteral,
    #[serde(default)]
    pub op: RlOp,
    #[serde(default)]
    pub path: EvalPath,
    #[serde(default = "default_grid")]
    pub grid: Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OdeArgs {
    Linear(LinearODESpec),
    Sequential(LinearODESpec),
    Nonlinear(NonlinearArgs),
    Riccati(RiccatiArgs),
}

fn talbot_nodes() -> usize {
    crate::laplace::TALBOT_DEFAULT_NODES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearArgs {
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
    #[serde(default = "default_grid")]
    pub grid: Grid,
    #[serde(default = "talbot_nodes")]
    pub nodes: usize,
}

fn riccati_m() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiccatiArgs {
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    pub alpha: f64,
    #[serde(default)]
    pub sign: RootSign,
    #[serde(default)]
    pub norm: Normalization,
    #[serde(default = "riccati_m")]
    pub m_max: usize,
    /// Residual evaluation interval.
    #[serde(default = "default_grid")]
    pub grid: Grid,
}

fn m_outer() -> usize {
    RuleTruncation::default().m_outer
}

fn n_inner() -> usize {
    RuleTruncation::default().n_inner
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RuleArgs {
    /// ABR D^α(u·v) with u a power sum.
    Product {
        alpha: f64,
        u: FnLiteral,
        v: FnLiteral,
        #[serde(default = "m_outer")]
        m_outer: usize,
        #[serde(default = "n_inner")]
        n_inner: usize,
        #[serde(default = "default_grid")]
        grid: Grid,
    },
    /// ABR D^α f(g(t)); with `terms_at` set, the (m, n, k) contributions at that t.
    Chain {
        alpha: f64,
        outer: FnLiteral,
        inner: FnLiteral,
        #[serde(default = "m_outer")]
        m_outer: usize,
        #[serde(default = "n_inner")]
        n_inner: usize,
        #[serde(default = "default_grid")]
        grid: Grid,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        terms_at: Option<f64>,
    },
}

fn indicial_grid() -> Grid {
    Grid { a: 0.1, b: 5.0, n: 50 }
}

fn solution_grid() -> Grid {
    Grid { a: 0.5, b: 2.0, n: 257 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SemigroupArgs {
    /// Both sides of the semigroup law and their difference.
    Defect {
        alpha: f64,
        beta: f64,
        f: FnLiteral,
        #[serde(default)]
        norm: Normalization,
        #[serde(default = "default_grid")]
        grid: Grid,
    },
    Fie {
        alpha: f64,
        beta: f64,
        f: FnLiteral,
        #[serde(default)]
        norm: Normalization,
        #[serde(default = "default_grid")]
        grid: Grid,
    },
    Indicial {
        alpha: f64,
        beta: f64,
        #[serde(default = "indicial_grid")]
        grid: Grid,
    },
    Solution {
        q: u32,
        #[serde(default = "solution_grid")]
        grid: Grid,
    },
    /// Differential-condition residual of the solution family.
    Fde {
        q: u32,
        #[serde(default = "solution_grid")]
        grid: Grid,
    },
    /// Differential-condition residual of an arbitrary power sum.
    FdePower {
        alpha: f64,
        beta: f64,
        f: FnLiteral,
        #[serde(default = "solution_grid")]
        grid: Grid,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyArgs {
    #[serde(default)]
    pub suite: Suite,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<FnLiteral>,
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub enum Artifact {
    Table(Table),
    Report(VerifyReport),
}

fn table_from(f: &SampledFn, name: &str) -> Table {
    let mut t = Table::new(["t", name]);
    for (j, &v) in f.values().iter().enumerate() {
        t.push(vec![f.t(j), v]);
    }
    t
}

fn table_from_power(f: &PowerSum, grid: Grid) -> Result<Table> {
    let mut t = Table::new(["t", "value"]);
    for x in grid.times()? {
        t.push(vec![x, f.eval(x)?]);
    }
    Ok(t)
}

fn sample_literal(f: &FnLiteral, grid: Grid) -> Result<SampledFn> {
    SampledFn::from_fn(grid.a, grid.b, grid.n, |t| f.eval(t))
}

fn powersum_of(f: &FnLiteral, grid: Grid) -> Result<PowerSum> {
    f.to_powersum(grid.a, grid.b - grid.a)
}

/// Execute a configuration.
pub fn run(cfg: &RunConfig) -> Result<Artifact> {
    let pol = cfg.policy();
    if cfg.format == Format::Svg && matches!(cfg.command, Command::Verify(_)) {
        return Err(Error::InvalidParams("verify emits a JSON report, not a plot".into()));
    }
    let table = match &cfg.command {
        Command::Mlf(a) => {
            let mut t = Table::new(["t", "value"]);
            for x in a.grid.times()? {
                let z = a.lambda * (x - a.grid.a).max(0.0).powf(a.alpha);
                t.push(vec![x, mittag_leffler2(a.alpha, a.beta, z, &pol)?]);
            }
            t
        }
        Command::AbDeriv(a) => run_ab_deriv(a, &pol)?,
        Command::AbInt(a) => {
            let p = ABParams::new(a.alpha, a.grid.a, a.norm)?;
            match a.path {
                EvalPath::Series => table_from_power(&ab_integral(&powersum_of(&a.f, a.grid)?, &p)?, a.grid)?,
                EvalPath::Kernel => table_from(&ab_integral_grid(&sample_literal(&a.f, a.grid)?, &p)?, "value"),
            }
        }
        Command::Rl(a) => run_rl(a)?,
        Command::Ode(a) => run_ode(a, &pol)?,
        Command::Rule(a) => run_rule(a, &pol)?,
        Command::Semigroup(a) => run_semigroup(a, &pol)?,
        Command::Verify(a) => return Ok(Artifact::Report(run_suite(a, &pol))),
    };
    Ok(Artifact::Table(table))
}

fn run_ab_deriv(a: &AbDerivArgs, pol: &TruncationPolicy) -> Result<Table> {
    let p = ABParams::new(a.alpha, a.grid.a, a.norm)?;
    Ok(match (a.kind, a.path) {
        (kind, EvalPath::Series) => {
            let f = powersum_of(&a.f, a.grid)?;
            let (d, report) = match kind {
                DerivKind::Abr => abr_derivative_series(&f, &p, pol, a.grid.b)?,
                DerivKind::Abc => abc_derivative_series(&f, &p, pol, a.grid.b)?,
            };
            log::info!("series terms used: {}", report.terms_used);
            let mut t = Table::new(["t", "value", "tail_estimate"]);
            for x in a.grid.times()? {
                t.push(vec![x, d.eval(x)?, report.tail_estimate]);
            }
            t
        }
        (DerivKind::Abr, EvalPath::Kernel) => {
            table_from(&abr_derivative_kernel(&sample_literal(&a.f, a.grid)?, &p, pol)?, "value")
        }
        (DerivKind::Abc, EvalPath::Kernel) => {
            table_from(&abc_derivative_kernel(&a.f.to_smooth()?, &p, a.grid.b, a.grid.n, pol)?, "value")
        }
    })
}

fn run_rl(a: &RlArgs) -> Result<Table> {
    match a.path {
        EvalPath::Series => {
            let f = powersum_of(&a.f, a.grid)?;
            let r = match a.op {
                RlOp::Integral => rl_ops::rl_integral_power(&f, a.alpha)?,
                RlOp::Derivative => rl_ops::rl_derivative_power(&f, a.alpha)?,
                RlOp::Caputo => rl_ops::caputo_derivative_power(&f, a.alpha)?,
            };
            table_from_power(&r, a.grid)
        }
        EvalPath::Kernel => {
            let r = match a.op {
                RlOp::Integral => rl_ops::rl_integral_grid(&sample_literal(&a.f, a.grid)?, a.alpha)?,
                RlOp::Derivative => rl_ops::rl_derivative_grid(&sample_literal(&a.f, a.grid)?, a.alpha)?,
                RlOp::Caputo => rl_ops::caputo_derivative_smooth(&a.f.to_smooth()?, a.alpha, a.grid.a, a.grid.b, a.grid.n)?,
            };
            Ok(table_from(&r, "value"))
        }
    }
}

fn run_ode(a: &OdeArgs, pol: &TruncationPolicy) -> Result<Table> {
    match a {
        OdeArgs::Linear(spec) | OdeArgs::Sequential(spec) => {
            let sequential = matches!(spec.family, OdeFamily::SEQ3 | OdeFamily::SEQ6);
            if sequential != matches!(a, OdeArgs::Sequential(_)) {
                return Err(Error::InvalidParams(format!("family {:?} does not match the ode kind", spec.family)));
            }
            let sol = ode::solve_linear(spec, pol)?;
            log::info!("defining-equation residual: {:e}", ode::linear_residual(spec, &sol, pol)?);
            Ok(table_from(&sol.f, "value"))
        }
        OdeArgs::Nonlinear(n) => {
            let spec =
                NonlinearConvSpec { alpha: n.alpha, coeff: n.coeff, g: n.g.clone(), f0: n.f0, branch: n.branch, norm: n.norm };
            let f = ode::solve_nonlinear_conv(&spec, n.grid, n.nodes)?;
            let from = n.grid.a + (n.grid.b - n.grid.a) / 20.0;
            log::info!("defining-equation residual: {:e}", ode::nonlinear_residual(&spec, &f, from, pol)?);
            Ok(table_from(&f, "value"))
        }
        OdeArgs::Riccati(r) => {
            let spec = RiccatiSpec::new(r.p, r.q, r.alpha, r.norm, r.sign)?;
            let coeffs = riccati::riccati_coefficients(&spec, r.m_max)?;
            let mut t = Table::new(["m", "coefficient", "residual"]);
            for (m, &c) in coeffs.iter().enumerate() {
                let res = riccati::riccati_residual(&spec, m, r.grid.a, r.grid.b, r.grid.n)?;
                t.push(vec![m as f64, c, res]);
            }
            Ok(t)
        }
    }
}

fn run_rule(a: &RuleArgs, pol: &TruncationPolicy) -> Result<Table> {
    match a {
        RuleArgs::Product { alpha, u, v, m_outer, n_inner, grid } => {
            let p = ABParams::new(*alpha, grid.a, Normalization::Unit)?;
            let trunc = RuleTruncation::new(*m_outer, *n_inner)?;
            log::info!("truncation m_outer={} n_inner={}", trunc.m_outer, trunc.n_inner);
            let r = rules::product_rule(&powersum_of(u, *grid)?, &v.to_smooth()?, &p, &trunc, grid.b, grid.n)?;
            Ok(table_from(&r.values, "value"))
        }
        RuleArgs::Chain { alpha, outer, inner, m_outer, n_inner, grid, terms_at } => {
            let p = ABParams::new(*alpha, grid.a, Normalization::Unit)?;
            let trunc = RuleTruncation::new(*m_outer, *n_inner)?;
            log::info!("truncation m_outer={} n_inner={}", trunc.m_outer, trunc.n_inner);
            let (f, g) = (outer.to_smooth()?, inner.to_smooth()?);
            if let Some(t) = terms_at {
                let mut tab = Table::new(["m", "n", "k", "contribution"]);
                for term in rules::chain_rule_terms(&f, &g, &p, &trunc, *t)? {
                    tab.push(vec![term.m as f64, term.n as f64, term.k as f64, term.contribution]);
                }
                return Ok(tab);
            }
            Ok(table_from(&rules::chain_rule(&f, &g, &p, &trunc, grid.b, grid.n, pol)?, "value"))
        }
    }
}

fn run_semigroup(a: &SemigroupArgs, pol: &TruncationPolicy) -> Result<Table> {
    match a {
        SemigroupArgs::Defect { alpha, beta, f, norm, grid } => {
            let case = SemigroupCase::new(*alpha, *beta, *norm)?;
            let (joint, nested) = semigroup::semigroup_sides(&case, &powersum_of(f, *grid)?)?;
            let mut t = Table::new(["t", "nested", "joint", "defect"]);
            for x in grid.times()? {
                let (n, j) = (nested.eval(x)?, joint.eval(x)?);
                t.push(vec![x, n, j, n - j]);
            }
            Ok(t)
        }
        SemigroupArgs::Fie { alpha, beta, f, norm, grid } => {
            let case = SemigroupCase::new(*alpha, *beta, *norm)?;
            table_from_power(&semigroup::fie_residual(&case, &powersum_of(f, *grid)?)?, *grid)
        }
        SemigroupArgs::Indicial { alpha, beta, grid } => {
            let p = IndicialPoly::new(*alpha, *beta)?;
            let mut t = Table::new(["x", "expanded", "factored"]);
            for x in grid.times()? {
                t.push(vec![x, p.eval_expanded(x), p.eval_factored(x)]);
            }
            Ok(t)
        }
        SemigroupArgs::Solution { q, grid } | SemigroupArgs::Fde { q, grid } => {
            if grid.a <= 0.0 {
                return Err(Error::Domain("the solution family is singular at t = 0; start the grid above 0".into()));
            }
            let s = SemigroupSolution::new(*q)?;
            let residual = matches!(a, SemigroupArgs::Fde { .. });
            let mut t = Table::new(["t", if residual { "residual" } else { "value" }]);
            for x in grid.times()? {
                t.push(vec![x, if residual { s.fde_residual_at(x, pol)? } else { s.eval(x, pol)? }]);
            }
            Ok(t)
        }
        SemigroupArgs::FdePower { alpha, beta, f, grid } => {
            let f = f.to_powersum(0.0, grid.b)?;
            table_from_power(&semigroup::fde_residual_power(&f, *alpha, *beta)?, *grid)
        }
    }
}

/// Render to `path`, or to standard output when `path` is None.
pub fn write_artifact(artifact: &Artifact, format: Format, path: Option<&Path>) -> io::Result<()> {
    let text = match (artifact, format) {
        (Artifact::Table(t), Format::Csv) => t.to_csv(),
        (Artifact::Table(t), Format::Svg) => {
            if t.rows.is_empty() {
                return Err(io::Error::new(io::ErrorKind::InvalidInput, "nothing to plot"));
            }
            table_to_svg(t)
        }
        (Artifact::Report(r), _) => r.to_json(),
    };
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            use std::io::Write;
            io::stdout().lock().write_all(text.as_bytes())
        }
    }
}

/// Process exit status for a failed run.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_validation() {
        2
    } else {
        3
    }
}

/// Exit status when a verification report has failing checks.
pub const EXIT_VERIFY_FAILED: i32 = 1;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specialfn::gamma;

    fn cfg(json: &str) -> RunConfig {
        RunConfig::from_json(json).unwrap()
    }

    fn table(json: &str) -> Table {
        match run(&cfg(json)).unwrap() {
            Artifact::Table(t) => t,
            Artifact::Report(_) => panic!("expected a table"),
        }
    }

    #[test]
    fn ab_int_closed_form() {
        let t = table(r#"{"command":{"name":"ab-int","alpha":0.6667,"f":{"kind":"powersum","terms":[[1,1]]}}}"#);
        let a: f64 = 0.6667;
        for row in &t.rows {
            let want = (1.0 - a) * row[0] + a * row[0].powf(1.0 + a) / gamma(2.0 + a).unwrap();
            assert!((row[1] - want).abs() < 1e-14);
        }
        let g83 = gamma(8.0 / 3.0).unwrap();
        let last = t.rows.last().unwrap();
        let printed = last[0] / 3.0 + 2.0 / (3.0 * g83) * last[0].powf(5.0 / 3.0);
        assert!((last[1] - printed).abs() < 1e-3);
    }

    #[test]
    fn bad_configs_are_validation_errors() {
        for bad in ["{not json", r#"{"command":{"name":"nope"}}"#, r#"{"command":{"name":"mlf","alpha":0.5,"extra":1}}"#] {
            assert!(RunConfig::from_json(bad).unwrap_err().is_validation());
        }
        let err = run(&cfg(r#"{"command":{"name":"ab-int","alpha":1.5,"f":{"kind":"poly","coeffs":[1]}}}"#)).unwrap_err();
        assert_eq!(exit_code(&err), 2);
    }

    #[test]
    fn config_round_trip() {
        let src = r#"{"command":{"name":"ode","kind":"linear","family":"ODE5","alpha":0.5,"A":-1,"g":{"kind":"poly","coeffs":[0]},"f0":1,"grid":{"a":0,"b":2,"n":65}}}"#;
        let c = cfg(src);
        assert_eq!(RunConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap(), c);
        let t = table(src);
        assert_eq!(t.rows.len(), 65);
    }

    #[test]
    fn semigroup_tables() {
        let t = table(
            r#"{"command":{"name":"semigroup","kind":"defect","alpha":0.3333333333333333,"beta":0.3333333333333333,"f":{"kind":"poly","coeffs":[0,1]},"grid":{"a":0,"b":1,"n":11}}}"#,
        );
        assert_eq!(t.columns, ["t", "nested", "joint", "defect"]);
        assert!(t.rows[10][3].abs() > 1e-3);
        let s = table(r#"{"command":{"name":"semigroup","kind":"solution","q":3,"grid":{"a":1,"b":2,"n":2}}}"#);
        assert!((s.rows[0][1] - 12.581_088_289_997_816_675).abs() < 1e-8);
    }

    #[test]
    fn riccati_table() {
        let t = table(r#"{"command":{"name":"ode","kind":"riccati","P":-1,"Q":1,"alpha":0.3,"m_max":4}}"#);
        assert_eq!(t.rows.len(), 5);
        assert_eq!(t.rows[0][1], 1.0);
        assert!(t.rows.iter().all(|r| r[2] < 1e-12));
    }
}
