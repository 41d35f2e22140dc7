use clap::{Args, Parser, Subcommand, ValueEnum};
use mlkcalc::cli::{
    self, default_grid, parse_fn_literal, AbDerivArgs, AbIntArgs, Artifact, Command, DerivKind, EvalPath, Format, MlfArgs,
    NonlinearArgs, OdeArgs, RiccatiArgs, RlArgs, RlOp, RuleArgs, RunConfig, SemigroupArgs, Suite, VerifyArgs,
};
use mlkcalc::ode::{Grid, LinearODESpec};
use mlkcalc::riccati::RootSign;
use mlkcalc::{Error, FnLiteral, Normalization};
use std::path::PathBuf;
use std::process::ExitCode;

/// Fractional calculus with Mittag-Leffler kernels.
///
/// Tables go to standard output as CSV (`t,value[,tail_estimate]`) unless
/// `--out` is given. Exit status: 0 success, 1 failed verification,
/// 2 invalid input, 3 numerical failure.
#[derive(Parser, Debug)]
#[command(name = "mlkcalc", version)]
struct Cli {
    /// Read the whole run configuration from a JSON file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (standard output when absent).
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Cap on series terms; overrides MLKCALC_MAX_TERMS.
    #[arg(long, global = true)]
    max_terms: Option<usize>,
    /// Log diagnostics (residuals, truncation) to standard error.
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FormatArg {
    Csv,
    Svg,
}

#[derive(Args, Debug, Clone, Copy)]
struct GridOpts {
    /// Left end of the grid (also the operator base point).
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    /// Number of grid points.
    #[arg(long)]
    n: Option<usize>,
}

impl GridOpts {
    fn or(self, d: Grid) -> Grid {
        Grid { a: self.a.unwrap_or(d.a), b: self.b.unwrap_or(d.b), n: self.n.unwrap_or(d.n) }
    }

    fn grid(self) -> Grid {
        self.or(default_grid())
    }
}

fn literal(s: &str) -> Result<FnLiteral, String> {
    parse_fn_literal(s).map_err(|e| e.to_string())
}

/// B(α) = e^{λα} when given, B ≡ 1 otherwise.
fn norm(lambda: Option<f64>) -> Normalization {
    lambda.map_or(Normalization::Unit, |lambda| Normalization::Exponential { lambda })
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Table of E_{α,β}(λ(t−a)^α).
    Mlf {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
        lambda: f64,
        #[command(flatten)]
        grid: GridOpts,
    },
    /// ABR or ABC derivative of a function literal.
    AbDeriv {
        #[arg(long)]
        alpha: f64,
        /// JSON literal or shorthand such as "t", "1+t^2", "exp(2*t)".
        #[arg(long, value_parser = literal, allow_hyphen_values = true)]
        f: FnLiteral,
        #[arg(long, value_enum, default_value = "abr")]
        kind: KindArg,
        #[arg(long, value_enum, default_value = "series")]
        path: PathArg,
        /// Use B(α) = exp(λα).
        #[arg(long, allow_hyphen_values = true)]
        norm_lambda: Option<f64>,
        #[command(flatten)]
        grid: GridOpts,
    },
    /// AB integral of a function literal.
    AbInt {
        #[arg(long)]
        alpha: f64,
        #[arg(long, value_parser = literal, allow_hyphen_values = true)]
        f: FnLiteral,
        #[arg(long, value_enum, default_value = "series")]
        path: PathArg,
        #[arg(long, allow_hyphen_values = true)]
        norm_lambda: Option<f64>,
        #[command(flatten)]
        grid: GridOpts,
    },
    /// Riemann–Liouville integral or derivative, or Caputo derivative.
    Rl {
        #[arg(long)]
        alpha: f64,
        #[arg(long, value_parser = literal, allow_hyphen_values = true)]
        f: FnLiteral,
        #[arg(long, value_enum, default_value = "integral")]
        op: OpArg,
        #[arg(long, value_enum, default_value = "series")]
        path: PathArg,
        #[command(flatten)]
        grid: GridOpts,
    },
    /// Fractional ODE solvers.
    #[command(subcommand)]
    Ode(OdeCmd),
    /// Product and chain rule expansions.
    #[command(subcommand)]
    Rule(RuleCmd),
    /// Semigroup defect, integral and differential conditions, solution family.
    #[command(subcommand)]
    Semigroup(SemiCmd),
    /// Run identity suites and print a JSON pass/fail report.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: SuiteArg,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, value_parser = literal, allow_hyphen_values = true)]
        f: Option<FnLiteral>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum KindArg {
    Abr,
    Abc,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum PathArg {
    Series,
    Kernel,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum OpArg {
    Integral,
    Derivative,
    Caputo,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SuiteArg {
    Inverse,
    Series,
    Laplace,
    Ode,
    Riccati,
    Rules,
    Semigroup,
    All,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SignArg {
    Plus,
    Minus,
}

#[derive(Subcommand, Debug)]
enum OdeCmd {
    /// ODE1, ODE2, ODE4 or ODE5 from a JSON spec file.
    Linear {
        #[arg(long)]
        spec: PathBuf,
    },
    /// SEQ3 or SEQ6 from a JSON spec file.
    Sequential {
        #[arg(long)]
        spec: PathBuf,
    },
    /// ABC D^α f − A(f∗f) = g from a JSON spec file.
    Nonlinear {
        #[arg(long)]
        spec: PathBuf,
    },
    /// ABC D^α f = P + Q f²: coefficients and residual per truncation order.
    Riccati {
        #[arg(long, allow_hyphen_values = true)]
        p: f64,
        #[arg(long, allow_hyphen_values = true)]
        q: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long, value_enum, default_value = "plus")]
        sign: SignArg,
        #[arg(long, default_value_t = 8)]
        m_max: usize,
        #[command(flatten)]
        grid: GridOpts,
    },
}

#[derive(Subcommand, Debug)]
enum RuleCmd {
    /// ABR D^α(u·v), u a power sum, v smooth.
    Product {
        #[arg(long)]
        alpha: f64,
        #[arg(long, value_parser = literal, allow_hyphen_values = true)]
        u: FnLiteral,
        #[arg(long, value_parser = literal, allow_hyphen_values = true)]
        v: FnLiteral,
        #[arg(long, default_value_t = 40)]
        m_outer: usize,
        #[arg(long, default_value_t = 12)]
        n_inner: usize,
        #[command(flatten)]
        grid: GridOpts,
    },
    /// ABR D^α f(g(t)).
    Chain {
        #[arg(long)]
        alpha: f64,
        #[arg(long, value_parser = literal, allow_hyphen_values = true)]
        outer: FnLiteral,
        #[arg(long, value_parser = literal, allow_hyphen_values = true)]
        inner: FnLiteral,
        #[arg(long, default_value_t = 40)]
        m_outer: usize,
        #[arg(long, default_value_t = 12)]
        n_inner: usize,
        /// Emit the (m, n, k) contributions at this t instead of a curve.
        #[arg(long)]
        terms_at: Option<f64>,
        #[command(flatten)]
        grid: GridOpts,
    },
}

#[derive(Subcommand, Debug)]
enum SemiCmd {
    /// AB I^α AB I^β f, AB I^{α+β} f and their difference.
    Defect {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long, value_parser = literal, allow_hyphen_values = true)]
        f: FnLiteral,
        #[arg(long, allow_hyphen_values = true)]
        norm_lambda: Option<f64>,
        #[command(flatten)]
        grid: GridOpts,
    },
    /// Residual of the integral condition.
    Fie {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long, value_parser = literal, allow_hyphen_values = true)]
        f: FnLiteral,
        #[arg(long, allow_hyphen_values = true)]
        norm_lambda: Option<f64>,
        #[command(flatten)]
        grid: GridOpts,
    },
    /// Expanded and factored indicial polynomial.
    Indicial {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[command(flatten)]
        grid: GridOpts,
    },
    /// The Miller–Ross solution family at α = 1/q.
    Solution {
        #[arg(long)]
        q: u32,
        #[command(flatten)]
        grid: GridOpts,
    },
    /// Differential-condition residual of the solution family.
    Fde {
        #[arg(long)]
        q: u32,
        #[command(flatten)]
        grid: GridOpts,
    },
    /// Differential-condition residual of a power sum.
    FdePower {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long, value_parser = literal, allow_hyphen_values = true)]
        f: FnLiteral,
        #[command(flatten)]
        grid: GridOpts,
    },
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidParams(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::InvalidParams(format!("{}: {e}", path.display())))
}

fn path_of(p: PathArg) -> EvalPath {
    match p {
        PathArg::Series => EvalPath::Series,
        PathArg::Kernel => EvalPath::Kernel,
    }
}

fn solution_grid(g: GridOpts) -> Grid {
    g.or(Grid { a: 0.5, b: 2.0, n: 257 })
}

fn command(cmd: Cmd) -> Result<Command, Error> {
    Ok(match cmd {
        Cmd::Mlf { alpha, beta, lambda, grid } => Command::Mlf(MlfArgs { alpha, beta, lambda, grid: grid.grid() }),
        Cmd::AbDeriv { alpha, f, kind, path, norm_lambda, grid } => Command::AbDeriv(AbDerivArgs {
            alpha,
            f,
            kind: match kind {
                KindArg::Abr => DerivKind::Abr,
                KindArg::Abc => DerivKind::Abc,
            },
            path: path_of(path),
            norm: norm(norm_lambda),
            grid: grid.grid(),
        }),
        Cmd::AbInt { alpha, f, path, norm_lambda, grid } => {
            Command::AbInt(AbIntArgs { alpha, f, path: path_of(path), norm: norm(norm_lambda), grid: grid.grid() })
        }
        Cmd::Rl { alpha, f, op, path, grid } => Command::Rl(RlArgs {
            alpha,
            f,
            op: match op {
                OpArg::Integral => RlOp::Integral,
                OpArg::Derivative => RlOp::Derivative,
                OpArg::Caputo => RlOp::Caputo,
            },
            path: path_of(path),
            grid: grid.grid(),
        }),
        Cmd::Ode(o) => Command::Ode(match o {
            OdeCmd::Linear { spec } => OdeArgs::Linear(read_json::<LinearODESpec>(&spec)?),
            OdeCmd::Sequential { spec } => OdeArgs::Sequential(read_json::<LinearODESpec>(&spec)?),
            OdeCmd::Nonlinear { spec } => OdeArgs::Nonlinear(read_json::<NonlinearArgs>(&spec)?),
            OdeCmd::Riccati { p, q, alpha, sign, m_max, grid } => OdeArgs::Riccati(RiccatiArgs {
                p,
                q,
                alpha,
                sign: match sign {
                    SignArg::Plus => RootSign::Plus,
                    SignArg::Minus => RootSign::Minus,
                },
                norm: Normalization::Unit,
                m_max,
                grid: grid.grid(),
            }),
        }),
        Cmd::Rule(r) => Command::Rule(match r {
            RuleCmd::Product { alpha, u, v, m_outer, n_inner, grid } => {
                RuleArgs::Product { alpha, u, v, m_outer, n_inner, grid: grid.grid() }
            }
            RuleCmd::Chain { alpha, outer, inner, m_outer, n_inner, terms_at, grid } => {
                RuleArgs::Chain { alpha, outer, inner, m_outer, n_inner, grid: grid.grid(), terms_at }
            }
        }),
        Cmd::Semigroup(s) => Command::Semigroup(match s {
            SemiCmd::Defect { alpha, beta, f, norm_lambda, grid } => {
                SemigroupArgs::Defect { alpha, beta, f, norm: norm(norm_lambda), grid: grid.grid() }
            }
            SemiCmd::Fie { alpha, beta, f, norm_lambda, grid } => {
                SemigroupArgs::Fie { alpha, beta, f, norm: norm(norm_lambda), grid: grid.grid() }
            }
            SemiCmd::Indicial { alpha, beta, grid } => {
                SemigroupArgs::Indicial { alpha, beta, grid: grid.or(Grid { a: 0.1, b: 5.0, n: 50 }) }
            }
            SemiCmd::Solution { q, grid } => SemigroupArgs::Solution { q, grid: solution_grid(grid) },
            SemiCmd::Fde { q, grid } => SemigroupArgs::Fde { q, grid: solution_grid(grid) },
            SemiCmd::FdePower { alpha, beta, f, grid } => SemigroupArgs::FdePower { alpha, beta, f, grid: solution_grid(grid) },
        }),
        Cmd::Verify { suite, alpha, beta, f } => Command::Verify(VerifyArgs {
            suite: match suite {
                SuiteArg::Inverse => Suite::Inverse,
                SuiteArg::Series => Suite::Series,
                SuiteArg::Laplace => Suite::Laplace,
                SuiteArg::Ode => Suite::Ode,
                SuiteArg::Riccati => Suite::Riccati,
                SuiteArg::Rules => Suite::Rules,
                SuiteArg::Semigroup => Suite::Semigroup,
                SuiteArg::All => Suite::All,
            },
            alpha,
            beta,
            f,
        }),
    })
}

fn config(cli: Cli) -> Result<RunConfig, Error> {
    let mut cfg = match (cli.config, cli.command) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(&path).map_err(|e| Error::InvalidParams(format!("{}: {e}", path.display())))?;
            RunConfig::from_json(&text)?
        }
        (None, Some(cmd)) => RunConfig { command: command(cmd)?, output: None, format: Format::Csv, max_terms: None },
        (Some(_), Some(_)) => return Err(Error::InvalidParams("give either --config or a subcommand, not both".into())),
        (None, None) => return Err(Error::InvalidParams("no subcommand given (see --help)".into())),
    };
    if cli.out.is_some() {
        cfg.output = cli.out;
    }
    if let Some(f) = cli.format {
        cfg.format = match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Svg => Format::Svg,
        };
    }
    if cli.max_terms.is_some() {
        cfg.max_terms = cli.max_terms;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { log::LevelFilter::Info } else { log::LevelFilter::Warn };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();

    let cfg = match config(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(cli::exit_code(&e) as u8);
        }
    };
    let artifact = match cli::run(&cfg) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(cli::exit_code(&e) as u8);
        }
    };
    if let Err(e) = cli::write_artifact(&artifact, cfg.format, cfg.output.as_deref()) {
        eprintln!("error: {e}");
        return ExitCode::from(3);
    }
    match artifact {
        Artifact::Report(r) if !r.ok() => {
            eprintln!("{} of {} checks failed", r.failed, r.failed + r.passed);
            ExitCode::from(cli::EXIT_VERIFY_FAILED as u8)
        }
        _ => ExitCode::SUCCESS,
    }
}
