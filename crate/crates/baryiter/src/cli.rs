//! Command-line front end.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::thread;

use baryiter_core::analysis::{theoretical_order, Family, OrderQuery};
use baryiter_core::corpus::{self, Problem, ProblemKind};
use baryiter_core::optimise::{optimize, OptConfig, OptMethod};
use baryiter_core::root_search::{
    default_tolerance, solve, Bootstrap, RootMethod, SolverConfig, WeightScheme,
};
use baryiter_core::{BigReal, Error, IterationTrace, Precision, Real, Status};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::references;
use crate::report::TraceReport;
use crate::tables::{self, TableId};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "baryiter",
    version,
    about = "Root finding and optimisation with barycentric iteration schemes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find a root and print the iteration trace.
    Solve(SolveArgs),
    /// Find a stationary point and print the iteration trace.
    Optimize(OptimizeArgs),
    /// Theoretical order of convergence.
    Order(OrderArgs),
    /// Reproduce a golden error table.
    Table(TableArgs),
    /// Run several methods on one problem and list their errors side by side.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    /// Built-in problem name.
    #[arg(long, conflicts_with = "expr", required_unless_present = "expr")]
    pub problem: Option<String>,
    /// Function of `x`, e.g. "cos(x)-x".
    #[arg(long)]
    pub expr: Option<String>,
    /// Fixed-point form `g` with `x = g(x)`, for Picard steps.
    #[arg(long, requires = "expr")]
    pub fixed_point: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<String>,
    /// Second start point; implies the explicit bootstrap.
    #[arg(long, allow_hyphen_values = true)]
    pub x1: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct NumericArgs {
    #[arg(long, env = "BARYITER_PRECISION_BITS", default_value_t = 256)]
    pub precision_bits: u32,
    #[arg(long)]
    pub tol_x: Option<String>,
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
    #[arg(long, value_enum)]
    pub bootstrap: Option<BootstrapArg>,
    /// Perturbation for the perturb bootstrap.
    #[arg(long, allow_hyphen_values = true)]
    pub h: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub output: OutputFormat,
    /// Significant digits per number; full precision for json and csv,
    /// 20 for human output.
    #[arg(long)]
    pub digits: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Human,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BootstrapArg {
    Picard,
    Perturb,
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightsArg {
    X,
    F,
    Alpha,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Root,
    Opt,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, default_value = "exact-df", value_parser = parse_root_method)]
    pub method: RootMethod,
    #[arg(long, value_enum, default_value_t = WeightsArg::X)]
    pub weights: WeightsArg,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<String>,
    #[arg(long)]
    pub tol_f: Option<String>,
    #[command(flatten)]
    pub numeric: NumericArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, default_value = "newton-df", value_parser = parse_opt_method)]
    pub method: OptMethod,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<String>,
    #[arg(long)]
    pub tol_g: Option<String>,
    #[command(flatten)]
    pub numeric: NumericArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct OrderArgs {
    #[arg(long, value_enum, default_value_t = FamilyArg::Root)]
    pub family: FamilyArg,
    /// Derivative multiplicity.
    #[arg(long, default_value_t = 1)]
    pub m: u32,
    /// Memory `n`, or `inf` for the limit.
    #[arg(long, value_parser = parse_memory)]
    pub n: Memory,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Memory(pub Option<u32>);

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long, value_parser = parse_table)]
    pub reproduce: TableId,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Comma-separated `name[:window]` list.
    #[arg(long, value_delimiter = ',', value_parser = parse_method_spec, required = true)]
    pub methods: Vec<MethodSpec>,
    #[arg(long, value_enum, default_value_t = WeightsArg::X)]
    pub weights: WeightsArg,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<String>,
    #[arg(long)]
    pub tol_f: Option<String>,
    #[arg(long)]
    pub tol_g: Option<String>,
    #[command(flatten)]
    pub numeric: NumericArgs,
    #[arg(long, value_enum, default_value_t = OutputFormat::Human)]
    pub output: OutputFormat,
    #[arg(long)]
    pub digits: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnyMethod {
    Root(RootMethod),
    Opt(OptMethod),
}

impl AnyMethod {
    fn name(self) -> &'static str {
        match self {
            AnyMethod::Root(m) => m.name(),
            AnyMethod::Opt(m) => m.name(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MethodSpec {
    pub method: AnyMethod,
    pub window: Option<usize>,
}

fn parse_root_method(s: &str) -> Result<RootMethod, String> {
    RootMethod::from_name(s).ok_or_else(|| {
        let names: Vec<_> = RootMethod::ALL.iter().map(|m| m.name()).collect();
        format!(
            "unknown method `{s}` (expected one of {})",
            names.join(", ")
        )
    })
}

fn parse_opt_method(s: &str) -> Result<OptMethod, String> {
    OptMethod::from_name(s)
        .ok_or_else(|| format!("unknown method `{s}` (expected newton-df or ch-d1)"))
}

fn parse_memory(s: &str) -> Result<Memory, String> {
    if s == "inf" {
        return Ok(Memory(None));
    }
    s.parse::<u32>()
        .map(|n| Memory(Some(n)))
        .map_err(|_| format!("expected an integer or `inf`, got `{s}`"))
}

fn parse_table(s: &str) -> Result<TableId, String> {
    TableId::from_name(s).ok_or_else(|| format!("unknown table `{s}` (expected table4 or table6)"))
}

fn parse_method_spec(s: &str) -> Result<MethodSpec, String> {
    let (name, window) = match s.split_once(':') {
        Some((name, w)) => (
            name,
            Some(
                w.parse::<usize>()
                    .map_err(|_| format!("bad window in `{s}`"))?,
            ),
        ),
        None => (s, None),
    };
    let method = RootMethod::from_name(name)
        .map(AnyMethod::Root)
        .or_else(|| OptMethod::from_name(name).map(AnyMethod::Opt))
        .ok_or_else(|| format!("unknown method `{name}`"))?;
    Ok(MethodSpec { method, window })
}

/// A command-line mistake, reported with the flag that caused it.
#[derive(Debug, thiserror::Error)]
#[error("{flag}: {message}")]
pub struct UsageError {
    pub flag: &'static str,
    pub message: String,
}

fn usage(flag: &'static str, message: impl Into<String>) -> UsageError {
    UsageError {
        flag,
        message: message.into(),
    }
}

fn decimal(flag: &'static str, text: &str, prec: Precision) -> Result<BigReal, UsageError> {
    BigReal::parse_decimal(text, prec).map_err(|_| usage(flag, format!("`{text}` is not a number")))
}

fn opt_decimal(
    flag: &'static str,
    text: Option<&String>,
    prec: Precision,
) -> Result<Option<BigReal>, UsageError> {
    text.map(|t| decimal(flag, t, prec)).transpose()
}

/// Names the flag behind a configuration rejected by the solver.
fn config_flag(message: &str) -> &'static str {
    if message.contains("window") {
        "--window"
    } else if message.contains("tolerance") {
        "--tol-*"
    } else if message.contains("beta") {
        "--beta"
    } else if message.contains("alpha") {
        "--weights"
    } else if message.contains("fixed-point") {
        "--bootstrap"
    } else {
        "--method"
    }
}

fn invalid_config(e: Error) -> Result<(), UsageError> {
    match e {
        Error::InvalidConfig(message) => Err(usage(config_flag(message), message)),
        _ => Ok(()),
    }
}

/// Problem, start point and how to obtain the reference solution.
struct Setup {
    problem: Problem,
    builtin: bool,
    precision: Precision,
    x0: BigReal,
}

fn setup(args: &ProblemArgs, precision_bits: u32, kind: ProblemKind) -> Result<Setup, UsageError> {
    let precision =
        Precision::new(precision_bits).map_err(|e| usage("--precision-bits", e.to_string()))?;
    let (problem, builtin) = match (&args.problem, &args.expr) {
        (Some(name), _) => {
            let problem = corpus::problem(name).ok_or_else(|| {
                let names: Vec<_> = corpus::list_problems()
                    .iter()
                    .map(|p| p.name().to_string())
                    .collect();
                usage(
                    "--problem",
                    format!(
                        "unknown problem `{name}` (expected one of {})",
                        names.join(", ")
                    ),
                )
            })?;
            if problem.kind() != kind {
                return Err(usage(
                    "--problem",
                    format!("`{name}` is a {} problem", problem.kind().name()),
                ));
            }
            (problem, true)
        }
        (None, Some(expr)) => {
            let problem = Problem::from_expression(kind, expr, args.fixed_point.as_deref())
                .map_err(|e| {
                    let flag = if Problem::from_expression(kind, expr, None).is_err() {
                        "--expr"
                    } else {
                        "--fixed-point"
                    };
                    usage(flag, e.to_string())
                })?;
            (problem, false)
        }
        (None, None) => return Err(usage("--problem", "a problem name or --expr is required")),
    };
    let x0 = match &args.x0 {
        Some(text) => decimal("--x0", text, precision)?,
        None => problem.default_x0(precision),
    };
    Ok(Setup {
        problem,
        builtin,
        precision,
        x0,
    })
}

fn bootstrap(
    args: &ProblemArgs,
    numeric: &NumericArgs,
    prec: Precision,
) -> Result<Option<Bootstrap<BigReal>>, UsageError> {
    let x1 = opt_decimal("--x1", args.x1.as_ref(), prec)?;
    let h = opt_decimal("--h", numeric.h.as_ref(), prec)?;
    let choice = numeric
        .bootstrap
        .or(x1.as_ref().map(|_| BootstrapArg::Explicit));
    Ok(match choice {
        None => h.map(Bootstrap::Perturb),
        Some(BootstrapArg::Picard) => Some(Bootstrap::PicardStep),
        Some(BootstrapArg::Explicit) => {
            Some(Bootstrap::ExplicitSecond(x1.ok_or_else(|| {
                usage("--bootstrap", "explicit bootstrap needs --x1")
            })?))
        }
        Some(BootstrapArg::Perturb) => h.map(Bootstrap::Perturb),
    })
}

fn weight_scheme(
    weights: WeightsArg,
    alpha: Option<&String>,
    prec: Precision,
) -> Result<WeightScheme<BigReal>, UsageError> {
    match (weights, alpha) {
        (WeightsArg::X, None) => Ok(WeightScheme::XBased),
        (WeightsArg::F, None) => Ok(WeightScheme::FBased),
        (WeightsArg::Alpha, Some(a)) => {
            Ok(WeightScheme::AlphaShifted(decimal("--alpha", a, prec)?))
        }
        (WeightsArg::Alpha, None) => Err(usage("--weights", "alpha weights need --alpha")),
        (_, Some(_)) => Err(usage("--alpha", "only valid with --weights alpha")),
    }
}

fn bootstrap_name(b: &Option<Bootstrap<BigReal>>, digits: usize) -> String {
    match b {
        None => "auto".to_string(),
        Some(Bootstrap::PicardStep) => "picard".to_string(),
        Some(Bootstrap::Perturb(h)) => format!("perturb {}", h.to_decimal(digits)),
        Some(Bootstrap::ExplicitSecond(x1)) => format!("explicit {}", x1.to_decimal(digits)),
    }
}

#[allow(clippy::too_many_arguments)]
fn root_config(
    method: RootMethod,
    window: Option<usize>,
    weights: WeightScheme<BigReal>,
    beta: Option<&String>,
    tol_f: Option<&String>,
    args: &ProblemArgs,
    numeric: &NumericArgs,
    prec: Precision,
) -> Result<SolverConfig<BigReal>, UsageError> {
    let mut config = SolverConfig::new(method, prec)
        .with_window(window.unwrap_or(method.default_window()))
        .with_weights(weights)
        .with_max_iter(numeric.max_iter);
    config.tol_f = opt_decimal("--tol-f", tol_f, prec)?.unwrap_or_else(|| default_tolerance(prec));
    config.tol_x = opt_decimal("--tol-x", numeric.tol_x.as_ref(), prec)?
        .unwrap_or_else(|| default_tolerance(prec));
    if let Some(beta) = opt_decimal("--beta", beta, prec)? {
        config.beta = beta;
    }
    config.bootstrap = bootstrap(args, numeric, prec)?;
    config.validate().or_else(invalid_config)?;
    Ok(config)
}

fn opt_config(
    method: OptMethod,
    window: Option<usize>,
    beta: Option<&String>,
    tol_g: Option<&String>,
    args: &ProblemArgs,
    numeric: &NumericArgs,
    prec: Precision,
) -> Result<OptConfig<BigReal>, UsageError> {
    let mut config = OptConfig::new(method, prec)
        .with_window(window.unwrap_or(method.min_window()))
        .with_max_iter(numeric.max_iter);
    config.tol_g = opt_decimal("--tol-g", tol_g, prec)?.unwrap_or_else(|| default_tolerance(prec));
    config.tol_x = opt_decimal("--tol-x", numeric.tol_x.as_ref(), prec)?
        .unwrap_or_else(|| default_tolerance(prec));
    if let Some(beta) = opt_decimal("--beta", beta, prec)? {
        config.beta = beta;
    }
    config.bootstrap = bootstrap(args, numeric, prec)?;
    if matches!(config.bootstrap, Some(Bootstrap::PicardStep)) {
        return Err(usage(
            "--bootstrap",
            "optimisation has no fixed-point bootstrap",
        ));
    }
    config.validate().or_else(invalid_config)?;
    Ok(config)
}

fn root_config_map(
    config: &SolverConfig<BigReal>,
    x0: &BigReal,
    digits: usize,
) -> BTreeMap<String, String> {
    let mut map = BTreeMap::new();
    map.insert("weights".into(), config.weight_scheme.name().to_string());
    if let WeightScheme::AlphaShifted(a) = &config.weight_scheme {
        map.insert("alpha".into(), a.to_decimal(digits));
    }
    map.insert("window".into(), config.window.to_string());
    map.insert("beta".into(), config.beta.to_decimal(digits));
    map.insert("tol_f".into(), config.tol_f.to_decimal(digits));
    map.insert("tol_x".into(), config.tol_x.to_decimal(digits));
    map.insert("max_iter".into(), config.max_iter.to_string());
    map.insert("precision_bits".into(), config.precision.bits().to_string());
    map.insert(
        "bootstrap".into(),
        bootstrap_name(&config.bootstrap, digits),
    );
    map.insert("x0".into(), x0.to_decimal(digits));
    map
}

fn opt_config_map(
    config: &OptConfig<BigReal>,
    x0: &BigReal,
    digits: usize,
) -> BTreeMap<String, String> {
    let mut map = BTreeMap::new();
    map.insert("window".into(), config.window.to_string());
    map.insert("beta".into(), config.beta.to_decimal(digits));
    map.insert("tol_g".into(), config.tol_g.to_decimal(digits));
    map.insert("tol_x".into(), config.tol_x.to_decimal(digits));
    map.insert("max_iter".into(), config.max_iter.to_string());
    map.insert("precision_bits".into(), config.precision.bits().to_string());
    map.insert(
        "bootstrap".into(),
        bootstrap_name(&config.bootstrap, digits),
    );
    map.insert("x0".into(), x0.to_decimal(digits));
    map
}

/// Reference from the sidecar for built-in problems. Expression problems
/// get one afterwards, refined from the final iterate of a converged run.
fn reference_for(setup: &Setup) -> Option<BigReal> {
    if setup.builtin {
        references::reference(&setup.problem, setup.precision).ok()
    } else {
        None
    }
}

fn attach_posterior_reference(setup: &Setup, trace: &mut IterationTrace<BigReal>) {
    if setup.builtin || !trace.converged() {
        return;
    }
    if let Some(last) = trace.last() {
        let wide = Precision::new(setup.precision.bits() * 2).unwrap_or(setup.precision);
        let start =
            BigReal::parse_decimal(&last.x.to_decimal(setup.precision.decimal_digits()), wide);
        if let Ok(start) = start {
            if let Ok(r) = corpus::refine(&setup.problem, start) {
                if let Ok(r) =
                    BigReal::parse_decimal(&r.to_decimal(wide.decimal_digits()), setup.precision)
                {
                    trace.set_reference(r);
                }
            }
        }
    }
}

type RunOutcome = (IterationTrace<BigReal>, Option<Error>);

fn outcome<E>(
    result: Result<IterationTrace<BigReal>, E>,
    split: impl FnOnce(E) -> RunOutcome,
) -> RunOutcome {
    match result {
        Ok(trace) => (trace, None),
        Err(e) => split(e),
    }
}

fn exit_for(trace: &IterationTrace<BigReal>, error: &Option<Error>) -> i32 {
    if error.is_none() && trace.converged() {
        EXIT_OK
    } else {
        EXIT_FAILURE
    }
}

fn format_digits(output: OutputFormat, digits: Option<usize>, prec: Precision) -> usize {
    digits.unwrap_or(match output {
        OutputFormat::Human => 20,
        OutputFormat::Json | OutputFormat::Csv => prec.decimal_digits(),
    })
}

fn emit(report: &TraceReport, output: OutputFormat) -> String {
    match output {
        OutputFormat::Json => report.to_json(),
        OutputFormat::Csv => report.to_csv(),
        OutputFormat::Human => report.to_human(),
    }
}

struct Emitted {
    code: i32,
    stdout: String,
    stderr: String,
}

fn finish(report: TraceReport, output: OutputFormat, code: i32) -> Emitted {
    let stderr = match &report.summary.error {
        Some(name) => format!("error: solver failed with {name}\n"),
        None if code != EXIT_OK => format!("run ended with status {}\n", report.summary.status),
        None => String::new(),
    };
    Emitted {
        code,
        stdout: emit(&report, output),
        stderr,
    }
}

fn cmd_solve(args: &SolveArgs) -> Result<Emitted, UsageError> {
    let setup = setup(
        &args.problem,
        args.numeric.precision_bits,
        ProblemKind::Root,
    )?;
    let prec = setup.precision;
    let weights = weight_scheme(args.weights, args.alpha.as_ref(), prec)?;
    let config = root_config(
        args.method,
        args.window,
        weights,
        args.beta.as_ref(),
        args.tol_f.as_ref(),
        &args.problem,
        &args.numeric,
        prec,
    )?;
    if matches!(config.bootstrap, Some(Bootstrap::PicardStep))
        && !setup.problem.has_fixed_point_form()
    {
        return Err(usage(
            "--bootstrap",
            "the problem has no fixed-point form (see --fixed-point)",
        ));
    }
    if args.method == RootMethod::Picard && !setup.problem.has_fixed_point_form() {
        return Err(usage(
            "--method",
            "picard needs a fixed-point form (see --fixed-point)",
        ));
    }
    let digits = format_digits(args.output.output, args.output.digits, prec);
    let run = solve(
        &setup.problem,
        setup.x0.clone(),
        &config,
        reference_for(&setup),
    );
    let (mut trace, error) = outcome(run, |e| (e.trace, Some(e.error)));
    attach_posterior_reference(&setup, &mut trace);
    let code = exit_for(&trace, &error);
    let report = TraceReport::from_trace(
        setup.problem.name(),
        args.method.name(),
        root_config_map(&config, &setup.x0, digits),
        &trace,
        digits,
        error.as_ref().map(Error::name),
    );
    Ok(finish(report, args.output.output, code))
}

fn cmd_optimize(args: &OptimizeArgs) -> Result<Emitted, UsageError> {
    let setup = setup(
        &args.problem,
        args.numeric.precision_bits,
        ProblemKind::Optimisation,
    )?;
    let prec = setup.precision;
    let config = opt_config(
        args.method,
        args.window,
        args.beta.as_ref(),
        args.tol_g.as_ref(),
        &args.problem,
        &args.numeric,
        prec,
    )?;
    let digits = format_digits(args.output.output, args.output.digits, prec);
    let run = optimize(
        &setup.problem,
        setup.x0.clone(),
        &config,
        reference_for(&setup),
    );
    let (mut trace, error) = outcome(run, |e| (e.trace, Some(e.error)));
    attach_posterior_reference(&setup, &mut trace);
    let code = exit_for(&trace, &error);
    let report = TraceReport::from_trace(
        setup.problem.name(),
        args.method.name(),
        opt_config_map(&config, &setup.x0, digits),
        &trace,
        digits,
        error.as_ref().map(Error::name),
    );
    Ok(finish(report, args.output.output, code))
}

fn cmd_order(args: &OrderArgs) -> Result<Emitted, UsageError> {
    if args.m == 0 {
        return Err(usage("--m", "must be at least 1"));
    }
    let family = match args.family {
        FamilyArg::Root => Family::Root,
        FamilyArg::Opt => Family::Opt,
    };
    let l = theoretical_order(OrderQuery::new(family, args.m, args.n.0));
    Ok(Emitted {
        code: EXIT_OK,
        stdout: format!("{l:.5}\n"),
        stderr: String::new(),
    })
}

fn cmd_table(args: &TableArgs) -> Emitted {
    let results = tables::reproduce(args.reproduce);
    let ok = results.iter().all(|r| r.matches());
    let mut stdout = tables::render(args.reproduce, &results);
    let _ = writeln!(
        stdout,
        "{}: {}",
        args.reproduce.name(),
        if ok { "all cells match" } else { "MISMATCH" }
    );
    Emitted {
        code: if ok { EXIT_OK } else { EXIT_FAILURE },
        stdout,
        stderr: String::new(),
    }
}

fn cmd_compare(args: &CompareArgs) -> Result<Emitted, UsageError> {
    let kind = match args.methods.first().map(|m| m.method) {
        Some(AnyMethod::Opt(_)) => ProblemKind::Optimisation,
        _ => ProblemKind::Root,
    };
    let setup = setup(&args.problem, args.numeric.precision_bits, kind)?;
    let prec = setup.precision;
    let digits = match args.output {
        OutputFormat::Human => args.digits.unwrap_or(3),
        other => format_digits(other, args.digits, prec),
    };
    enum Prepared {
        Root(SolverConfig<BigReal>),
        Opt(OptConfig<BigReal>),
    }
    let mut prepared = Vec::new();
    for spec in &args.methods {
        let config = match spec.method {
            AnyMethod::Root(m) => {
                if kind != ProblemKind::Root {
                    return Err(usage(
                        "--methods",
                        "root and optimisation methods cannot be mixed",
                    ));
                }
                let weights = weight_scheme(args.weights, args.alpha.as_ref(), prec)?;
                Prepared::Root(root_config(
                    m,
                    spec.window,
                    weights,
                    args.beta.as_ref(),
                    args.tol_f.as_ref(),
                    &args.problem,
                    &args.numeric,
                    prec,
                )?)
            }
            AnyMethod::Opt(m) => {
                if kind != ProblemKind::Optimisation {
                    return Err(usage(
                        "--methods",
                        "root and optimisation methods cannot be mixed",
                    ));
                }
                Prepared::Opt(opt_config(
                    m,
                    spec.window,
                    args.beta.as_ref(),
                    args.tol_g.as_ref(),
                    &args.problem,
                    &args.numeric,
                    prec,
                )?)
            }
        };
        prepared.push((*spec, config));
    }
    let reference = reference_for(&setup);
    let runs: Vec<RunOutcome> = thread::scope(|s| {
        let handles: Vec<_> = prepared
            .iter()
            .map(|(_, config)| {
                let reference = reference.clone();
                let setup = &setup;
                s.spawn(move || {
                    let x0 = setup.x0.clone();
                    let (mut trace, error) = match config {
                        Prepared::Root(c) => {
                            outcome(solve(&setup.problem, x0, c, reference), |e| {
                                (e.trace, Some(e.error))
                            })
                        }
                        Prepared::Opt(c) => {
                            outcome(optimize(&setup.problem, x0, c, reference), |e| {
                                (e.trace, Some(e.error))
                            })
                        }
                    };
                    attach_posterior_reference(setup, &mut trace);
                    (trace, error)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("solver thread"))
            .collect()
    });
    let code = if runs.iter().all(|(t, e)| exit_for(t, e) == EXIT_OK) {
        EXIT_OK
    } else {
        EXIT_FAILURE
    };
    let labels: Vec<String> = prepared
        .iter()
        .map(|(spec, config)| {
            let window = match config {
                Prepared::Root(c) => c.window,
                Prepared::Opt(c) => c.window,
            };
            format!("{}:{}", spec.method.name(), window)
        })
        .collect();
    let stdout = match args.output {
        OutputFormat::Json => {
            let reports: Vec<TraceReport> = prepared
                .iter()
                .zip(&runs)
                .map(|((spec, config), (trace, error))| {
                    let map = match config {
                        Prepared::Root(c) => root_config_map(c, &setup.x0, digits),
                        Prepared::Opt(c) => opt_config_map(c, &setup.x0, digits),
                    };
                    TraceReport::from_trace(
                        setup.problem.name(),
                        spec.method.name(),
                        map,
                        trace,
                        digits,
                        error.as_ref().map(Error::name),
                    )
                })
                .collect();
            let mut text = serde_json::to_string_pretty(&reports).expect("reports serialise");
            text.push('\n');
            text
        }
        OutputFormat::Csv => compare_csv(&labels, &runs, digits),
        OutputFormat::Human => compare_human(&labels, &runs, digits),
    };
    Ok(Emitted {
        code,
        stdout,
        stderr: String::new(),
    })
}

fn error_cell(trace: &IterationTrace<BigReal>, i: usize, digits: usize) -> Option<String> {
    trace.steps().get(i).map(|s| {
        s.abs_error()
            .map(|e| e.to_decimal(digits))
            .unwrap_or_else(|| "?".into())
    })
}

fn compare_csv(labels: &[String], runs: &[RunOutcome], digits: usize) -> String {
    let mut out = String::from("i");
    for l in labels {
        let _ = write!(out, ",{l}");
    }
    out.push('\n');
    let rows = runs.iter().map(|(t, _)| t.len()).max().unwrap_or(0);
    for i in 0..rows {
        let _ = write!(out, "{i}");
        for (trace, _) in runs {
            let _ = write!(out, ",{}", error_cell(trace, i, digits).unwrap_or_default());
        }
        out.push('\n');
    }
    out
}

fn compare_human(labels: &[String], runs: &[RunOutcome], digits: usize) -> String {
    let width = labels
        .iter()
        .map(String::len)
        .max()
        .unwrap_or(0)
        .max(digits + 6);
    let mut out = format!("{:>3}", "i");
    for l in labels {
        let _ = write!(out, "  {l:>width$}");
    }
    out.push('\n');
    let rows = runs.iter().map(|(t, _)| t.len()).max().unwrap_or(0);
    for i in 0..rows {
        let _ = write!(out, "{i:>3}");
        for (trace, _) in runs {
            let _ = write!(
                out,
                "  {:>width$}",
                error_cell(trace, i, digits).unwrap_or_else(|| "-".into())
            );
        }
        out.push('\n');
    }
    for (label, (trace, error)) in labels.iter().zip(runs) {
        let status = match error {
            Some(e) => e.name().to_string(),
            None => trace.status().unwrap_or(Status::Ok).as_str().to_string(),
        };
        let _ = writeln!(out, "{label}: {status}");
    }
    out
}

fn dispatch(cli: &Cli) -> Result<Emitted, UsageError> {
    match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Optimize(a) => cmd_optimize(a),
        Command::Order(a) => cmd_order(a),
        Command::Table(a) => Ok(cmd_table(a)),
        Command::Compare(a) => cmd_compare(a),
    }
}

/// Parses `args` (program name first), runs the command and writes its
/// document. Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                EXIT_USAGE
            } else {
                let _ = write!(stdout, "{}", e.render());
                EXIT_OK
            };
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(emitted) => {
            let _ = stdout.write_all(emitted.stdout.as_bytes());
            let _ = stderr.write_all(emitted.stderr.as_bytes());
            emitted.code
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}
