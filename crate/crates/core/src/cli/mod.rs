//! Command-line front end: `eval`, `solve`, `compare` and `uh`.
//!
//! Exit status is 0 on success, 1 for invalid input and 2 when a numerical
//! procedure fails to converge.

pub mod config;
pub mod output;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fraccalc::ShiftedPolynomial;
use crate::oracle::{compare_traces, gl_solve, OracleConfig};
use crate::repsolver::{
    CompanionReading, KernelKind, KernelSet, ProblemSpec, RepresentationSolver, RhsSpec,
    SolutionTrace, SolverConfig,
};
use crate::specfun::{
    delayed_ml_gen, delayed_ml_piecewise, g_function, mittag_leffler, wright_series, DelayedMl,
    SeriesControl, WrightSpec,
};
use crate::stability::{perturbed_solve, GShape, PerturbationSpec};

pub use config::RunConfig;
pub use output::format_g;

pub const THREADS_ENV: &str = "FRACDELAY_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "fracdelay",
    version,
    about = "Delayed Mittag-Leffler functions and fractional delay Langevin solvers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate a special function over a range of t.
    Eval(EvalArgs),
    /// Solve the configured problem by the closed-form representation.
    Solve(SolveArgs),
    /// Compare the closed-form solution with the Grünwald–Letnikov oracle.
    Compare(CompareArgs),
    /// Check the Ulam–Hyers bound on a perturbed problem.
    Uh(UhArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Function {
    Ml,
    Wright,
    G,
    DmlPiecewise,
    DmlGen,
    KernelMain,
    KernelCompanion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Linear,
    Picard,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(value_enum)]
    pub function: Function,
    /// Function parameter as key=value; repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub t_start: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub t_end: f64,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    /// Problem and numerics for the solver kernels and series control.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Picard)]
    pub method: Method,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Defaults to `linear` when f does not depend on y, else `picard`.
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    #[arg(long)]
    pub oracle_step: Option<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct UhArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub epsilon: f64,
    /// one, zero, cos:W or sin:W.
    #[arg(long, default_value = "one")]
    pub gshape: String,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Parses arguments, runs the command and maps failures to exit codes.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match configure_threads().and_then(|()| run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

pub fn exit_code(e: &Error) -> u8 {
    if e.is_convergence_failure() {
        2
    } else {
        1
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Error::Config(format!(
            "{THREADS_ENV} must be a positive integer, got '{raw}'"
        ))
    })?;
    // A pool built earlier in the same process keeps its size.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Eval(a) => cmd_eval(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Uh(a) => cmd_uh(a),
    }
}

struct Params(BTreeMap<String, String>);

impl Params {
    fn parse(raw: &[String]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for p in raw {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("parameter '{p}' is not key=value")))?;
            if map
                .insert(k.trim().to_string(), v.trim().to_string())
                .is_some()
            {
                return Err(Error::Config(format!("parameter '{k}' given twice")));
            }
        }
        Ok(Self(map))
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.0.remove(key)
    }

    fn num(&mut self, key: &str) -> Result<f64> {
        let v = self
            .take(key)
            .ok_or_else(|| Error::Config(format!("missing parameter '{key}'")))?;
        v.parse()
            .map_err(|_| Error::Config(format!("parameter '{key}' is not a number: '{v}'")))
    }

    fn num_or(&mut self, key: &str, default: f64) -> Result<f64> {
        if self.0.contains_key(key) {
            self.num(key)
        } else {
            Ok(default)
        }
    }

    /// `x:y,x:y,...` pairs.
    fn pairs(&mut self, key: &str) -> Result<Vec<(f64, f64)>> {
        let Some(v) = self.take(key) else {
            return Ok(Vec::new());
        };
        let bad = || {
            Error::Config(format!(
                "parameter '{key}' must be a list of x:y pairs, got '{v}'"
            ))
        };
        v.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|pair| {
                let (a, b) = pair.split_once(':').ok_or_else(bad)?;
                Ok((
                    a.trim().parse().map_err(|_| bad())?,
                    b.trim().parse().map_err(|_| bad())?,
                ))
            })
            .collect()
    }

    fn finish(self) -> Result<()> {
        match self.0.keys().next() {
            Some(k) => Err(Error::Config(format!("unknown parameter '{k}'"))),
            None => Ok(()),
        }
    }
}

/// Problem taken from `--config`, or assembled from `alpha, beta, lambda,
/// mu, h` parameters with zero history.
fn kernel_problem(
    cfg: Option<&RunConfig>,
    params: &mut Params,
) -> Result<(ProblemSpec, SolverConfig)> {
    if let Some(cfg) = cfg {
        return Ok((cfg.problem_spec()?, cfg.solver_config()?));
    }
    let h = params.num_or("h", 1.0)?;
    let spec = ProblemSpec {
        alpha: params.num("alpha")?,
        beta: params.num("beta")?,
        lambda: params.num_or("lambda", 0.0)?,
        mu: params.num_or("mu", 0.0)?,
        h,
        l: 1,
        phi: ShiftedPolynomial::zero(-h),
        c1: 0.0,
        c2: 0.0,
        rhs: RhsSpec::zero(),
    };
    spec.validate()?;
    let mut solver = SolverConfig::default();
    if let Some(r) = params.take("companion") {
        solver.companion = match r.as_str() {
            "corrected" => CompanionReading::Corrected,
            "literal" => CompanionReading::Literal,
            _ => {
                return Err(Error::Config(format!(
                    "companion must be corrected or literal, got '{r}'"
                )))
            }
        };
    }
    Ok((spec, solver))
}

type Evaluator = Box<dyn Fn(f64) -> Result<f64> + Sync>;

fn evaluator(
    function: Function,
    params: &mut Params,
    cfg: Option<&RunConfig>,
) -> Result<Evaluator> {
    let ctrl: SeriesControl = cfg.map(|c| c.numerics.series).unwrap_or_default();
    ctrl.validate()?;
    let f: Evaluator = match function {
        Function::Ml => {
            let (a, b) = (params.num("a")?, params.num("b")?);
            Box::new(move |z| mittag_leffler(a, b, z, &ctrl))
        }
        Function::Wright => {
            let spec = WrightSpec::new(params.pairs("upper")?, params.pairs("lower")?);
            Box::new(move |z| wright_series(&spec, z, &ctrl))
        }
        Function::G => {
            let (alpha, beta) = (params.num("alpha")?, params.num("beta")?);
            let (lambda, mu) = (params.num("lambda")?, params.num("mu")?);
            Box::new(move |t| g_function(alpha, beta, lambda, mu, t, &ctrl))
        }
        Function::DmlPiecewise => {
            let (h, a, b, mu) = (
                params.num("h")?,
                params.num("a")?,
                params.num("b")?,
                params.num("mu")?,
            );
            Box::new(move |t| delayed_ml_piecewise(h, a, b, mu, t))
        }
        Function::DmlGen => {
            let p = DelayedMl::new(
                params.num("h")?,
                params.num("a")?,
                params.num("b")?,
                params.num("gamma")?,
                params.num("lambda")?,
                params.num("mu")?,
            )?;
            Box::new(move |t| delayed_ml_gen(&p, t, &ctrl))
        }
        Function::KernelMain | Function::KernelCompanion => {
            let (spec, solver) = kernel_problem(cfg, params)?;
            let kernels = KernelSet::new(&spec, solver.companion, solver.series)?;
            let kind = if function == Function::KernelMain {
                KernelKind::Main
            } else {
                KernelKind::Companion
            };
            Box::new(move |t| kernels.eval(kind, t))
        }
    };
    Ok(f)
}

fn load(path: Option<&Path>) -> Result<Option<RunConfig>> {
    path.map(RunConfig::load).transpose()
}

pub fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let cfg = load(args.config.as_deref())?;
    let mut params = Params::parse(&args.params)?;
    let f = evaluator(args.function, &mut params, cfg.as_ref())?;
    params.finish()?;
    if args.points == 0
        || !args.t_start.is_finite()
        || !args.t_end.is_finite()
        || args.t_end < args.t_start
    {
        return Err(Error::Config(
            "need points >= 1 and a finite range t_start <= t_end".into(),
        ));
    }
    let n = args.points;
    let ts: Vec<f64> = (0..n)
        .map(|i| {
            if n == 1 {
                return args.t_start;
            }
            let w = i as f64 / (n - 1) as f64;
            (1.0 - w) * args.t_start + w * args.t_end
        })
        .collect();
    let values = ts.par_iter().map(|&t| f(t)).collect::<Result<Vec<_>>>()?;
    let digits = cfg.as_ref().map_or(17, |c| c.output.precision);
    let mut csv = output::Csv::new(&["t", "value"], digits);
    for (t, v) in ts.iter().zip(&values) {
        csv.row(&[*t, *v]);
    }
    let out = args
        .output
        .clone()
        .or_else(|| cfg.and_then(|c| c.output.csv));
    csv.write(out.as_deref())
}

#[derive(Debug, Serialize)]
struct SolveSummary {
    method: Method,
    q: Option<f64>,
    omega: Option<f64>,
    iterations: usize,
    final_delta: Option<f64>,
    nodes: usize,
}

fn closed_form(
    solver: &RepresentationSolver,
    method: Method,
) -> Result<(SolutionTrace, SolveSummary)> {
    let nodes = solver.grid().count;
    match method {
        Method::Linear => Ok((
            solver.linear_solution()?,
            SolveSummary {
                method,
                q: None,
                omega: None,
                iterations: 0,
                final_delta: None,
                nodes,
            },
        )),
        Method::Picard => {
            let (trace, rep) = solver.picard_solve()?;
            Ok((
                trace,
                SolveSummary {
                    method,
                    q: Some(rep.q),
                    omega: Some(rep.omega),
                    iterations: rep.iterations,
                    final_delta: Some(rep.final_delta),
                    nodes,
                },
            ))
        }
    }
}

/// Summary goes to its own file, to stdout when the CSV went to a file,
/// and to stderr otherwise.
fn write_outputs(
    csv: &output::Csv,
    csv_path: Option<&Path>,
    summary: &str,
    summary_path: Option<&Path>,
) -> Result<()> {
    csv.write(csv_path)?;
    match (summary_path, csv_path) {
        (Some(p), _) => output::emit(summary, Some(p)),
        (None, Some(_)) => output::emit(summary, None),
        (None, None) => {
            eprint!("{summary}");
            Ok(())
        }
    }
}

pub fn cmd_solve(args: &SolveArgs) -> Result<()> {
    let cfg = RunConfig::load(&args.config)?;
    let solver = RepresentationSolver::new(cfg.problem_spec()?, cfg.solver_config()?)?;
    let (trace, summary) = closed_form(&solver, args.method)?;
    let mut csv = output::Csv::new(&["t", "y"], cfg.output.precision);
    for (t, y) in trace.iter() {
        csv.row(&[t, y]);
    }
    let csv_path = args.output.clone().or(cfg.output.csv.clone());
    let summary_path = args.summary.clone().or(cfg.output.summary.clone());
    write_outputs(
        &csv,
        csv_path.as_deref(),
        &output::summary_json(&summary)?,
        summary_path.as_deref(),
    )
}

#[derive(Debug, Serialize)]
struct CompareSummary {
    method: Method,
    oracle_step: f64,
    max_absdiff: f64,
    l2_diff: f64,
    iterations: usize,
}

pub fn cmd_compare(args: &CompareArgs) -> Result<()> {
    let cfg = RunConfig::load(&args.config)?;
    let spec = cfg.problem_spec()?;
    let oracle_cfg = OracleConfig {
        step: args.oracle_step.unwrap_or(cfg.oracle.step),
        ..cfg.oracle
    };
    oracle_cfg.grid_for(&spec)?;
    let method = args.method.unwrap_or(if spec.rhs.is_state_free() {
        Method::Linear
    } else {
        Method::Picard
    });
    let solver = RepresentationSolver::new(spec.clone(), cfg.solver_config()?)?;
    let (closed, oracle) = rayon::join(
        || closed_form(&solver, method),
        || gl_solve(&spec, &oracle_cfg),
    );
    let (closed, solved) = closed?;
    let report = compare_traces(&closed, &oracle?);
    let mut csv = output::Csv::new(
        &["t", "y_closed", "y_oracle", "absdiff"],
        cfg.output.precision,
    );
    for i in 0..report.times.len() {
        csv.row(&[
            report.times[i],
            report.closed[i],
            report.oracle[i],
            report.absdiff[i],
        ]);
    }
    let summary = CompareSummary {
        method,
        oracle_step: oracle_cfg.step,
        max_absdiff: report.max_absdiff,
        l2_diff: report.l2_diff,
        iterations: solved.iterations,
    };
    let csv_path = args.output.clone().or(cfg.output.csv.clone());
    let summary_path = args.summary.clone().or(cfg.output.summary.clone());
    write_outputs(
        &csv,
        csv_path.as_deref(),
        &output::summary_json(&summary)?,
        summary_path.as_deref(),
    )
}

#[derive(Debug, Serialize)]
struct UhSummary {
    epsilon: f64,
    gshape: String,
    lhs: f64,
    rhs_bound: f64,
    uh_constant: f64,
    omega: f64,
    pass: bool,
}

pub fn cmd_uh(args: &UhArgs) -> Result<()> {
    let cfg = RunConfig::load(&args.config)?;
    let spec = cfg.problem_spec()?;
    let solver = cfg.solver_config()?;
    let shape: GShape = args.gshape.parse()?;
    let pert = PerturbationSpec::new(args.epsilon, shape)?;
    let out = perturbed_solve(&spec, &pert, &solver)?;
    let summary = UhSummary {
        epsilon: pert.epsilon,
        gshape: shape.to_string(),
        lhs: out.lhs,
        rhs_bound: out.rhs_bound,
        uh_constant: out.uh_constant,
        omega: out.omega,
        pass: out.holds(solver.picard_tol),
    };
    let path = args.output.clone().or(cfg.output.summary.clone());
    output::emit(&output::summary_json(&summary)?, path.as_deref())
}
