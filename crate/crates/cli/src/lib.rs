//! The `voi` command-line tool: value-of-information curves, the lottery
//! catalog, and oracle cross-checks for problems stored as JSON files.

pub mod error;
pub mod output;
pub mod problem;

use std::env;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use voi_core::bregman::constrained_value;
use voi_core::curve::assemble_s_curve_with;
use voi_core::deterministic::{boltzmann_value_with, hartley_value_with, EnumOptions, DEFAULT_ENUM_CAP};
use voi_core::oracle::{
    exhaustive_deterministic_with, grid_max_eu, simplex_grid_value, table_boltzmann_max, table_hartley_max,
    OracleReport,
};
use voi_core::paradox::{paradox, Paradox};
use voi_core::shannon::{lower_value_with, trace_curve_with, upper_value_with, ShannonOptions};
use voi_core::{entropy, eu_compare, expected_utility, Branch, DecisionProblem, Execution, LambdaGrid};

pub use error::{CliError, CliResult};
use output::{write_reports, CurveOutput, CurveRow, Format};
use problem::ProblemFile;

/// Environment variable overriding the deterministic enumeration cap.
pub const ENUM_CAP_VAR: &str = "VOI_ENUM_CAP";

pub const SHANNON_ORACLE_TOL: f64 = 1e-3;
pub const DETERMINISTIC_ORACLE_TOL: f64 = 0.0;
pub const BREGMAN_ORACLE_TOL: f64 = 2e-3;

#[derive(Debug, Parser)]
#[command(name = "voi", version, about = "Value-of-information curves for finite decision problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Trace a value-of-information curve over a grid of information bounds.
    Curve(CurveArgs),
    /// Expected utilities, entropies and verdicts for a catalog lottery.
    Paradox(ParadoxArgs),
    /// Compare a solver against its brute-force oracle.
    Oracle(OracleArgs),
    /// Check that a problem file loads.
    Validate {
        problem: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverKind {
    Shannon,
    Boltzmann,
    Hartley,
    Bregman,
}

impl SolverKind {
    fn name(self) -> &'static str {
        match self {
            SolverKind::Shannon => "shannon",
            SolverKind::Boltzmann => "boltzmann",
            SolverKind::Hartley => "hartley",
            SolverKind::Bregman => "bregman",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    Upper,
    Lower,
    /// Both branches on a signed axis: losses at -λ, gains at +λ.
    S,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv or json; defaults to json for `.json` outputs, csv otherwise.
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[arg(long)]
    pub problem: PathBuf,
    #[arg(long = "type", value_enum)]
    pub kind: SolverKind,
    #[arg(long, value_enum, default_value = "upper")]
    pub branch: BranchArg,
    /// Grid `start:end:count`, inclusive.
    #[arg(long)]
    pub lambda: String,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Evaluate on one thread.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Args)]
pub struct ParadoxArgs {
    pub name: String,
    /// Truncation length for the coin-tossing lotteries.
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub problem: PathBuf,
    #[arg(long = "type", value_enum)]
    pub kind: SolverKind,
    #[arg(long, value_parser = ["upper", "lower"], default_value = "upper")]
    pub branch: String,
    /// Comma-separated bounds or a `start:end:count` grid.
    #[arg(long)]
    pub lambda: String,
    /// Grid resolution per axis (default 2000 for shannon, 1000 for bregman).
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Override the Shannon solver's information tolerance. Loosening it is
    /// a way to watch the oracle catch a bad solver.
    #[arg(long)]
    pub solver_tol: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long)]
    pub sequential: bool,
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Curve(args) => cmd_curve(&args),
        Command::Paradox(args) => cmd_paradox(&args, &mut io::stdout().lock()),
        Command::Oracle(args) => cmd_oracle(&args),
        Command::Validate { problem } => cmd_validate(&problem, &mut io::stdout().lock()),
    }
}

fn execution(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::default()
    }
}

pub fn enum_cap() -> CliResult<u64> {
    match env::var(ENUM_CAP_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Input(format!("{ENUM_CAP_VAR} must be a non-negative integer, got `{v}`"))),
        Err(_) => Ok(DEFAULT_ENUM_CAP),
    }
}

fn resolve_format(output: &OutputArgs) -> CliResult<Format> {
    if let Some(f) = &output.format {
        return Format::parse(f).ok_or_else(|| CliError::Input(format!("unknown format `{f}` (csv or json)")));
    }
    let is_json = output
        .out
        .as_ref()
        .and_then(|p| p.extension())
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    Ok(if is_json { Format::Json } else { Format::Csv })
}

fn with_output(output: &OutputArgs, f: impl FnOnce(&mut dyn Write) -> CliResult<()>) -> CliResult<()> {
    match &output.out {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| CliError::Input(format!("cannot create {}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            f(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => f(&mut io::stdout().lock()),
    }
}

/// Parses `a,b,c` or `start:end:count`.
pub fn parse_lambdas(s: &str) -> CliResult<Vec<f64>> {
    if s.contains(':') {
        return Ok(s.parse::<LambdaGrid>()?.values());
    }
    let values = s
        .split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && *v >= 0.0)
                .ok_or_else(|| CliError::Input(format!("bad information bound `{x}`")))
        })
        .collect::<CliResult<Vec<f64>>>()?;
    Ok(values)
}

struct Solved {
    lambda: f64,
    value: f64,
    beta: f64,
    converged: bool,
}

struct Context<'a> {
    file: &'a ProblemFile,
    prob: DecisionProblem,
    shannon: ShannonOptions,
    enumeration: EnumOptions,
}

impl Context<'_> {
    fn point(&self, kind: SolverKind, branch: Branch, lambda: f64) -> CliResult<Solved> {
        let deterministic = |f: fn(&DecisionProblem, f64, &EnumOptions) -> voi_core::Result<voi_core::deterministic::DeterministicPoint>| -> CliResult<Solved> {
            let value = match branch {
                Branch::Upper => f(&self.prob, lambda, &self.enumeration)?.point.value,
                Branch::Lower => -f(&self.prob.negated(), lambda, &self.enumeration)?.point.value,
            };
            Ok(Solved { lambda, value, beta: f64::INFINITY, converged: true })
        };
        match kind {
            SolverKind::Shannon => {
                let p = match branch {
                    Branch::Upper => upper_value_with(&self.prob, lambda, &self.shannon)?,
                    Branch::Lower => lower_value_with(&self.prob, lambda, &self.shannon)?,
                };
                Ok(Solved { lambda, value: p.value, beta: p.beta, converged: p.converged })
            }
            SolverKind::Boltzmann => deterministic(boltzmann_value_with),
            SolverKind::Hartley => deterministic(hartley_value_with),
            SolverKind::Bregman => {
                let p = constrained_value(&self.file.to_resource(lambda)?, branch)?;
                Ok(Solved { lambda, value: p.value, beta: p.beta, converged: true })
            }
        }
    }

    fn branch(&self, kind: SolverKind, branch: Branch, grid: &[f64]) -> CliResult<Vec<Solved>> {
        if kind == SolverKind::Shannon {
            let curve = trace_curve_with(&self.prob, branch, grid, &self.shannon)?;
            return Ok(curve
                .points
                .into_iter()
                .map(|p| Solved { lambda: p.lambda, value: p.value, beta: p.beta, converged: p.converged })
                .collect());
        }
        voi_core::grid::validate_grid(grid)?;
        grid.iter().map(|&l| self.point(kind, branch, l)).collect()
    }
}

fn context(file: &ProblemFile, sequential: bool) -> CliResult<Context<'_>> {
    let exec = execution(sequential);
    Ok(Context {
        file,
        prob: file.to_problem()?,
        shannon: ShannonOptions { execution: exec, ..Default::default() },
        enumeration: EnumOptions { cap: enum_cap()?, execution: exec },
    })
}

fn rows(points: Vec<Solved>, label: Option<&'static str>, sign: f64) -> Vec<CurveRow> {
    points
        .into_iter()
        .map(|p| CurveRow {
            branch: label,
            lambda: sign * p.lambda,
            value: p.value,
            beta: p.beta,
            converged: p.converged,
        })
        .collect()
}

pub fn cmd_curve(args: &CurveArgs) -> CliResult<()> {
    let file = ProblemFile::load(&args.problem)?;
    let grid = args.lambda.parse::<LambdaGrid>()?.values();
    let format = resolve_format(&args.output)?;
    let ctx = context(&file, args.sequential)?;

    let (rows, origin_upper, origin_lower, branch_name) = match args.branch {
        BranchArg::Upper => (rows(ctx.branch(args.kind, Branch::Upper, &grid)?, None, 1.0), None, None, "upper"),
        BranchArg::Lower => (rows(ctx.branch(args.kind, Branch::Lower, &grid)?, None, 1.0), None, None, "lower"),
        BranchArg::S if args.kind == SolverKind::Shannon => {
            let s = assemble_s_curve_with(&ctx.prob, &grid, &ctx.shannon)?;
            let mut all: Vec<CurveRow> = s
                .losses
                .iter()
                .rev()
                .map(|p| (p, "lower"))
                .chain(s.gains.iter().map(|p| (p, "upper")))
                .map(|(p, b)| CurveRow {
                    branch: Some(b),
                    lambda: p.key,
                    value: p.point.value,
                    beta: p.point.beta,
                    converged: p.point.converged,
                })
                .collect();
            all.shrink_to_fit();
            (all, Some(s.origin_upper), Some(s.origin_lower), "s")
        }
        BranchArg::S => {
            let mut lower = rows(ctx.branch(args.kind, Branch::Lower, &grid)?, Some("lower"), -1.0);
            lower.reverse();
            lower.extend(rows(ctx.branch(args.kind, Branch::Upper, &grid)?, Some("upper"), 1.0));
            let upper0 = ctx.point(args.kind, Branch::Upper, 0.0)?.value;
            let lower0 = ctx.point(args.kind, Branch::Lower, 0.0)?.value;
            (lower, Some(upper0), Some(lower0), "s")
        }
    };
    let unconverged = rows.iter().filter(|r| !r.converged).count();
    let out = CurveOutput {
        problem: file.name.clone(),
        kind: args.kind.name().into(),
        branch: branch_name.into(),
        rows,
        origin_upper,
        origin_lower,
    };
    with_output(&args.output, |w| out.write(format, w))?;
    if unconverged > 0 {
        return Err(CliError::Solver(format!("{unconverged} curve points did not converge")));
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct ParadoxReport {
    pub name: String,
    pub note: String,
    pub eu_p: f64,
    pub entropy_p: f64,
    pub eu_q: Option<f64>,
    pub entropy_q: Option<f64>,
    pub verdict: Option<&'static str>,
    pub family_size: usize,
    pub family_mean_eu: Option<f64>,
}

pub fn paradox_report(name: &str, n: Option<u32>) -> CliResult<ParadoxReport> {
    let which: Paradox = name.parse()?;
    let f = paradox(which, n)?;
    let family_mean_eu = (!f.family.is_empty())
        .then(|| f.family.iter().map(expected_utility).sum::<f64>() / f.family.len() as f64);
    Ok(ParadoxReport {
        name: which.name().into(),
        note: f.note.clone(),
        eu_p: expected_utility(&f.p),
        entropy_p: entropy(f.p.dist()),
        eu_q: f.q.as_ref().map(expected_utility),
        entropy_q: f.q.as_ref().map(|q| entropy(q.dist())),
        verdict: f.q.as_ref().map(|q| eu_compare(&f.p, q).as_str()),
        family_size: f.family.len(),
        family_mean_eu,
    })
}

fn pretty(x: f64) -> String {
    let s = format!("{x:.10}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

pub fn cmd_paradox(args: &ParadoxArgs, out: &mut dyn Write) -> CliResult<()> {
    let r = paradox_report(&args.name, args.n)?;
    if args.json {
        serde_json::to_writer_pretty(&mut *out, &r)?;
        writeln!(out)?;
        return Ok(());
    }
    writeln!(out, "{}: {}", r.name, r.note)?;
    writeln!(out, "EU(P) = {}", pretty(r.eu_p))?;
    if let Some(q) = r.eu_q {
        writeln!(out, "EU(Q) = {}", pretty(q))?;
    }
    writeln!(out, "H(P) = {}", pretty(r.entropy_p))?;
    if let Some(h) = r.entropy_q {
        writeln!(out, "H(Q) = {}", pretty(h))?;
    }
    if let Some(v) = r.verdict {
        writeln!(out, "verdict: P vs Q {v}")?;
    }
    if let Some(m) = r.family_mean_eu {
        writeln!(out, "family: {} compositions, mean EU = {}", r.family_size, pretty(m))?;
    }
    Ok(())
}

pub fn cmd_oracle(args: &OracleArgs) -> CliResult<()> {
    let file = ProblemFile::load(&args.problem)?;
    let lambdas = parse_lambdas(&args.lambda)?;
    let format = resolve_format(&args.output)?;
    let mut ctx = context(&file, args.sequential)?;
    let branch = if args.branch == "lower" { Branch::Lower } else { Branch::Upper };
    if let Some(tol) = args.solver_tol {
        if args.kind != SolverKind::Shannon {
            return Err(CliError::Input("--solver-tol only applies to --type shannon".into()));
        }
        if !tol.is_finite() || tol <= 0.0 {
            return Err(CliError::Input(format!("--solver-tol must be positive, got {tol}")));
        }
        ctx.shannon.lambda_tol = tol;
    }
    let target = |l: f64| format!("{}_{} lambda={l}", args.kind.name(), branch.as_str());

    let (reports, tol) = match args.kind {
        SolverKind::Shannon => {
            let res = args.resolution.unwrap_or(2000);
            let reports = lambdas
                .iter()
                .map(|&l| {
                    timed(
                        target(l),
                        res,
                        || {
                            Ok(match branch {
                                Branch::Upper => grid_max_eu(&ctx.prob, l, res)?,
                                Branch::Lower => -grid_max_eu(&ctx.prob.negated(), l, res)?,
                            })
                        },
                        || ctx.point(SolverKind::Shannon, branch, l).map(|p| p.value),
                    )
                })
                .collect::<CliResult<Vec<_>>>()?;
            (reports, SHANNON_ORACLE_TOL)
        }
        SolverKind::Boltzmann | SolverKind::Hartley => {
            let (table, sign) = match branch {
                Branch::Upper => (exhaustive_deterministic_with(&ctx.prob, ctx.enumeration.cap)?, 1.0),
                Branch::Lower => (exhaustive_deterministic_with(&ctx.prob.negated(), ctx.enumeration.cap)?, -1.0),
            };
            let reports = lambdas
                .iter()
                .map(|&l| {
                    timed(
                        target(l),
                        table.len(),
                        || {
                            Ok(sign
                                * if args.kind == SolverKind::Boltzmann {
                                    table_boltzmann_max(&table, l)
                                } else {
                                    table_hartley_max(&table, l)
                                })
                        },
                        || ctx.point(args.kind, branch, l).map(|p| p.value),
                    )
                })
                .collect::<CliResult<Vec<_>>>()?;
            (reports, DETERMINISTIC_ORACLE_TOL)
        }
        SolverKind::Bregman => {
            let res = args.resolution.unwrap_or(voi_core::oracle::SIMPLEX_GRID_RESOLUTION);
            let reports = lambdas
                .iter()
                .map(|&l| {
                    let rp = file.to_resource(l)?;
                    timed(
                        target(l),
                        res,
                        || Ok(simplex_grid_value(&rp, branch, res)?),
                        || Ok(constrained_value(&rp, branch)?.value),
                    )
                })
                .collect::<CliResult<Vec<_>>>()?;
            (reports, BREGMAN_ORACLE_TOL)
        }
    };
    with_output(&args.output, |w| write_reports(&reports, format, w))?;
    let worst = reports.iter().map(|r| r.abs_diff).fold(0.0, f64::max);
    if worst > tol || reports.iter().any(|r| r.abs_diff.is_nan()) {
        return Err(CliError::Mismatch(format!(
            "oracle disagreement {worst:e} exceeds tolerance {tol:e}"
        )));
    }
    Ok(())
}

fn timed(
    target: String,
    resolution: usize,
    oracle: impl FnOnce() -> CliResult<f64>,
    solver: impl FnOnce() -> CliResult<f64>,
) -> CliResult<OracleReport> {
    let start = Instant::now();
    let oracle_value = oracle()?;
    let solver_value = solver()?;
    let elapsed = start.elapsed().as_secs_f64();
    Ok(OracleReport::new(target, oracle_value, solver_value, resolution, elapsed))
}

pub fn cmd_validate(path: &Path, out: &mut dyn Write) -> CliResult<()> {
    let file = ProblemFile::load(path)?;
    let prob = file.to_problem()?;
    if file.generator.is_some() {
        file.to_resource(0.0)?;
    }
    writeln!(
        out,
        "ok: {} ({} states, {} actions{})",
        file.name,
        prob.n_states(),
        prob.n_actions(),
        if file.generator.is_some() { ", generator" } else { "" }
    )?;
    Ok(())
}
