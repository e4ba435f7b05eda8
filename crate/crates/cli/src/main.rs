//! `motpaver`: martingale transport on finitely supported marginals.
//!
//! Exit codes: 0 success or certified, 1 other failure, 2 not in convex
//! order, 3 monotonicity violated, 4 unreadable input.

mod commands;
mod demo;
mod expr;
mod problem;
mod report;
mod svg;
mod verify;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use motpaver::monotonicity::SweepParams;
use motpaver::{Rational, Scalar};

use commands::{Failure, GammaSource, Outcome, Output};
use problem::{Mode, ProblemFile};

#[derive(Parser)]
#[command(name = "motpaver", version, about = "Martingale optimal transport on finitely supported marginals")]
struct Cli {
    /// Upper bound on worker threads for independent LP solves.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Include wall-clock timing in the report (makes output nondeterministic).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ProblemArgs {
    /// Problem file (JSON).
    problem: PathBuf,
    /// Re-check the certificates of a saved report instead of solving.
    #[arg(long, value_name = "REPORT")]
    verify: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Largest number of x-atoms in a random plan.
    #[arg(long, default_value_t = 4)]
    max_x_atoms: usize,
    /// Random plans drawn on top of the exhaustive two-atom sweep.
    #[arg(long, default_value_t = 64)]
    random_plans: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Float,
}

#[derive(Subcommand)]
enum Command {
    /// Decide convex order and print a coupling or a separating triple.
    CheckOrder(ProblemArgs),
    /// Solve the primal problem and extract the dual certificate.
    Solve(ProblemArgs),
    /// Compute the irreducible components with their attached atoms.
    Pave {
        #[command(flatten)]
        args: ProblemArgs,
        /// Write an SVG of the paving (dimension 2 only).
        #[arg(long, value_name = "PATH")]
        plot: Option<PathBuf>,
    },
    /// Disintegrate the problem on its components and check the values.
    Decompose(ProblemArgs),
    /// Search for improving competitors inside a candidate support.
    Certify {
        #[command(flatten)]
        args: ProblemArgs,
        /// `optimizer`, or a JSON file of `[i, j]` atom-index pairs.
        #[arg(long, default_value = "optimizer")]
        gamma: String,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Replay a worked example: example-2.1, example-4.1 or example-4.2.
    Demo {
        name: String,
        /// Grid resolution for the examples with a density.
        #[arg(long)]
        grid: Option<usize>,
        /// Scalar mode; example-4.1 defaults to float, the others to exact.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Write an SVG of the paving (planar examples only).
        #[arg(long, value_name = "PATH")]
        plot: Option<PathBuf>,
        #[command(flatten)]
        sweep: SweepArgs,
    },
}

enum Fatal {
    Parse(String),
    Other(String),
}

impl From<Failure> for Fatal {
    fn from(f: Failure) -> Self {
        match f {
            Failure::Input(m) => Fatal::Other(format!("invalid input: {m}")),
            Failure::Library(m) => Fatal::Other(m),
        }
    }
}

fn seed() -> Result<u64, Fatal> {
    match std::env::var("MOTPAVER_SEED") {
        Err(_) => Ok(0),
        Ok(text) => text
            .trim()
            .parse()
            .map_err(|_| Fatal::Parse(format!("MOTPAVER_SEED must be an unsigned integer, got `{text}`"))),
    }
}

fn read(path: &Path) -> Result<String, Fatal> {
    std::fs::read_to_string(path).map_err(|e| Fatal::Parse(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<ProblemFile, Fatal> {
    problem::parse_problem(&read(path)?).map_err(|e| Fatal::Parse(format!("{}: {e}", path.display())))
}

fn sweep_params(sweep: &SweepArgs) -> Result<SweepParams, Fatal> {
    Ok(SweepParams {
        max_x_atoms: sweep.max_x_atoms.max(1),
        random_plans: sweep.random_plans,
        seed: seed()?,
    })
}

/// Runs `f` in the problem's scalar mode.
fn in_mode<F>(file: &ProblemFile, f: F) -> Result<(Output, Option<Value>), Fatal>
where
    F: Fn(&dyn ModeRunner) -> Result<(Output, Option<Value>), Fatal>,
{
    match file.mode {
        Mode::Exact => f(&Runner::<Rational>(file, std::marker::PhantomData)),
        Mode::Float => f(&Runner::<f64>(file, std::marker::PhantomData)),
    }
}

struct Runner<'a, S>(&'a ProblemFile, std::marker::PhantomData<S>);

/// Object-safe bridge from the CLI to generic command code.
trait ModeRunner {
    fn run(&self, command: &Command, verify: Option<&Value>) -> Result<(Output, Option<Value>), Fatal>;
}

impl<S: Scalar> ModeRunner for Runner<'_, S> {
    fn run(&self, command: &Command, verify: Option<&Value>) -> Result<(Output, Option<Value>), Fatal> {
        let problem = self.0.build::<S>().map_err(|e| Fatal::Parse(e.to_string()))?;
        if let Some(saved) = verify {
            let name = command_name(command);
            let outcome = verify::verify(name, saved, &problem).map_err(Fatal::Other)?;
            let reproduced = outcome.reproduced();
            let body = json!({
                "verdict": if reproduced { "reproduced" } else { "not_reproduced" },
                "verified_verdict": saved.get("verdict"),
                "checks": outcome.to_json(),
            });
            return Ok((
                Output {
                    body,
                    outcome: Outcome::Success,
                    svg: None,
                },
                Some(json!(reproduced)),
            ));
        }
        let out = match command {
            Command::CheckOrder(_) => commands::check_order(&problem),
            Command::Solve(_) => commands::solve(&problem),
            Command::Pave { plot, .. } => commands::pave_command(&problem, plot.is_some()),
            Command::Decompose(_) => commands::decompose(&problem),
            Command::Certify { gamma, sweep, .. } => {
                let source = if gamma == "optimizer" {
                    GammaSource::Optimizer
                } else {
                    let text = read(Path::new(gamma))?;
                    GammaSource::Pairs(commands::read_gamma(&text).map_err(|e| Fatal::Parse(format!("{gamma}: {e}")))?)
                };
                commands::certify(&problem, &source, &sweep_params(sweep)?)
            }
            Command::Demo { .. } => unreachable!("demos do not read problem files"),
        }?;
        Ok((out, None))
    }
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::CheckOrder(_) => "check-order",
        Command::Solve(_) => "solve",
        Command::Pave { .. } => "pave",
        Command::Decompose(_) => "decompose",
        Command::Certify { .. } => "certify",
        Command::Demo { .. } => "demo",
    }
}

fn problem_args(command: &Command) -> Option<&ProblemArgs> {
    match command {
        Command::CheckOrder(a) | Command::Solve(a) | Command::Decompose(a) => Some(a),
        Command::Pave { args, .. } | Command::Certify { args, .. } => Some(args),
        Command::Demo { .. } => None,
    }
}

fn plot_path(command: &Command) -> Option<&PathBuf> {
    match command {
        Command::Pave { plot, .. } | Command::Demo { plot, .. } => plot.as_ref(),
        _ => None,
    }
}

fn execute(cli: &Cli) -> Result<(Value, u8), Fatal> {
    let started = Instant::now();
    let mut echo = json!({"name": command_name(&cli.command)});
    let (output, verified, mode, tolerance) = match &cli.command {
        Command::Demo {
            name,
            grid,
            mode,
            plot,
            sweep,
        } => {
            let demo = demo::Demo::parse(name).ok_or_else(|| {
                Fatal::Parse(format!("unknown demo `{name}`; expected example-2.1, example-4.1 or example-4.2"))
            })?;
            let grid = grid.unwrap_or(demo.default_grid());
            if demo != demo::Demo::Example42 && grid == 0 {
                return Err(Fatal::Other("--grid must be positive".into()));
            }
            let mode = match mode {
                Some(ModeArg::Exact) => Mode::Exact,
                Some(ModeArg::Float) => Mode::Float,
                None if demo == demo::Demo::Example41 => Mode::Float,
                None => Mode::Exact,
            };
            echo["demo"] = json!(demo.name());
            if demo != demo::Demo::Example42 {
                echo["grid"] = json!(grid);
            }
            let params = sweep_params(sweep)?;
            let out = match mode {
                Mode::Exact => demo::run::<Rational>(demo, grid, &params, plot.is_some()),
                Mode::Float => demo::run::<f64>(demo, grid, &params, plot.is_some()),
            }?;
            (out, None, mode, motpaver::Tolerance::DEFAULT)
        }
        command => {
            let args = problem_args(command).expect("non-demo commands take a problem");
            echo["problem"] = json!(args.problem.display().to_string());
            let file = load(&args.problem)?;
            let saved = match &args.verify {
                Some(path) => {
                    echo["verify"] = json!(path.display().to_string());
                    let text = read(path)?;
                    Some(serde_json::from_str::<Value>(&text).map_err(|e| {
                        Fatal::Parse(format!("{}: line {}, column {}: {e}", path.display(), e.line(), e.column()))
                    })?)
                }
                None => None,
            };
            let (out, verified) = in_mode(&file, |runner| runner.run(command, saved.as_ref()))?;
            (out, verified, file.mode, file.tolerance)
        }
    };
    if let (Some(path), Some(svg)) = (plot_path(&cli.command), &output.svg) {
        std::fs::write(path, svg).map_err(|e| Fatal::Other(format!("{}: {e}", path.display())))?;
    }
    let mut report = json!({
        "schema": report::SCHEMA,
        "command": echo,
        "mode": mode.name(),
        "tolerance": tolerance.0,
    });
    if let Value::Object(body) = output.body {
        for (k, v) in body {
            report[k] = v;
        }
    }
    if cli.timing {
        report["timing_ms"] = json!(started.elapsed().as_secs_f64() * 1e3);
    }
    let code = match (verified, output.outcome) {
        (Some(Value::Bool(false)), _) => 1,
        (_, Outcome::Success) => 0,
        (_, Outcome::NotOrdered) => 2,
        (_, Outcome::Violated) => 3,
    };
    Ok((report, code))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global() {
            eprintln!("motpaver: cannot size the thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    match execute(&cli) {
        Ok((report, code)) => {
            let text = serde_json::to_string_pretty(&report).expect("serializable");
            // A closed pipe (`| head`) is not an error of the computation.
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            ExitCode::from(code)
        }
        Err(Fatal::Parse(m)) => {
            eprintln!("motpaver: {m}");
            ExitCode::from(4)
        }
        Err(Fatal::Other(m)) => {
            eprintln!("motpaver: {m}");
            ExitCode::from(1)
        }
    }
}
