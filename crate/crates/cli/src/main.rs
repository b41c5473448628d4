//! Command-line front end.
//!
//! Exit codes: 0 success, 1 failed check or fixture, 2 max iterations reached,
//! 3 degenerate normalization, 4 usage, input or I/O error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use tgeicp::bounds;
use tgeicp::cone::{reduce_polyhedral, Cone};
use tgeicp::fixtures;
use tgeicp::io::{self, ProblemFile};
use tgeicp::spectrum::{enumerate_cone_spectrum, saturation_check, SpectrumParams};
use tgeicp::{solve, verify_eigenpair, Error, SolveParams, SolveStatus, Start, StopRule};

const EXIT_FAIL: u8 = 1;
const EXIT_MAX_ITER: u8 = 2;
const EXIT_DEGENERATE: u8 = 3;
const EXIT_USAGE: u8 = 4;

#[derive(Parser)]
#[command(name = "tgeicp", version, about = "Cone eigenvalue complementarity problems for tensor pairs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
#[command(group(ArgGroup::new("source").required(true).args(["input", "fixture"])))]
struct Source {
    /// Problem file (JSON).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Name of an embedded fixture, e.g. example5.1.
    #[arg(long)]
    fixture: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum StartKind {
    Ones,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum StopKind {
    /// Stop when ||y|| <= tol.
    Norm,
    /// Stop when the dual-cone violation of -y is <= tol.
    Dual,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scaling-and-projection solver.
    Solve {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 200_000)]
        max_iter: usize,
        #[arg(long, value_enum, default_value = "norm")]
        stop: StopKind,
        #[arg(long, value_enum, conflicts_with = "x0")]
        start: Option<StartKind>,
        /// Seed for `--start random`.
        #[arg(long)]
        seed: Option<u64>,
        /// Explicit start vector, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        x0: Option<String>,
        /// Write the per-iteration trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Print the full result as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Enumerate the Pareto (or polyhedral-cone) spectrum of a small instance.
    Spectrum {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 200)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also rerun with doubled restarts and report new eigenvalues.
        #[arg(long)]
        saturation: bool,
    },
    /// Print the eigenvalue-count bounds.
    Bounds {
        #[command(flatten)]
        source: Source,
    },
    /// Verify a candidate eigenpair.
    Check {
        #[command(flatten)]
        source: Source,
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        /// Candidate vector, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Rewrite a polyhedral-cone problem on generator coefficients.
    Reduce {
        #[command(flatten)]
        source: Source,
        /// Write to a file instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run or export the embedded reference problems.
    #[command(group(ArgGroup::new("action").required(true).args(["run", "export", "list"])))]
    Fixtures {
        #[arg(long)]
        run: bool,
        /// Directory to write every fixture as `<name>.json`.
        #[arg(long)]
        export: Option<PathBuf>,
        #[arg(long)]
        list: bool,
    },
}

fn parse_vector(text: &str) -> Result<Vec<f64>, Error> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidParameter(format!("bad vector component {s:?}: {e}")))
        })
        .collect()
}

fn load_source(source: &Source) -> Result<ProblemFile, Error> {
    match (&source.input, &source.fixture) {
        (Some(path), _) => io::load_file(path),
        (None, Some(name)) => fixtures::get(name)
            .map(|f| f.problem)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown fixture {name:?}"))),
        (None, None) => unreachable!("clap requires a source"),
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<(), Error> {
    println!("{}", io::to_json(value)?);
    Ok(())
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("({})", parts.join(", "))
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Solve {
            source,
            tol,
            alpha,
            max_iter,
            stop,
            start,
            seed,
            x0,
            trace,
            json,
        } => {
            let problem = load_source(&source)?.to_problem()?;
            let start = match (start, x0, seed) {
                (_, Some(v), _) => Start::Explicit(parse_vector(&v)?),
                (Some(StartKind::Random), None, Some(seed)) => Start::Random { seed },
                (Some(StartKind::Random), None, None) => {
                    return Err(Error::InvalidParameter("--start random needs --seed".into()))
                }
                (_, None, Some(_)) => {
                    return Err(Error::InvalidParameter("--seed only applies to --start random".into()))
                }
                _ => Start::Ones,
            };
            let params = SolveParams {
                tol,
                alpha,
                max_iter,
                start,
                record_trace: trace.is_some(),
                stop: match stop {
                    StopKind::Norm => StopRule::ResidualNorm,
                    StopKind::Dual => StopRule::DualResidual,
                },
            };
            let result = solve(&problem.pair, &problem.cone, &params)?;
            if let (Some(path), Some(t)) = (&trace, &result.trace) {
                if !t.rows.is_empty() {
                    io::emit_trace(t, path)?;
                }
            }
            if json {
                print_json(&result)?;
            } else {
                println!("status: {}", result.status.as_str());
                println!("lambda: {:.10}", result.lambda);
                println!("x: {}", fmt_vec(&result.x));
                println!("rel_err: {:.6e}", result.rel_err);
                println!("iterations: {}", result.iterations);
            }
            Ok(match result.status {
                SolveStatus::Converged => 0,
                SolveStatus::MaxIterReached => EXIT_MAX_ITER,
                SolveStatus::DegenerateNormalization => EXIT_DEGENERATE,
            })
        }
        Command::Spectrum {
            source,
            restarts,
            seed,
            saturation,
        } => {
            let problem = load_source(&source)?.to_problem()?;
            let params = SpectrumParams {
                restarts_per_subset: restarts,
                seed,
                ..Default::default()
            };
            let report = enumerate_cone_spectrum(&problem.pair, &problem.cone, &params)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            if saturation {
                let pair = match &problem.cone {
                    Cone::Polyhedral(g) => reduce_polyhedral(&problem.pair, g)?.pair,
                    _ => problem.pair.clone(),
                };
                let sat = saturation_check(&pair, &params)?;
                print_json(&json!({ "spectrum": report, "saturation": sat }))?;
            } else {
                print_json(&report)?;
            }
            Ok(0)
        }
        Command::Bounds { source } => {
            let problem = load_source(&source)?.to_problem()?;
            print_json(&bounds::catalog(&problem.pair)?)?;
            Ok(0)
        }
        Command::Check { source, lambda, x, tol } => {
            let problem = load_source(&source)?.to_problem()?;
            let x = parse_vector(&x)?;
            let ep = verify_eigenpair(&problem.pair, &problem.cone, lambda, &x, tol)?;
            print_json(&ep)?;
            Ok(if ep.report.passed { 0 } else { EXIT_FAIL })
        }
        Command::Reduce { source, output } => {
            let problem = load_source(&source)?.to_problem()?;
            let Cone::Polyhedral(generators) = &problem.cone else {
                return Err(Error::InvalidParameter("reduce needs a polyhedral cone".into()));
            };
            let reduced = reduce_polyhedral(&problem.pair, generators)?;
            let p = reduced.pair.dim();
            let file = ProblemFile::from_problem(&reduced.pair, &Cone::orthant(p)?);
            match output {
                Some(path) => io::save(&file, &path)?,
                None => print_json(&file)?,
            }
            Ok(0)
        }
        Command::Fixtures { run, export, list } => {
            if list {
                for f in fixtures::all() {
                    println!("{:<18} {}", f.name, f.description);
                }
            }
            if let Some(dir) = export {
                export_fixtures(&dir)?;
            }
            if run {
                let outcomes = fixtures::run_all()?;
                let mut failed = 0;
                for o in &outcomes {
                    let mark = if o.passed { "PASS" } else { "FAIL" };
                    failed += usize::from(!o.passed);
                    println!("{mark}  {:<18} {:<28} {}", o.fixture, o.check, o.detail);
                }
                println!("{} checks, {} failed", outcomes.len(), failed);
                return Ok(if failed == 0 { 0 } else { EXIT_FAIL });
            }
            Ok(0)
        }
    }
}

fn export_fixtures(dir: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(dir)?;
    for f in fixtures::all() {
        io::save(&f.problem, &dir.join(format!("{}.json", f.name)))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
