//! Command-line driver for congestion-lab: run a scenario, sweep a parameter,
//! list the built-in experiment catalog, or export a built-in as a file.
//!
//! Exit codes: 0 on success, 2 on parse/validation/usage failures, 3 on
//! runtime failures (event budget exhausted, stalled run, I/O errors).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use congestion_lab::output;
use congestion_lab::scenario::{builtins, SweepConfig};
use congestion_lab::sweep::run_sweep;
use congestion_lab::{RunOptions, RunOutput, Scenario, Simulation};

#[derive(Parser)]
#[command(
    name = "congestion-lab",
    version,
    about = "Deterministic packet-level congestion experiments",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write summary.csv (plus optional extras).
    Run {
        /// Scenario file path, or a built-in name from `list`.
        scenario: String,
        #[command(flatten)]
        flags: OutputFlags,
    },
    /// Run a parameter sweep and write sweep.csv.
    ///
    /// The swept parameter comes from the scenario's own [sweep] section;
    /// --param/--values declare or override it.
    Sweep {
        /// Scenario file path, or a built-in name from `list`.
        scenario: String,
        /// Dotted path of the parameter to sweep, e.g. `connections.c1.rate`.
        #[arg(long, requires = "values")]
        param: Option<String>,
        /// Comma-separated values for --param, strictly increasing.
        #[arg(long, value_delimiter = ',', requires = "param")]
        values: Option<Vec<f64>>,
        #[command(flatten)]
        flags: OutputFlags,
    },
    /// List the built-in scenarios.
    List,
    /// Print a built-in scenario in its canonical file form.
    Export {
        /// Built-in name from `list`.
        scenario: String,
    },
}

#[derive(Args)]
struct OutputFlags {
    /// RNG seed; overrides the seed declared in the scenario.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for output files (created if missing).
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Also write timeseries.csv (on-change series of windows and queues).
    #[arg(long)]
    timeseries: bool,
    /// Also write trace.log (one line per processed event).
    #[arg(long)]
    trace: bool,
    /// Output file format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
}

/// A failed invocation, split by exit code.
enum Failure {
    /// Bad input: unknown scenario, parse or validation error (exit 2).
    Usage(anyhow::Error),
    /// The run itself failed: budget, stall, I/O (exit 3).
    Runtime(anyhow::Error),
}

impl Failure {
    fn report(self) -> ExitCode {
        let (err, code) = match self {
            Failure::Usage(e) => (e, 2),
            Failure::Runtime(e) => (e, 3),
        };
        eprintln!("error: {err:#}");
        ExitCode::from(code)
    }
}

fn usage(err: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(err.into())
}

fn runtime(err: impl Into<anyhow::Error>) -> Failure {
    Failure::Runtime(err.into())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.report(),
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { scenario, flags } => cmd_run(&scenario, &flags),
        Command::Sweep {
            scenario,
            param,
            values,
            flags,
        } => cmd_sweep(&scenario, param, values, &flags),
        Command::List => {
            for name in builtins::names() {
                println!("{name}");
            }
            Ok(())
        }
        Command::Export { scenario } => cmd_export(&scenario),
    }
}

/// Load a scenario from a file if the path exists, else by built-in name.
fn load_scenario(spec: &str) -> Result<Scenario, Failure> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))
            .map_err(Failure::Usage)?;
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("scenario");
        Scenario::parse(stem, &text).map_err(usage)
    } else if let Some(s) = Scenario::builtin(spec) {
        Ok(s)
    } else {
        Err(usage(anyhow!(
            "no scenario file or built-in named `{spec}` (see `congestion-lab list`)"
        )))
    }
}

fn run_options(flags: &OutputFlags) -> RunOptions {
    RunOptions {
        seed_override: flags.seed,
        collect_trace: flags.trace,
        collect_timeseries: flags.timeseries,
    }
}

fn cmd_run(spec: &str, flags: &OutputFlags) -> Result<(), Failure> {
    let scenario = load_scenario(spec)?;
    let sim = Simulation::new(scenario, run_options(flags)).map_err(usage)?;
    let out = sim.run().map_err(runtime)?;
    write_run_outputs(&out, flags)?;
    println!("{}", output::SUMMARY_HEADER);
    println!("{}", output::summary_line(&out.scenario, out.aggregate()));
    Ok(())
}

fn write_run_outputs(out: &RunOutput, flags: &OutputFlags) -> Result<(), Failure> {
    ensure_out_dir(&flags.out)?;
    write_file(flags.out.join("summary.csv"), &output::summary_csv(out))?;
    if flags.timeseries {
        write_file(
            flags.out.join("timeseries.csv"),
            &output::timeseries_csv(out),
        )?;
    }
    if flags.trace {
        write_file(flags.out.join("trace.log"), &output::trace_csv(out))?;
    }
    Ok(())
}

fn cmd_sweep(
    spec: &str,
    param: Option<String>,
    values: Option<Vec<f64>>,
    flags: &OutputFlags,
) -> Result<(), Failure> {
    let mut scenario = load_scenario(spec)?;
    if let (Some(param), Some(values)) = (param, values) {
        if values.is_empty() {
            return Err(usage(anyhow!("--values lists no sweep values")));
        }
        scenario.sweep = Some(SweepConfig { param, values });
        // A sweep injected from the command line bypasses the parser, so it
        // gets the same semantic checks here (known path, increasing values).
        scenario
            .validate()
            .map_err(|f| usage(anyhow!("invalid sweep: {}", f.message())))?;
    } else if scenario.sweep.is_none() {
        return Err(usage(anyhow!(
            "scenario `{}` declares no [sweep]; pass --param and --values",
            scenario.name
        )));
    }

    let result = run_sweep(&scenario, run_options(flags)).map_err(|e| match e {
        congestion_lab::sweep::SweepError::Point { .. } => runtime(e),
        _ => usage(e),
    })?;

    ensure_out_dir(&flags.out)?;
    let table = output::sweep_csv(&result);
    write_file(flags.out.join("sweep.csv"), &table)?;
    print!("{table}");
    Ok(())
}

fn cmd_export(name: &str) -> Result<(), Failure> {
    match Scenario::builtin(name) {
        Some(s) => {
            print!("{}", s.export());
            Ok(())
        }
        None => Err(usage(anyhow!(
            "no built-in scenario named `{name}` (see `congestion-lab list`)"
        ))),
    }
}

fn ensure_out_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))
        .map_err(Failure::Runtime)
}

fn write_file(path: PathBuf, content: &str) -> Result<(), Failure> {
    fs::write(&path, content)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(Failure::Runtime)
}
