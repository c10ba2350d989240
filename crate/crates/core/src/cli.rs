//! Command-line interface.
//!
//! Exit codes: 0 success, 1 an expectation failed or a run did not
//! stabilize, 2 bad usage or input.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::dynamics::{Mode, SimParams, SimState, StopReason};
use crate::energy::{energy_report, ForceField};
use crate::error::{KnotError, Result};
use crate::experiments::{ExperimentConfig, ExperimentKind};
use crate::format::{fmt_sig, round_sig};
use crate::knot::{generate_torus, load_knot, save_knot, KnotFormat, PolyKnot, TorusKnotSpec};
use crate::ropelength::{thickness, DEFAULT_SKIP};
use crate::service::{CommandLog, Server, Service};

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Debug, Parser)]
#[command(name = "knot-descent", version, about = "Self-repelling polygonal knots")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a torus knot or link polygon.
    Generate(GenerateArgs),
    /// Evolve a knot file until its energy stabilizes.
    Evolve(EvolveArgs),
    /// Print energies and thickness of a knot file.
    Measure(MeasureArgs),
    /// Run a scripted experiment and write its artifacts.
    Experiment(ExperimentArgs),
    /// Start the steering service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub p: u32,
    #[arg(long)]
    pub q: u32,
    #[arg(long, default_value_t = 80)]
    pub n: usize,
    /// Major radius.
    #[arg(long = "R", default_value_t = 2.0)]
    pub major_radius: f64,
    /// Minor radius.
    #[arg(long = "r", default_value_t = 1.0)]
    pub minor_radius: f64,
    #[arg(long)]
    pub out: PathBuf,
    /// Defaults to structured for `.json` files, plain otherwise.
    #[arg(long, value_enum)]
    pub format: Option<KnotFormat>,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[arg(long = "in", required_unless_present = "replay")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Damped)]
    pub mode: Mode,
    /// Force exponent, in [2, 6].
    #[arg(long, default_value_t = 2.0)]
    pub d: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_steps: u64,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Random kick applied before evolving, in rest lengths.
    #[arg(long, value_name = "MAG")]
    pub perturb: Option<f64>,
    /// Energy trace CSV.
    #[arg(long, value_name = "FILE")]
    pub trace: Option<PathBuf>,
    /// Rebuild a steered session from an exported command log instead of
    /// evolving.
    #[arg(long, value_name = "LOG", conflicts_with_all = ["input", "perturb", "trace"])]
    pub replay: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<KnotFormat>,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Edge pairs this close along a loop are ignored by the distance bound.
    #[arg(long, default_value_t = DEFAULT_SKIP)]
    pub skip: usize,
    /// Exponent of the reported pair potential.
    #[arg(long, default_value_t = 2.0)]
    pub d: f64,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long, value_enum)]
    pub name: ExperimentKind,
    /// Vertex count; each experiment has its own default.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value = "experiment-out")]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8787)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub bind: String,
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return ExitCode::from(2);
            }
            let _ = write!(out, "{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli, out) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 1 for failures of the simulation itself, 2 for bad input.
pub fn exit_code(e: &KnotError) -> u8 {
    match e {
        KnotError::NotConverged { .. } | KnotError::InvariantViolated { .. } | KnotError::Linking(_) => 1,
        _ => 2,
    }
}

fn out_err(e: std::io::Error) -> KnotError {
    KnotError::io("<stdout>", e)
}

fn format_for(path: &Path, format: Option<KnotFormat>) -> KnotFormat {
    format.unwrap_or_else(|| KnotFormat::from_path(path))
}

/// Runs a parsed command; returns the exit code for non-error outcomes.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<u8> {
    match cli.command {
        Command::Generate(a) => generate(a, out),
        Command::Evolve(a) => evolve(a, out),
        Command::Measure(a) => measure(a, out),
        Command::Experiment(a) => experiment(a, out),
        Command::Serve(a) => serve(a, out),
    }
}

fn generate(a: GenerateArgs, out: &mut dyn Write) -> Result<u8> {
    let spec = TorusKnotSpec { p: a.p, q: a.q, n: a.n, major_radius: a.major_radius, minor_radius: a.minor_radius };
    let knot = generate_torus(&spec)?;
    save_knot(&knot, &a.out, format_for(&a.out, a.format))?;
    writeln!(
        out,
        "vertices {}\ncomponents {}\ntotal_length {}\nsimon_energy {}",
        knot.vertex_count(),
        knot.num_components(),
        fmt_sig(knot.total_length()),
        fmt_sig(crate::energy::simon_energy(&knot)?)
    )
    .map_err(out_err)?;
    Ok(0)
}

fn evolve(a: EvolveArgs, out: &mut dyn Write) -> Result<u8> {
    let format = format_for(&a.out, a.format);
    if let Some(log) = &a.replay {
        let state = CommandLog::load(log)?.replay()?;
        save_knot(state.knot(), &a.out, format)?;
        writeln!(out, "step {}\nsimon_energy {}", state.step_index(), fmt_sig(state.simon_energy()?))
            .map_err(out_err)?;
        return Ok(0);
    }
    let input = a.input.as_deref().expect("clap requires --in without --replay");
    let params = SimParams {
        force_field: ForceField::with_exponent(a.d)?,
        dt: a.dt,
        mode: a.mode,
        rng_seed: a.seed,
        ..SimParams::default()
    };
    let mut state = SimState::new(load_knot(input)?, params)?;
    if let Some(mag) = a.perturb {
        state.perturb(mag, a.seed)?;
        state.rescale_gauge()?;
    }
    let (trace, reason) = state.evolve_until_stable(a.max_steps)?;
    state.rescale_gauge()?;
    save_knot(state.knot(), &a.out, format)?;
    if let Some(path) = &a.trace {
        trace.save_csv(path)?;
    }
    writeln!(
        out,
        "steps {}\nsimon_energy {}\nstopped_reason {reason}",
        state.step_index(),
        fmt_sig(state.simon_energy()?)
    )
    .map_err(out_err)?;
    Ok(if reason == StopReason::Stable { 0 } else { 1 })
}

fn measure_json(knot: &PolyKnot, skip: usize, d: f64) -> Result<serde_json::Value> {
    let energy = energy_report(knot, &ForceField::with_exponent(d)?)?;
    let t = thickness(knot, skip)?;
    Ok(json!({
        "vertices": knot.vertex_count(),
        "components": knot.num_components(),
        "exponent": d,
        "energy": {
            "simon_energy": round_sig(energy.simon_energy),
            "potential_energy_d": round_sig(energy.potential_energy_d),
            "spring_energy": round_sig(energy.spring_energy),
            "min_clearance": round_sig(energy.min_clearance),
        },
        "thickness": {
            "tube_radius": round_sig(t.tube_radius),
            "binding_constraint": t.binding_constraint,
            "total_length": round_sig(t.total_length),
            "ropelength": round_sig(t.ropelength),
            "skip": t.skip,
        },
    }))
}

fn measure(a: MeasureArgs, out: &mut dyn Write) -> Result<u8> {
    let knot = load_knot(&a.input)?;
    let report = measure_json(&knot, a.skip, a.d)?;
    writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("report serialization cannot fail"))
        .map_err(out_err)?;
    Ok(0)
}

fn experiment(a: ExperimentArgs, out: &mut dyn Write) -> Result<u8> {
    let mut config = ExperimentConfig::new(a.n.unwrap_or(a.name.default_n()));
    config.seed = a.seed;
    let result = a.name.run(&config)?;
    let manifest = result.write_artifacts(&a.out_dir)?;
    for e in &result.expectations {
        writeln!(out, "{} {} = {}", if e.passed { "PASS" } else { "FAIL" }, e.name, fmt_sig(e.value))
            .map_err(out_err)?;
    }
    writeln!(out, "manifest {}", manifest.display()).map_err(out_err)?;
    Ok(if result.passed() { 0 } else { 1 })
}

fn serve(a: ServeArgs, out: &mut dyn Write) -> Result<u8> {
    let server = Server::bind((a.bind.as_str(), a.port), Service::new())?;
    writeln!(out, "listening on ws://{}", server.local_addr()?).map_err(out_err)?;
    out.flush().map_err(out_err)?;
    server.run()?;
    Ok(0)
}
