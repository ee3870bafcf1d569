//! `mist`: batch front end for branch analysis, classical chaos, readout and
//! fitting. Every subcommand writes CSV/JSON files plus `manifest.json` into
//! its output directory.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mist::{CircuitParams, HilbertSpec};

use output::{Manifest, OutputDir};

/// Environment variable that caps the worker thread count.
const THREADS_ENV: &str = "MIST_THREADS";

#[derive(Parser)]
#[command(name = "mist", version, about = "Measurement-induced state transitions in a cos(phi)-coupled transmon readout")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// D = 10, d_c = 200, 2000 periods per trajectory
    Desk,
    /// D = 20, d_c = 500; slow
    Full,
}

#[derive(Args, Clone, Debug)]
pub struct Common {
    /// Circuit parameters as flat `key = value` TOML (defaults to the measured sample)
    #[arg(long)]
    params: Option<PathBuf>,
    /// Truncation preset
    #[arg(long, value_enum, default_value_t = Preset::Desk)]
    preset: Preset,
    /// Output directory (default: out/<subcommand>)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replace an existing output directory
    #[arg(long)]
    overwrite: bool,
    /// Seed for every random draw
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Labeled branches and crossings at one flux
    Branches(commands::BranchesArgs),
    /// Crossing photon numbers over a flux grid
    MistMap(commands::MistMapArgs),
    /// Poincare section and chaotic fraction of the classical driven transmon
    Poincare(commands::PoincareArgs),
    /// Chirikov overlap margins versus photon number
    Chirikov(commands::ChirikovArgs),
    /// AC Stark curve of one transition and its linear extrapolation
    Stark(commands::StarkArgs),
    /// Pointer states, threshold classification, thermometry and CLEAR pulses
    Readout(commands::ReadoutArgs),
    /// Fit circuit parameters to transition frequencies versus flux
    Fit(commands::FitArgs),
    /// Photon-number calibration from measured Stark shifts
    Calib(commands::CalibArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Branches(_) => "branches",
            Command::MistMap(_) => "mist-map",
            Command::Poincare(_) => "poincare",
            Command::Chirikov(_) => "chirikov",
            Command::Stark(_) => "stark",
            Command::Readout(_) => "readout",
            Command::Fit(_) => "fit",
            Command::Calib(_) => "calib",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Branches(a) => &a.common,
            Command::MistMap(a) => &a.common,
            Command::Poincare(a) => &a.common,
            Command::Chirikov(a) => &a.common,
            Command::Stark(a) => &a.common,
            Command::Readout(a) => &a.common,
            Command::Fit(a) => &a.common,
            Command::Calib(a) => &a.common,
        }
    }
}

/// Settings shared by every subcommand once parameters are loaded.
pub struct Context {
    pub params: CircuitParams,
    pub spec: HilbertSpec,
    pub preset: Preset,
    pub seed: u64,
}

impl Context {
    /// Trajectory length for classical runs.
    pub fn periods(&self) -> usize {
        match self.preset {
            Preset::Desk => 2000,
            Preset::Full => 5000,
        }
    }
}

fn configure_threads() -> usize {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    log::warn!("could not size the thread pool: {e}");
                }
            }
            _ => log::warn!("ignoring {THREADS_ENV}={v}: expected a positive integer"),
        }
    }
    rayon::current_num_threads()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let threads = configure_threads();
    let started = Instant::now();
    let name = cli.command.name();
    let common = cli.command.common().clone();

    let spec = match common.preset {
        Preset::Desk => HilbertSpec::desk(),
        Preset::Full => {
            eprintln!("warning: the full preset (D = 20, d_c = 500) takes far longer than desk");
            HilbertSpec::full()
        }
    };
    let target = common.out.clone().unwrap_or_else(|| PathBuf::from("out").join(name));
    let mut out = match OutputDir::create(&target, common.overwrite) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };

    let loaded = match &common.params {
        Some(path) => CircuitParams::load(path).map_err(|e| format!("{}: {e}", path.display())),
        None => Ok(CircuitParams::measured_sample()),
    };
    let ctx = loaded.map(|params| Context { params, spec, preset: common.preset, seed: common.seed });
    let result: Result<(), String> = match &ctx {
        Err(e) => Err(e.clone()),
        Ok(ctx) => match &cli.command {
            Command::Branches(a) => commands::branches(ctx, a, &mut out),
            Command::MistMap(a) => commands::mist_map(ctx, a, &mut out),
            Command::Poincare(a) => commands::poincare(ctx, a, &mut out),
            Command::Chirikov(a) => commands::chirikov(ctx, a, &mut out),
            Command::Stark(a) => commands::stark(ctx, a, &mut out),
            Command::Readout(a) => commands::readout(ctx, a, &mut out),
            Command::Fit(a) => commands::fit(ctx, a, &mut out),
            Command::Calib(a) => commands::calib(ctx, a, &mut out),
        }
        .map_err(|e| e.to_string()),
    };
    let error = result.err();
    let manifest = Manifest {
        command: name.to_string(),
        args: std::env::args().skip(1).collect(),
        version: env!("CARGO_PKG_VERSION"),
        preset: format!("{:?}", common.preset).to_lowercase(),
        seed: common.seed,
        threads,
        params: ctx.as_ref().ok().map(|c| c.params),
        hilbert: spec,
        wall_time_s: started.elapsed().as_secs_f64(),
        files: out.files().to_vec(),
        error: error.clone(),
    };
    if let Err(e) = out.json("manifest.json", &manifest) {
        eprintln!("error: could not write manifest: {e}");
    }
    let committed = out.commit();
    match (error, committed) {
        (None, Ok(dir)) => {
            println!("{}", dir.display());
            ExitCode::SUCCESS
        }
        (Some(e), _) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        (None, Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
