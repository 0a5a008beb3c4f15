#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod output;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use restriction_lab::LabError;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use commands::Output;
use settings::{config_hash, merge, FileConfig, Format};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or input files. Exit status 2.
    Schema(String),
    /// The computation failed or certified a violation. Exit status 3.
    Numerical(String),
}

impl From<LabError> for CliError {
    fn from(e: LabError) -> CliError {
        if e.is_schema() {
            CliError::Schema(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "restriction-lab", version, about = "Numerical experiments with Fourier extension operators")]
struct Cli {
    /// TOML config; flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads
    #[arg(long, global = true, env = "RESTRICTION_LAB_WORKERS")]
    workers: Option<usize>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a surface and report its measure and local geometry
    Surface(commands::SurfaceArgs),
    /// Lorentz quasinorm of weighted samples
    Norm(commands::NormArgs),
    /// Evaluate the extension operator on a box
    Extend(commands::ExtendArgs),
    /// Run a slicing chain over a seeded corpus
    Chain(commands::ChainArgs),
    /// Knapp scaling sweep for a finite-type graph
    Knapp(commands::KnappArgs),
    /// Integrate the normal-form ODE
    Ode(commands::OdeArgs),
    /// Check a graph against the finite-type normal form
    Normalform(commands::NormalFormArgs),
    /// Run the acceptance criteria
    Acceptance(commands::AcceptanceArgs),
}

const DEFAULT_SEED: u64 = 20240917;

fn resolve<T: Serialize + DeserializeOwned>(name: &str, cli: &T, file: &FileConfig) -> Result<(T, Value), CliError> {
    let args: T = merge(name, cli, file.section(name))?;
    let v = serde_json::to_value(&args).expect("args serialise");
    Ok((args, v))
}

fn dispatch(cmd: &Command, file: &FileConfig, seed: u64) -> Result<(&'static str, Value, Output), CliError> {
    Ok(match cmd {
        Command::Surface(a) => {
            let (a, v) = resolve("surface", a, file)?;
            ("surface", v, commands::surface(&a)?)
        }
        Command::Norm(a) => {
            let (a, v) = resolve("norm", a, file)?;
            ("norm", v, commands::norm(&a, seed)?)
        }
        Command::Extend(a) => {
            let (a, v) = resolve("extend", a, file)?;
            ("extend", v, commands::extend(&a)?)
        }
        Command::Chain(a) => {
            let (a, v) = resolve("chain", a, file)?;
            ("chain", v, commands::chain(&a, seed)?)
        }
        Command::Knapp(a) => {
            let (a, v) = resolve("knapp", a, file)?;
            ("knapp", v, commands::knapp(&a)?)
        }
        Command::Ode(a) => {
            let (a, v) = resolve("ode", a, file)?;
            ("ode", v, commands::ode(&a, seed)?)
        }
        Command::Normalform(a) => {
            let (a, v) = resolve("normalform", a, file)?;
            ("normalform", v, commands::normalform(&a)?)
        }
        Command::Acceptance(a) => {
            let (a, v) = resolve("acceptance", a, file)?;
            ("acceptance", v, commands::acceptance(&a, seed)?)
        }
    })
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let seed = cli.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
    let format = cli.format.or(file.format).unwrap_or(Format::Both);
    let out_dir = cli.out_dir.clone().or(file.out_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
    if let Some(w) = cli.workers.or(file.workers) {
        if w == 0 {
            return Err(CliError::Schema("workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| CliError::Numerical(format!("thread pool: {e}")))?;
    }

    let (name, resolved, out) = dispatch(&cli.command, &file, seed)?;
    let hashed = json!({"command": name, "seed": seed, "args": resolved});
    let envelope = json!({
        "tool": "restriction-lab",
        "version": env!("CARGO_PKG_VERSION"),
        "command": name,
        "seed": seed,
        "config_hash": config_hash(&hashed),
        "config": resolved,
        "result": out.result,
    });
    let mut files = Vec::new();
    if format.json() {
        files.push((format!("{name}.json"), serde_json::to_string_pretty(&envelope).expect("serialises") + "\n"));
    }
    if let (true, Some(csv)) = (format.csv(), out.csv) {
        files.push((format!("{name}.csv"), csv));
    }
    let written = output::write_all(&out_dir, &files)?;
    for l in &out.lines {
        println!("{l}");
    }
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(!out.failed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(CliError::Schema(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
