use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fpsi_core::app::{run, run_study, RunConfig, ScenarioId, Study};
use fpsi_core::mesh::{load_any_mesh, PhysicalTagMap};
use fpsi_core::FpsiError;

#[derive(Parser)]
#[command(name = "fpsi", about = "Fluid–poroelastic structure interaction solver", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario described by a TOML configuration file.
    Run {
        config: PathBuf,
        /// Override the output directory of the configuration.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Convergence study for a manufactured solution.
    Mms {
        /// One of stokes, biot, time.
        study: Study,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        /// Directory for convergence.txt.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Read a mesh file, validate it and print a summary.
    CheckMesh {
        path: PathBuf,
        /// TOML file with physical-group ids for Gmsh input.
        #[arg(long)]
        tags: Option<PathBuf>,
    },
    /// Print a configuration template with every default filled in.
    Template {
        #[arg(default_value = "pressure_wave_2d")]
        scenario: ScenarioId,
    },
    /// Print the version.
    Version,
}

/// Exit status: 1 for configuration, mesh and parameter errors, 2 for anything
/// that goes wrong while computing or writing results.
fn status(e: &FpsiError) -> u8 {
    if e.is_config_error() {
        1
    } else {
        2
    }
}

fn load_tags(path: Option<&Path>) -> Result<PhysicalTagMap, FpsiError> {
    match path {
        None => Ok(PhysicalTagMap::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| FpsiError::Config(format!("{}: {e}", p.display())))?;
            toml::from_str(&text).map_err(|e| FpsiError::Config(format!("{}: {e}", p.display())))
        }
    }
}

fn execute(cmd: Command) -> Result<(), FpsiError> {
    match cmd {
        Command::Run { config, output } => {
            // an unreadable configuration is a configuration error
            let mut cfg = RunConfig::load(&config).map_err(|e| match e {
                FpsiError::Io { path, source } => FpsiError::Config(format!("{}: {source}", path.display())),
                e => e,
            })?;
            if output.is_some() {
                cfg.output_dir = output;
            }
            let summary = run(&cfg)?;
            println!(
                "{}: {} steps, t = {:.6e} s",
                cfg.scenario.name(),
                summary.steps,
                summary.final_time
            );
            if let Some(errors) = summary.errors {
                for (name, e) in errors.entries() {
                    println!("L2 error {name:<4} {e:.6e}");
                }
            }
            if let Some(dir) = summary.output_dir {
                println!("output in {}", dir.display());
            }
        }
        Command::Mms { study, levels, output } => {
            for table in run_study(study, levels, output.as_deref())? {
                println!("{}", table.render());
            }
        }
        Command::CheckMesh { path, tags } => {
            let tags = load_tags(tags.as_deref())?;
            let mesh = load_any_mesh(&path, &tags)?;
            print!("{}", mesh.summary());
        }
        Command::Template { scenario } => {
            let mut cfg = RunConfig::new(scenario, 1e-4, 1e-2);
            cfg.output_dir = Some(PathBuf::from("output"));
            print!("{}", cfg.to_toml());
        }
        Command::Version => println!("fpsi {}", env!("CARGO_PKG_VERSION")),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // bad arguments are configuration errors; clap would exit with 2
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(status(&e))
        }
    }
}
