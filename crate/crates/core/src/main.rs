use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use homindex::cli::{self, Command, RunConfig, ScenarioSpec};
use homindex::Error;

/// Numerical invariants of selfadjoint operator paths and homoclinic
/// bifurcation: degrees, parities, kernel bundles, and first
/// Stiefel-Whitney classes.
#[derive(Parser)]
#[command(name = "homindex", version, about)]
struct Args {
    /// TOML config file; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for the report document and exports.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for grid scans (0 = automatic).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Seed for randomized verification batches.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Integration horizon T.
    #[arg(long, global = true)]
    horizon: Option<f64>,

    /// Grid resolution per torus coordinate, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    resolution: Option<Vec<usize>>,

    /// Principal-angle tolerance for kernel detection.
    #[arg(long = "tol-angle", global = true)]
    tol_angle: Option<f64>,

    /// Basis window N (dimension 2N+1).
    #[arg(long = "window-n", global = true)]
    window_n: Option<usize>,

    /// Sample count (path samples, per-segment samples, or loop samples).
    #[arg(long, global = true)]
    samples: Option<usize>,

    /// Scenario name for w1/scan/scenario-report ("moebius" or
    /// "pejsachowicz").
    #[arg(long, global = true)]
    scenario: Option<String>,

    /// Torus dimension m of the pejsachowicz scenario.
    #[arg(short = 'm', long, global = true)]
    torus_dim: Option<usize>,

    /// Write the scan grid as CSV next to the report.
    #[arg(long, global = true)]
    grid_csv: bool,

    #[command(subcommand)]
    command: Option<CliCommand>,
}

#[derive(Subcommand, Clone, Copy)]
enum CliCommand {
    /// Parity of the built-in diagonal path over [-1, 1].
    Parity,
    /// Closed-loop parity of the truncated loop with segment decomposition.
    LoopParity,
    /// w1 of the asymptotic stable bundles along the scenario loop.
    W1,
    /// Kernel scan over the scenario's parameter torus.
    Scan,
    /// Run the full verification suite.
    Verify,
    /// End-to-end bifurcation pipeline report for a scenario.
    ScenarioReport,
}

impl From<CliCommand> for Command {
    fn from(c: CliCommand) -> Command {
        match c {
            CliCommand::Parity => Command::Parity,
            CliCommand::LoopParity => Command::LoopParity,
            CliCommand::W1 => Command::W1,
            CliCommand::Scan => Command::Scan,
            CliCommand::Verify => Command::Verify,
            CliCommand::ScenarioReport => Command::ScenarioReport,
        }
    }
}

fn build_config(args: &Args) -> Result<RunConfig, Error> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::ConfigError(format!("cannot read {}: {e}", path.display()))
            })?;
            cli::parse_config(&text)?
        }
        None => {
            let command = args
                .command
                .ok_or_else(|| Error::ConfigError("no command given (and no --config)".into()))?;
            RunConfig {
                command: command.into(),
                seed: 0,
                workers: 0,
                horizon: 20.0,
                tol_angle: 1e-3,
                window_n: 4,
                samples: 64,
                resolution: Vec::new(),
                out_dir: None,
                grid_csv: false,
                scenario: None,
            }
        }
    };
    if let Some(command) = args.command {
        config.command = command.into();
    }
    if let Some(dir) = &args.out {
        config.out_dir = Some(dir.clone());
    }
    if let Some(workers) = args.workers {
        config.workers = workers;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(horizon) = args.horizon {
        config.horizon = horizon;
    }
    if let Some(resolution) = &args.resolution {
        config.resolution = resolution.clone();
    }
    if let Some(tol_angle) = args.tol_angle {
        config.tol_angle = tol_angle;
    }
    if let Some(window_n) = args.window_n {
        config.window_n = window_n;
    }
    if let Some(samples) = args.samples {
        config.samples = samples;
    }
    if args.grid_csv {
        config.grid_csv = true;
    }
    if let Some(name) = &args.scenario {
        let spec = config.scenario.get_or_insert(ScenarioSpec {
            name: name.clone(),
            m: None,
            a_plus: None,
            a_minus: None,
            profile_rate: None,
            inert_dims: None,
        });
        spec.name = name.clone();
    }
    if let Some(m) = args.torus_dim {
        if let Some(spec) = &mut config.scenario {
            spec.m = Some(m);
        } else {
            return Err(Error::ValidationError(
                "-m given without a scenario".into(),
            ));
        }
    }
    cli::resolve_and_validate(&mut config)?;
    Ok(config)
}

fn exit_code_for(error: &Error) -> u8 {
    match error {
        Error::ConfigError(_) | Error::ValidationError(_) | Error::InvalidConfig(_) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let config = match build_config(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code_for(&e));
        }
    };
    match cli::run(&config) {
        Ok(report) => {
            print!("{}", report.summary());
            for note in &report.diagnostics {
                eprintln!("note: {note}");
            }
            if let Some(dir) = &config.out_dir {
                println!("report written to {}", dir.join("report.json").display());
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
