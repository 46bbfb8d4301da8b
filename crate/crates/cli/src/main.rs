use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use log::info;
use risim_core::impedance::Coupling;
use risim_core::pipeline::{run_scenario, run_sweep, write_impedance_dump};
use risim_core::scenario::{load_scenario, ScenarioConfig};

#[derive(Parser)]
#[command(name = "risim", version, about = "Optimize and evaluate RIS configurations from scenario files")]
struct Cli {
    /// Override the angular grid step in degrees.
    #[arg(long, global = true)]
    grid_step: Option<f64>,
    /// Override the coupling used for evaluation.
    #[arg(long, global = true, value_enum)]
    coupling: Option<CouplingArg>,
    /// Write artifacts here instead of the scenario's own output directory.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum CouplingArg {
    Full,
    Diagonal,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario: pattern.csv, summary.json, elements.csv.
    Run { scenario: PathBuf },
    /// Run several scenarios and write comparison.csv.
    Sweep {
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
    },
    /// Write the assembled impedance set as impedance.json.
    ImpedanceDump { scenario: PathBuf },
}

fn load(cli: &Cli, path: &PathBuf) -> anyhow::Result<ScenarioConfig> {
    let mut cfg = load_scenario(path).with_context(|| format!("loading {}", path.display()))?;
    if let Some(step) = cli.grid_step {
        cfg.grid.step_deg = step;
    }
    if let Some(c) = cli.coupling {
        cfg.coupling = match c {
            CouplingArg::Full => Coupling::Full,
            CouplingArg::Diagonal => Coupling::Diagonal,
        };
    }
    cfg.validate().with_context(|| format!("applying overrides to {}", path.display()))?;
    Ok(cfg)
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Run { scenario } => {
            let cfg = load(cli, scenario)?;
            let a = run_scenario(&cfg, cli.out_dir.as_deref())?;
            let r = &a.summary.report;
            println!(
                "{}: intended {:.2} dB, specular {:.2} dB, mirror {:.2} dB (present: {}), gap {:.2} dB",
                cfg.name, r.intended.level_db, r.specular.level_db, r.mirror.level_db, r.mirror.present,
                r.gap_structural_minus_intended
            );
            info!("wrote {}", a.summary_json.display());
        }
        Command::Sweep { scenarios } => {
            let cfgs = scenarios.iter().map(|p| load(cli, p)).collect::<anyhow::Result<Vec<_>>>()?;
            let root = cli.out_dir.clone().unwrap_or_else(|| PathBuf::from("out/sweep"));
            let rows = run_sweep(&cfgs, &root)?;
            println!("{} scenarios, table at {}", rows.len(), root.join("comparison.csv").display());
        }
        Command::ImpedanceDump { scenario } => {
            let cfg = load(cli, scenario)?;
            let path = write_impedance_dump(&cfg, cli.out_dir.as_deref())?;
            println!("{}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
