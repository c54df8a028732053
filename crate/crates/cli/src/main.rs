use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use wbmhd::{convergence_study, execute, ConfigLayer, RunConfig};

#[derive(Parser)]
#[command(name = "wbmhd", version, about = "Well-balanced semi-implicit MHD solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one problem and write CSV output.
    Run {
        config: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Run a problem on several grids and print the L1 error table.
    Convergence {
        config: PathBuf,
        /// Cells per axis, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "20,40,80,160")]
        grids: Vec<usize>,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Args)]
struct Flags {
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    order: Option<u8>,
    #[arg(long, value_enum)]
    wb: Option<Switch>,
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long = "mach-max")]
    mach_max: Option<f64>,
}

impl From<Flags> for ConfigLayer {
    fn from(f: Flags) -> Self {
        ConfigLayer {
            nx: f.nx,
            ny: f.ny,
            cfl: f.cfl,
            order: f.order,
            wb: f.wb.map(|s| matches!(s, Switch::On)),
            t_end: f.t_end,
            out: f.out,
            eta: f.eta,
            mach_max: f.mach_max,
            ..Default::default()
        }
    }
}

fn real_main(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, flags } => {
            let cfg = RunConfig::load(&config, flags.into())?;
            let s = execute(&cfg)?;
            println!(
                "{}: {} steps to t = {}, {} Krylov iterations, max |div B| = {:e}",
                cfg.problem, s.steps, s.t, s.krylov_iterations, s.max_div_b
            );
            println!("output in {}", cfg.out.display());
        }
        Command::Convergence { config, grids, flags } => {
            let cfg = RunConfig::load(&config, flags.into())?;
            if cfg.problem == "sod_gravity" {
                anyhow::bail!("sod_gravity has no stationary reference; use `run`");
            }
            let spec = cfg.problem_spec()?;
            let table = convergence_study(&spec, &grids, cfg.solver_config())?;
            print!("{table}");
            std::fs::create_dir_all(&cfg.out)?;
            table.write_csv(&cfg.out.join("convergence.csv"))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match real_main(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
