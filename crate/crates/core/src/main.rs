use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hyperwave::config::RunConfig;
use hyperwave::evolve::Termination;
use hyperwave::harness::{cmd_converge, cmd_energy_balance, cmd_evolve, cmd_tails, RunSummary};
use hyperwave::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_BLOWUP: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;
const EXIT_OTHER: u8 = 1;

#[derive(Parser, Debug)]
#[command(name = "hyperwave", version, about = "Hyperboloidal evolution of power-nonlinearity wave equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// Configuration file (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fixed reduction order. Runs are single-threaded, so this is always the case.
    #[arg(long)]
    deterministic: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evolve and write the diagnostic time series and a final snapshot.
    Evolve(Common),
    /// Same exact linear data at several resolutions; L² errors and observed orders.
    Converge(Common),
    /// Energy, boundary flux and the balance residual.
    EnergyBalance(Common),
    /// Mode series, local power indices and decay exponents.
    Tails(Common),
}

fn exit_for(t: &Termination) -> ExitCode {
    match t {
        Termination::Completed => ExitCode::SUCCESS,
        Termination::BlowUp { .. } => ExitCode::from(EXIT_BLOWUP),
        Termination::NonFinite { .. } => ExitCode::from(EXIT_NUMERICAL),
    }
}

fn report_error(e: &Error) -> ExitCode {
    eprintln!("hyperwave: {e}");
    ExitCode::from(match e {
        Error::Config(_) | Error::Parse { .. } | Error::Domain(_) => EXIT_CONFIG,
        Error::Numerical { .. } => EXIT_NUMERICAL,
        _ => EXIT_OTHER,
    })
}

fn print_run(run: &RunSummary) {
    println!("run: {run}");
}

fn execute(cmd: Command) -> Result<ExitCode, Error> {
    let (Command::Evolve(c) | Command::Converge(c) | Command::EnergyBalance(c) | Command::Tails(c)) = &cmd;
    let text = std::fs::read_to_string(&c.config)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", c.config.display())))?;
    let cfg = RunConfig::parse(&text)?;
    let out = c.out.clone().unwrap_or_else(|| cfg.out_dir.clone());
    let code = match cmd {
        Command::Evolve(_) => {
            let r = cmd_evolve(&cfg, Some(&out))?;
            r.warnings.iter().for_each(|w| eprintln!("warning: {w}"));
            print_run(&r.run);
            exit_for(&r.run.termination)
        }
        Command::Converge(_) => {
            let r = cmd_converge(&cfg, Some(&out))?;
            for row in &r.rows {
                println!("N_r = {}: {}", row.nr, row.run);
            }
            print!("{}", r.table());
            r.rows
                .iter()
                .find(|row| row.run.termination != Termination::Completed)
                .map_or(ExitCode::SUCCESS, |row| exit_for(&row.run.termination))
        }
        Command::EnergyBalance(_) => {
            let r = cmd_energy_balance(&cfg, Some(&out))?;
            print!("{}", r.summary());
            exit_for(&r.run.termination)
        }
        Command::Tails(_) => {
            let r = cmd_tails(&cfg, Some(&out))?;
            r.warnings.iter().for_each(|w| eprintln!("warning: {w}"));
            print_run(&r.run);
            print!("{}", r.table());
            print!("{}", hyperwave::analysis::render_tail_report(&r.rows));
            exit_for(&r.run.termination)
        }
    };
    println!("output: {}", out.display());
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    execute(cli.command).unwrap_or_else(|e| report_error(&e))
}
