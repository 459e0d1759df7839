use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use dfi::output::{self, Format};
use dfi::run::{self, all_failed, ExecutionMode};
use dfi::scenario::Scenario;
use dfi::DfiError;

const EXIT_SCENARIO: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "dfi", version, about = "Quantum-limited sensitivity of displacement-noise-free cavity interferometers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sensitivity and Fisher-information decomposition over frequency.
    Sweep(Common),
    /// Sensitivity under each noise source alone and combined.
    Budget(Common),
    /// Grid search over mirror transmissivities.
    OptimizeT(Common),
    /// Compare odd polygons at equal intracavity power.
    Ngons(Common),
    /// Standard Sagnac against the DFI triangle.
    Sagnac(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario TOML file; defaults apply when omitted.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: Format,
    /// Worker threads (all cores by default).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    fmin: Option<f64>,
    #[arg(long)]
    fmax: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
}

enum Failure {
    Scenario(String),
    Numerical(String),
    Other(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Self::Other(e)
    }
}

fn load(args: &Common) -> Result<Scenario, Failure> {
    let mut sc = match &args.scenario {
        Some(p) => Scenario::from_path(p).map_err(|e| Failure::Scenario(e.to_string()))?,
        None => Scenario::default(),
    };
    if let Some(f) = args.fmin {
        sc.sweep.f_min = f;
    }
    if let Some(f) = args.fmax {
        sc.sweep.f_max = f;
    }
    if let Some(p) = args.points {
        sc.sweep.points = p;
    }
    sc.validate().map_err(|e| Failure::Scenario(e.to_string()))?;
    Ok(sc)
}

fn sink(path: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Setup errors from a valid scenario (e.g. a cavity with no open port) are
/// numerical failures of every row.
fn setup(e: DfiError) -> Failure {
    match e {
        DfiError::Scenario(m) => Failure::Scenario(m),
        other => Failure::Numerical(other.to_string()),
    }
}

fn execute(cmd: &Command) -> Result<(), Failure> {
    let args = match cmd {
        Command::Sweep(a) | Command::Budget(a) | Command::OptimizeT(a) | Command::Ngons(a) | Command::Sagnac(a) => a,
    };
    let sc = load(args)?;
    let freqs = sc.sweep.frequencies();
    let mode = ExecutionMode::default();
    let fmt = args.format;

    let result = run::with_threads(args.threads, || -> Result<(), Failure> {
        let mut out = sink(&args.out)?;
        let write_err = |e: DfiError| Failure::Other(anyhow::anyhow!(e));
        match cmd {
            Command::Sweep(_) => {
                let ev = run::Evaluator::from_scenario(&sc).map_err(setup)?;
                let rows = run::run_sweep(&ev, &freqs, mode);
                output::write_samples(&mut out, &rows, fmt).map_err(write_err)?;
                out.flush().context("writing output")?;
                if all_failed(&rows) {
                    return Err(Failure::Numerical(format!("all {} frequencies failed", rows.len())));
                }
            }
            Command::Budget(_) => {
                let b = run::noise_budget(&sc, &freqs, mode).map_err(setup)?;
                output::write_budget(&mut out, &b, fmt).map_err(write_err)?;
                out.flush().context("writing output")?;
                if b.sigma.iter().all(|row| row.iter().all(Option::is_none)) {
                    return Err(Failure::Numerical("every budget entry failed".into()));
                }
            }
            Command::OptimizeT(_) => {
                let r = run::optimize_transmissivity(&sc, mode).map_err(setup)?;
                output::write_optimize(&mut out, &r, fmt).map_err(write_err)?;
                out.flush().context("writing output")?;
                if !r.best.objective.is_finite() {
                    return Err(Failure::Numerical("no grid point produced a finite objective".into()));
                }
                eprintln!(
                    "best transmissivities {:?}, mean ln sigma {:.6}",
                    r.best.transmissivities, r.best.objective
                );
            }
            Command::Ngons(_) => {
                let runs = run::compare_ngons(&sc, &freqs, mode).map_err(setup)?;
                output::write_ngons(&mut out, &runs, fmt).map_err(write_err)?;
                out.flush().context("writing output")?;
                for r in &runs {
                    eprintln!(
                        "n = {}: arm length {:.3} m, shot-noise QFI ratio {}",
                        r.n,
                        r.arm_length,
                        output::fmt_opt(r.qfi_ratio)
                    );
                }
                if runs.iter().all(|r| all_failed(&r.samples)) {
                    return Err(Failure::Numerical("all polygons failed at every frequency".into()));
                }
            }
            Command::Sagnac(_) => {
                let cmp = run::compare_sagnac(&sc, &freqs, mode).map_err(setup)?;
                output::write_sagnac(&mut out, &cmp, fmt).map_err(write_err)?;
                out.flush().context("writing output")?;
                if all_failed(&cmp.sagnac) && all_failed(&cmp.dfi) {
                    return Err(Failure::Numerical("all frequencies failed".into()));
                }
            }
        }
        Ok(())
    });
    match result {
        Ok(r) => r,
        Err(e) => Err(Failure::Other(anyhow::anyhow!(e))),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Scenario(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_SCENARIO)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_NUMERICAL)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
