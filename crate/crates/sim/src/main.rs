use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ia_arrival_sim::check::run_checks;
use ia_arrival_sim::convergence::convergence_report;
use ia_arrival_sim::dof::default_window_grid;
use ia_arrival_sim::feasibility::{feasibility_report, parse_users};
use ia_arrival_sim::{run_sweep, SimError, SimResult, SweepSpec};
use serde::Serialize;

/// Monte Carlo experiments on secondary users joining a MIMO interference
/// alignment network.
#[derive(Parser)]
#[command(name = "ia-arrival", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Configuration file (flat TOML keys; see the presets directory).
    #[arg(long, global = true, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Shipped preset: fig2, fig3, fig4, fig5 or fig6.
    #[arg(long, global = true)]
    preset: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Comma-separated SNR grid in dB.
    #[arg(long, global = true, value_delimiter = ',')]
    snr: Option<Vec<f64>>,
    /// Comma-separated strategy tags (or algorithm tags for `converge`).
    #[arg(long, global = true, value_delimiter = ',')]
    strategy: Option<Vec<String>>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Rates of every strategy at every SNR and trial, as CSV. The JSON
    /// summary goes next to the CSV (`<out>.summary.json`) or to stderr.
    Sweep,
    /// DOF of every strategy from the high-SNR slope of its mean total rate.
    Dof,
    /// Iteration counts of the constrained-design solvers.
    Converge,
    /// Variable and equation counts of a network.
    Feasibility {
        /// User as `MxN:d` or `count*MxN:d`; repeatable. Defaults to the
        /// configured network, active and secondary users together.
        #[arg(long = "user")]
        users: Vec<String>,
    },
    /// Runs the invariant suite on random instances.
    Check,
}

fn load_spec(common: &Common) -> SimResult<SweepSpec> {
    let mut spec = match (&common.config, &common.preset) {
        (Some(path), _) => SweepSpec::from_path(path)?,
        (None, Some(name)) => SweepSpec::preset(name)?,
        (None, None) => SweepSpec::default(),
    };
    if let Some(seed) = common.seed {
        spec.network.seed = seed;
    }
    if let Some(trials) = common.trials {
        spec.trials = trials;
    }
    if let Some(snr) = &common.snr {
        spec.snr_db = snr.clone();
    }
    if let Some(out) = &common.out {
        spec.out = Some(out.clone());
    }
    Ok(spec)
}

fn output(path: Option<&Path>) -> SimResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> SimResult<()> {
    let mut w = output(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(io::Error::from)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn run(cli: Cli) -> SimResult<ExitCode> {
    let mut spec = load_spec(&cli.common)?;
    match cli.command {
        Command::Sweep => {
            if let Some(tags) = &cli.common.strategy {
                spec.strategies = tags.iter().map(|t| t.parse()).collect::<SimResult<_>>()?;
            }
            let report = run_sweep(&spec)?;
            let mut w = output(spec.out.as_deref())?;
            report.write_csv(&mut w)?;
            w.flush()?;
            match &spec.out {
                Some(path) => std::fs::write(
                    path.with_extension("summary.json"),
                    report.summary_json() + "\n",
                )?,
                None => eprintln!("{}", report.summary_json()),
            }
        }
        Command::Dof => {
            if let Some(tags) = &cli.common.strategy {
                spec.strategies = tags.iter().map(|t| t.parse()).collect::<SimResult<_>>()?;
            }
            if cli.common.snr.is_none() {
                spec.snr_db = default_window_grid();
            }
            let report = run_sweep(&spec)?;
            #[derive(Serialize)]
            struct Dof<'a> {
                strategy: &'a str,
                dof: Option<f64>,
            }
            let dofs: Vec<Dof> = report
                .summary
                .strategies
                .iter()
                .map(|s| Dof {
                    strategy: &s.strategy,
                    dof: s.dof,
                })
                .collect();
            write_json(spec.out.as_deref(), &dofs)?;
        }
        Command::Converge => {
            if let Some(tags) = &cli.common.strategy {
                spec.convergence = tags.iter().map(|t| t.parse()).collect::<SimResult<_>>()?;
            }
            let mut reports = Vec::new();
            for &algorithm in &spec.convergence {
                // the alternation ignores the SNR, one run suffices
                let grid = if algorithm.depends_on_snr() {
                    spec.snr_db.clone()
                } else {
                    spec.snr_db[..1].to_vec()
                };
                for snr_db in grid {
                    reports.push(convergence_report(&spec, algorithm, snr_db)?);
                }
            }
            write_json(spec.out.as_deref(), &reports)?;
        }
        Command::Feasibility { users } => {
            let dims = if users.is_empty() {
                let net = &spec.network;
                let mut all = vec![net.active; net.active_users];
                all.extend(vec![net.secondary; net.secondary_users]);
                all
            } else {
                let mut all = Vec::new();
                for u in &users {
                    all.extend(parse_users(u)?);
                }
                all
            };
            let (_, text) = feasibility_report(&dims)?;
            let mut w = output(spec.out.as_deref())?;
            w.write_all(text.as_bytes())?;
            w.flush()?;
        }
        Command::Check => {
            let trials = cli.common.trials.unwrap_or(20);
            let outcomes = run_checks(spec.network.seed, trials)?;
            let mut w = output(spec.out.as_deref())?;
            for o in &outcomes {
                writeln!(w, "{}", serde_json::to_string(o).map_err(io::Error::from)?)?;
            }
            w.flush()?;
            if outcomes.iter().any(|o| !o.passed) {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            match e {
                SimError::Config(_) | SimError::Refused(_) | SimError::Core(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
