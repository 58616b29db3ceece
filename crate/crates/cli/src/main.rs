use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use wakeform_core::harness::{
    load_sequence_spec, metrics_csv, run_ber, run_metrics, run_mux_ber, run_optimize, ExperimentConfig,
    OptimizeConfig, Scenario, SEED_ENV,
};

#[derive(Parser)]
#[command(name = "wakeform", version, about = "OOK wake-up sequences inside an OFDM grid")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sequence optimizer; exits nonzero if it did not converge.
    Optimize {
        #[arg(long)]
        config: PathBuf,
        /// Sequence output (default: config path with a .seq extension).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Trace CSV (default: `<out stem>_trace.csv`).
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Print waveform metrics of a sequence file or `table:N`.
    Metrics {
        #[arg(long)]
        seq: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Standalone wake-up BER sweep.
    Ber {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Multiplexed sweep; the wake-up receiver curve goes to `<out stem>_wur.csv`.
    MuxBer {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    path.with_file_name(format!("{stem}{suffix}"))
}

fn experiment(path: &Path) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::read(path).with_context(|| format!("loading {}", path.display()))?;
    if let Ok(seed) = std::env::var(SEED_ENV) {
        cfg.master_seed = seed
            .trim()
            .parse()
            .with_context(|| format!("{SEED_ENV} must be an unsigned integer"))?;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Optimize { config, out, trace } => {
            let cfg = OptimizeConfig::read(&config).with_context(|| format!("loading {}", config.display()))?;
            let out = out.unwrap_or_else(|| config.with_extension("seq"));
            let trace = trace.unwrap_or_else(|| sibling(&out, "_trace.csv"));
            let outcome = run_optimize(&cfg)?;
            outcome.sequence.write(&out)?;
            outcome.trace.write_csv(&trace)?;
            if let Some(log) = &cfg.solver_debug_csv {
                outcome.write_solver_log(log)?;
            }
            let last = outcome.trace.rows.last();
            eprintln!(
                "{} iterations, cost {:.6e}, converged: {}",
                outcome.trace.rows.len(),
                last.map_or(f64::NAN, |r| r.cost_mod),
                outcome.converged
            );
            Ok(if outcome.converged {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Metrics { seq, out } => {
            let sequence = load_sequence_spec(&seq).with_context(|| format!("loading {seq}"))?;
            let csv = metrics_csv(&run_metrics(&sequence)?);
            match out {
                Some(path) => std::fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{csv}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Ber { config, out } => {
            let cfg = experiment(&config)?;
            if cfg.scenario == Scenario::Mux {
                bail!("scenario = mux belongs to the mux-ber command");
            }
            run_ber(&cfg)?.write_csv(&out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::MuxBer { config, out } => {
            let cfg = experiment(&config)?;
            if cfg.scenario != Scenario::Mux {
                bail!("mux-ber needs scenario = mux");
            }
            let report = run_mux_ber(&cfg)?;
            report.ofdm.write_csv(&out)?;
            if let Some(wur) = &report.wur {
                wur.write_csv(sibling(&out, "_wur.csv"))?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
