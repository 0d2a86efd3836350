//! `unfoldrx` command-line front end.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use unfoldrx::epdetect::{DampingTable, REFERENCE_8X8_16QAM};
use unfoldrx::harness::{run_online_training, run_sweep, write_csv, ExperimentConfig, OptimizerKind, TrainingConfig};
use unfoldrx::logdomain::logit;
use unfoldrx::metaopt::{meta_train, LstmOptimizerParams, MetaTrainConfig};
use unfoldrx::Error;

#[derive(Debug, Parser)]
#[command(name = "unfoldrx", version, about = "Unfolded MIMO turbo receiver experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Master seed. Overrides the seed of a config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory that receives the output files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads for Monte Carlo simulation.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a BER sweep from a JSON experiment config and write `ber.csv`.
    Sweep {
        /// Experiment config (JSON, schema 1).
        config: PathBuf,
    },
    /// Meta-train the LSTM optimizer on random quadratics and write
    /// `theta.json` and `meta_curve.csv`.
    MetaTrain {
        /// Training epochs, one Θ update each.
        #[arg(long, default_value_t = 100)]
        epochs: usize,
        /// Quadratic tasks per epoch.
        #[arg(long, default_value_t = 20)]
        tasks: usize,
        /// Unrolled optimizer steps per task.
        #[arg(long, default_value_t = 20)]
        steps: usize,
    },
    /// Train per-stage damping schedules and write `damping_table.json` and
    /// `online_curve.csv`.
    OnlineTrain {
        /// Training config (JSON, schema 1).
        config: PathBuf,
        /// Meta-trained optimizer; required unless the config selects Adam.
        #[arg(long)]
        theta: Option<PathBuf>,
    },
    /// Print a damping table, or the built-in reference table when no file
    /// is given.
    ShowTable {
        /// Damping table (JSON, schema 1).
        table: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Schema(_) | Error::EmptyDataset => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write(dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf, Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn sweep(cli: &Cli, config: &Path) -> Result<(), Failure> {
    if !config.exists() {
        return Err(Failure::Usage(format!("config file {} not found", config.display())));
    }
    let mut cfg = ExperimentConfig::load(config)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let records = run_sweep(&cfg, cli.workers)?;
    let mut buf = Vec::new();
    write_csv(&records, &mut buf)?;
    let path = write(&cli.out, "ber.csv", &buf)?;
    for r in &records {
        let (lo, hi) = r.ci95();
        println!(
            "{:<16} {:>7.2} dB  BER {:.4e}  [{:.2e}, {:.2e}]  {} bits",
            r.variant,
            r.snr_db,
            r.ber(),
            lo,
            hi,
            r.bits
        );
    }
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn meta(cli: &Cli, epochs: usize, tasks: usize, steps: usize) -> Result<(), Failure> {
    let cfg = MetaTrainConfig {
        epochs,
        tasks,
        steps,
        ..Default::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed.unwrap_or(0));
    let report = meta_train(&cfg, &mut rng)?;
    let mut curve = String::from("epoch,loss\n");
    for (i, l) in report.curve.iter().enumerate() {
        writeln!(curve, "{},{l}", i + 1).expect("string write");
    }
    let theta = write(&cli.out, "theta.json", report.theta.to_json().as_bytes())?;
    write(&cli.out, "meta_curve.csv", curve.as_bytes())?;
    if let Some(last) = report.curve.last() {
        println!("meta-training loss after {epochs} epochs: {last:.4}");
    }
    eprintln!("wrote {}", theta.display());
    Ok(())
}

fn online(cli: &Cli, config: &Path, theta: Option<&Path>) -> Result<(), Failure> {
    let mut cfg = TrainingConfig::from_json(&read(config)?)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let theta = match (theta, cfg.optimizer) {
        (Some(p), _) => Some(LstmOptimizerParams::from_json(&read(p)?)?),
        (None, OptimizerKind::Lstm) => {
            return Err(Failure::Usage("--theta is required for the lstm optimizer".into()));
        }
        (None, OptimizerKind::Adam) => None,
    };
    let outcome = run_online_training(&cfg, theta.as_ref())?;
    let mut curve = String::from("stage,epoch,loss\n");
    for (s, r) in outcome.reports.iter().enumerate() {
        for (e, l) in r.curve.iter().enumerate() {
            writeln!(curve, "{},{e},{l}", s + 1).expect("string write");
        }
        println!(
            "stage {}: loss {:.5} -> {:.5} in {} epochs",
            s + 1,
            r.curve[0],
            r.curve[r.curve.len() - 1],
            r.epochs_run()
        );
    }
    let path = write(&cli.out, "damping_table.json", outcome.table.to_json().as_bytes())?;
    write(&cli.out, "online_curve.csv", curve.as_bytes())?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn show(table: Option<&Path>) -> Result<(), Failure> {
    match table {
        Some(p) => {
            let t = DampingTable::from_json(&read(p)?)?;
            t.to_schedules()?;
            println!("stage  layer  damping       raw");
            for e in &t.entries {
                println!("{:>5}  {:>5}  {:.5e}  {:>8.4}", e.stage, e.layer, e.damping, logit(e.damping));
            }
        }
        None => {
            println!("reference schedules, 8x8 16-QAM (uncoded Eb/N0)");
            for (db, eff) in REFERENCE_8X8_16QAM {
                let cols: Vec<String> = eff.iter().map(|d| format!("{d:.4e}")).collect();
                println!("{db:>5.1} dB  {}", cols.join("  "));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.workers == 0 {
        eprintln!("error: --workers must be at least 1");
        return ExitCode::from(2);
    }
    let result = match &cli.command {
        Command::Sweep { config } => sweep(&cli, config),
        Command::MetaTrain { epochs, tasks, steps } => meta(&cli, *epochs, *tasks, *steps),
        Command::OnlineTrain { config, theta } => online(&cli, config, theta.as_deref()),
        Command::ShowTable { table } => show(table.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
