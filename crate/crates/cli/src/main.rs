use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use gbcd_core::detector::{matched_filter, DenoiserSchedule, EqualizerTrace};
use gbcd_core::experiment::{
    code_config, draw_trial, run_ablation, run_sweep, write_ablation_csv, write_sweep_csv, ExperimentConfig,
    TrainingConfig,
};
use gbcd_core::hwmodel::{hwmodel_rows, write_hwmodel_csv, HwModelConfig};
use gbcd_core::mimo::dump::write_matrix;
use gbcd_core::unfolding::{train, ParamStore};
use gbcd_core::{Constellation, Error, GbcdConfig, NoTally, Preprocessed};

/// Soft-output massive-MIMO detection experiments.
///
/// Receive SNR is Es·‖H‖_F² / (B·N0): total received signal power per base
/// station antenna over the noise variance. With unit-variance channel
/// entries this equals U·Es/N0.
///
/// Exit codes: 0 success, 2 configuration error, 3 missing trained
/// parameters, 1 anything else.
#[derive(Debug, Parser)]
#[command(name = "gbcd", version, about, long_about)]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Coded BLER and SER sweep over SNR.
    Simulate(SimArgs),
    /// BLER and SER of the incremental variants, paired per realization.
    Ablate(SimArgs),
    /// Deep-unfolding training; writes a parameter store.
    Train(TrainArgs),
    /// Complexity, throughput and power tables.
    Hwmodel(HwArgs),
}

#[derive(Debug, Args)]
struct SimArgs {
    #[arg(long)]
    config: PathBuf,
    /// CSV destination; overrides the config's `output`. Default: stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Run GBCD variants on the fixed-point datapath.
    #[arg(long)]
    fixed_point: bool,
    /// Write the per-block equalizer trace of the first subcarrier of
    /// trial 0 at the first SNR point.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the channel of that same realization.
    #[arg(long)]
    dump_channel: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    config: PathBuf,
    /// Parameter store; existing records with other keys are kept.
    /// Default: stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct HwArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 128)]
    antennas: usize,
    #[arg(long, default_value_t = 16)]
    users: usize,
    #[arg(long, default_value_t = 3)]
    iterations: usize,
    #[arg(long, default_value_t = 256)]
    order: usize,
    /// Comma-separated transmission counts per coherence block.
    #[arg(long, value_delimiter = ',')]
    t: Option<Vec<u64>>,
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn experiment(args: &SimArgs) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.fixed_point |= args.fixed_point;
    if args.out.is_some() {
        cfg.output.clone_from(&args.out);
    }
    Ok(cfg)
}

fn diagnostics(cfg: &ExperimentConfig, args: &SimArgs) -> Result<()> {
    if args.trace.is_none() && args.dump_channel.is_none() {
        return Ok(());
    }
    let snr = cfg.snr_db[0];
    let trial = draw_trial(cfg, &code_config(cfg)?, snr, 0)?;
    let (h, batch) = &trial.groups[0];
    if let Some(path) = &args.dump_channel {
        write_matrix(&mut sink(Some(path))?, h)?;
    }
    if let Some(path) = &args.trace {
        let c = Constellation::new(cfg.order)?;
        let gc = GbcdConfig {
            block_size: cfg.block_size,
            sort: true,
            iterations: cfg.iterations,
        };
        let pre = Preprocessed::new(h, batch.n0, c.energy(), &gc)?;
        let y_mf = matched_filter(h, &batch.y.column(0).into_owned(), &mut NoTally);
        let (_, trace) = EqualizerTrace::record(&pre, &y_mf, &DenoiserSchedule::boxed(&c), cfg.iterations)?;
        let mut w = sink(Some(path))?;
        trace.write_csv(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn simulate(args: &SimArgs) -> Result<()> {
    let cfg = experiment(args)?;
    diagnostics(&cfg, args)?;
    let rows = run_sweep(&cfg)?;
    let mut w = sink(cfg.output.as_deref())?;
    write_sweep_csv(&mut w, &rows)?;
    w.flush()?;
    Ok(())
}

fn ablate(args: &SimArgs) -> Result<()> {
    let cfg = experiment(args)?;
    diagnostics(&cfg, args)?;
    let (rows, _) = run_ablation(&cfg)?;
    let mut w = sink(cfg.output.as_deref())?;
    write_ablation_csv(&mut w, &rows)?;
    w.flush()?;
    Ok(())
}

fn run_train(args: &TrainArgs) -> Result<()> {
    let mut cfg = TrainingConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let mut store = match &args.out {
        Some(p) if p.exists() => ParamStore::load(p)?,
        _ => ParamStore::default(),
    };
    let tc = cfg.train_config();
    for &snr in &cfg.snr_db {
        let report = train(&cfg.dataset(snr), &tc)?;
        log::info!(
            "{snr} dB: validation loss {:.5} -> {:.5} (best epoch {})",
            report.val_history[0],
            report.params.val_loss,
            report.best_epoch
        );
        store.insert(report.params);
    }
    match &args.out {
        Some(p) => store.save(p)?,
        None => io::stdout().write_all(store.to_text().as_bytes())?,
    }
    Ok(())
}

fn hwmodel(args: &HwArgs) -> Result<()> {
    let mut cfg = HwModelConfig {
        b: args.antennas,
        u: args.users,
        k: args.iterations,
        order: args.order,
        ..HwModelConfig::default()
    };
    if let Some(t) = &args.t {
        cfg.t_values.clone_from(t);
    }
    let mut w = sink(args.out.as_deref())?;
    write_hwmodel_csv(&mut w, &hwmodel_rows(&cfg)?)?;
    w.flush()?;
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Config(_)) => 2,
        Some(Error::MissingParams(_)) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Ablate(a) => ablate(a),
        Command::Train(a) => run_train(a),
        Command::Hwmodel(a) => hwmodel(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
