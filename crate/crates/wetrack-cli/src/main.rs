//! `wetrack` — channel tracking experiments for wireless energy transfer.
//!
//! Subcommands: `train`, `track`, `sweep`, `trajectory`, `snr-study`,
//! `gradcheck`. All take a TOML config (`--config`) with optional `--seed`
//! and `--out` overrides; every run is bit-reproducible for a fixed
//! (config, seed).
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage/config error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wetrack_core::channel::generate_sequence;
use wetrack_core::harness::{
    gradcheck_suite, render_plot, run_mse_sweep, run_train_snr_study, run_trajectory,
    train_pipeline, train_report_csv, write_artifact, ExperimentConfig,
};
use wetrack_core::numerics::Rng;
use wetrack_core::tracker::{
    load_checkpoint, save_checkpoint_with_meta, LstmFnnTracker, TrainReport,
};
use wetrack_core::Error;

#[derive(Parser)]
#[command(name = "wetrack", version, about = "LSTM+FNN and Kalman channel tracking for wireless energy transfer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config file (TOML key-value).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Train a tracker (teacher-forced + optional closed-loop fine-tune),
    /// write the checkpoint and training-loss CSV.
    Train {
        #[command(flatten)]
        common: Common,
    },
    /// Run a trained tracker over a fresh sequence and emit its estimates.
    Track {
        #[command(flatten)]
        common: Common,
        /// Checkpoint to load.
        #[arg(long)]
        checkpoint: PathBuf,
        /// Sequence length (defaults to the config's trajectory length).
        #[arg(long)]
        steps: Option<usize>,
    },
    /// MSE / harvested-energy sweep over the SNR grid (both trackers).
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Checkpoint to load; trains inline when omitted.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Use the literal beamformer x = h/‖h‖ instead of the conjugate.
        #[arg(long)]
        literal_beamformer: bool,
    },
    /// Per-step traces of the true channel and both estimates.
    Trajectory {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Trace length (defaults to the config's trajectory length).
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Train at 10/20/30 dB and cross-evaluate (MSE matrix).
    SnrStudy {
        #[command(flatten)]
        common: Common,
    },
    /// Verify analytic gradients against central finite differences.
    Gradcheck {
        #[arg(long, default_value_t = 414243)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::InvalidArgument(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

fn load_config(common: &Common) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::from_file(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.output_dir = out.display().to_string();
    }
    Ok(cfg)
}

fn resolve_tracker(
    cfg: &ExperimentConfig,
    checkpoint: Option<&Path>,
) -> Result<(LstmFnnTracker, Vec<TrainReport>), Error> {
    match checkpoint {
        Some(path) => {
            let tracker = load_checkpoint(path)?;
            if tracker.arch().m != cfg.m {
                return Err(Error::Config(format!(
                    "checkpoint {} has {} antennas, config expects {}",
                    path.display(),
                    tracker.arch().m,
                    cfg.m
                )));
            }
            Ok((tracker, Vec::new()))
        }
        None => {
            eprintln!("no checkpoint given; training inline at {} dB", cfg.train_snr_db);
            train_pipeline(cfg, cfg.train_snr_db)
        }
    }
}

fn save_training_outputs(
    cfg: &ExperimentConfig,
    tracker: &LstmFnnTracker,
    reports: &[TrainReport],
) -> Result<(), Error> {
    let out = Path::new(&cfg.output_dir);
    let meta = vec![
        ("train_snr_db".to_string(), format!("{}", cfg.train_snr_db)),
        ("epochs".to_string(), format!("{}", cfg.epochs)),
        ("finetune_epochs".to_string(), format!("{}", cfg.finetune_epochs)),
        ("n_train_samples".to_string(), format!("{}", cfg.n_train_samples)),
        ("minibatch".to_string(), format!("{}", cfg.minibatch)),
        ("alpha".to_string(), format!("{:e}", cfg.alpha)),
        ("optimizer".to_string(), cfg.optimizer.clone()),
        ("seed".to_string(), format!("{}", cfg.seed)),
    ];
    std::fs::create_dir_all(out)?;
    save_checkpoint_with_meta(tracker, out.join("checkpoint.txt"), &meta)?;
    write_artifact(out.join("train_report.csv"), &train_report_csv(reports))?;
    Ok(())
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Train { common } => {
            let cfg = load_config(&common)?;
            let (tracker, reports) = train_pipeline(&cfg, cfg.train_snr_db)?;
            save_training_outputs(&cfg, &tracker, &reports)?;
            for report in &reports {
                println!(
                    "phase {}: {} epochs, final loss {:.6e}",
                    report.mode.name(),
                    report.epoch_losses.len(),
                    report.final_loss
                );
            }
            println!("wrote {}/checkpoint.txt", cfg.output_dir);
        }
        Command::Track {
            common,
            checkpoint,
            steps,
        } => {
            let cfg = load_config(&common)?;
            let (tracker, _) = resolve_tracker(&cfg, Some(&checkpoint))?;
            let n_steps = steps.unwrap_or(cfg.n_trajectory_steps);
            let csv = track_csv(&cfg, &tracker, n_steps)?;
            let path = Path::new(&cfg.output_dir).join("track.csv");
            write_artifact(&path, &csv)?;
            println!("wrote {}", path.display());
        }
        Command::Sweep {
            common,
            checkpoint,
            literal_beamformer,
        } => {
            let mut cfg = load_config(&common)?;
            if literal_beamformer {
                cfg.literal_beamformer = true;
            }
            let (tracker, reports) = resolve_tracker(&cfg, checkpoint.as_deref())?;
            if !reports.is_empty() {
                save_training_outputs(&cfg, &tracker, &reports)?;
            }
            let report = run_mse_sweep(&cfg, &tracker)?;
            let out = Path::new(&cfg.output_dir);
            write_artifact(out.join("sweep.csv"), &report.to_csv())?;
            write_artifact(out.join("sweep.svg"), &render_plot(&report))?;
            for row in &report.rows {
                println!(
                    "snr {:>5} dB: mse proposed {:.4e}, conventional {:.4e}, energy {:.4} / {:.4} / {:.4}",
                    row.snr_db,
                    row.mse_proposed,
                    row.mse_conventional,
                    row.energy_proposed,
                    row.energy_conventional,
                    row.energy_perfect_csi
                );
            }
            println!("wrote {}/sweep.csv and sweep.svg", cfg.output_dir);
        }
        Command::Trajectory {
            common,
            checkpoint,
            steps,
        } => {
            let cfg = load_config(&common)?;
            let (tracker, reports) = resolve_tracker(&cfg, checkpoint.as_deref())?;
            if !reports.is_empty() {
                save_training_outputs(&cfg, &tracker, &reports)?;
            }
            let n_steps = steps.unwrap_or(cfg.n_trajectory_steps);
            let trace = run_trajectory(&cfg, &tracker, n_steps)?;
            let path = Path::new(&cfg.output_dir).join("trajectory.csv");
            write_artifact(&path, &trace.to_csv())?;
            println!("wrote {} ({} rows)", path.display(), trace.len());
        }
        Command::SnrStudy { common } => {
            let cfg = load_config(&common)?;
            let report = run_train_snr_study(&cfg)?;
            let path = Path::new(&cfg.output_dir).join("snr_study.csv");
            write_artifact(&path, &report.to_csv())?;
            for (i, test_snr) in report.test_snrs_db.iter().enumerate() {
                let cells: Vec<String> = report.mse[i].iter().map(|v| format!("{v:.4e}")).collect();
                println!("test {test_snr} dB: {}", cells.join("  "));
            }
            println!("wrote {}", path.display());
        }
        Command::Gradcheck { seed } => {
            let summary = gradcheck_suite(seed)?;
            println!("lstm cell suite max rel err: {:.3e}", summary.lstm_cell_max);
            println!("dense layer suite max rel err: {:.3e}", summary.dense_max);
            println!("full tracker suite max rel err: {:.3e}", summary.tracker_max);
            println!("overall max rel err: {:.3e}", summary.overall_max());
            if summary.overall_max() > 1e-4 {
                return Err(Error::State(format!(
                    "gradient check failed: {:.3e} > 1e-4",
                    summary.overall_max()
                )));
            }
        }
    }
    Ok(())
}

/// Closed-loop run of the proposed tracker over one fresh sequence:
/// per-step feedback, estimate, true channel, and squared error.
fn track_csv(
    cfg: &ExperimentConfig,
    tracker: &LstmFnnTracker,
    n_steps: usize,
) -> Result<String, Error> {
    use std::fmt::Write as _;
    if n_steps <= cfg.t_window {
        return Err(Error::invalid("steps must exceed the warm-up length"));
    }
    let dynamics = cfg.channel_dynamics()?;
    // Own stream so `track` and `trajectory` outputs stay independent.
    let mut rng = Rng::with_stream(cfg.seed, 301);
    let seq = generate_sequence(n_steps, cfg.m, &dynamics, cfg.zeta, cfg.train_snr_db, &mut rng)?;

    let t = cfg.t_window;
    let mut work = tracker.clone();
    work.reset_window();
    work.seed_window(&seq.channels[..t], &seq.feedbacks[..t])?;

    let mut out = String::new();
    let mut cols = vec!["n".to_string(), "r".to_string()];
    for i in 0..cfg.m {
        cols.push(format!("hat_h{i}_re"));
        cols.push(format!("hat_h{i}_im"));
    }
    for i in 0..cfg.m {
        cols.push(format!("true_h{i}_re"));
        cols.push(format!("true_h{i}_im"));
    }
    cols.push("sq_err".to_string());
    let _ = writeln!(out, "{}", cols.join(","));

    let mut sse = 0.0;
    for n in t..seq.len() {
        let h_hat = work.track_step(seq.feedbacks[n])?;
        let err = h_hat.sub(&seq.channels[n])?.norm_sqr();
        sse += err;
        let mut fields = vec![n.to_string(), format!("{}", seq.feedbacks[n])];
        for z in h_hat.iter() {
            fields.push(format!("{}", z.re));
            fields.push(format!("{}", z.im));
        }
        for z in seq.channels[n].iter() {
            fields.push(format!("{}", z.re));
            fields.push(format!("{}", z.im));
        }
        fields.push(format!("{err}"));
        let _ = writeln!(out, "{}", fields.join(","));
    }
    println!(
        "tracked {} steps, running mse {:.6e}",
        seq.len() - t,
        sse / (seq.len() - t) as f64
    );
    Ok(out)
}
