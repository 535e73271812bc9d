//! Experiment drivers: the training pipeline, paired per-SNR evaluation of
//! both trackers, trajectory traces, and the train/test SNR study.
//!
//! Evaluation protocol (identical for both trackers, applied per test
//! sequence): the first T steps are known history — the NN window is seeded
//! with the true channels and feedbacks of those steps, and the Kalman
//! filter consumes their measurements with its phase reference anchored to
//! the last of them. Scoring starts at step T; the warm-up steps never enter
//! any metric. Energy is counterfactual: tracking always runs on the ±1
//! probe feedback, and the beamformer built from each ĥ(n) is evaluated
//! against h(n) without altering the feedback stream.
//!
//! Stream layout (all derived from the master seed): 1 = tracker init,
//! 5 = process-noise Monte Carlo, 100+i = sweep test data per SNR-grid
//! index, 300 = trajectory sequence, 400+i = SNR-study test data.

use num_complex::Complex64;

use crate::channel::{generate_sequence, ChannelSequence};
use crate::error::{Error, Result};
use crate::kalman::{
    estimate_process_noise_cov, extract_channel, kalman_predict, kalman_update, KalmanState,
};
use crate::numerics::{CVec, Mat, Rng};
use crate::tracker::{build_tracker, train, LstmFnnTracker, TrainMode, TrainReport};

use super::config::ExperimentConfig;
use super::metrics::{MetricsReport, SnrDetail, SnrRow, SnrStudyReport, TrajectoryTrace};

pub const STREAM_INIT: u64 = 1;
pub const STREAM_PROCESS_NOISE: u64 = 5;
pub const STREAM_SWEEP_BASE: u64 = 100;
pub const STREAM_TRAJECTORY: u64 = 300;
pub const STREAM_SNR_STUDY_BASE: u64 = 400;

/// Build and train a tracker per the config: teacher-forced training at
/// `snr_db`, then optional closed-loop fine-tuning.
pub fn train_pipeline(
    cfg: &ExperimentConfig,
    snr_db: f64,
) -> Result<(LstmFnnTracker, Vec<TrainReport>)> {
    let dynamics = cfg.channel_dynamics()?;
    let arch = cfg.tracker_arch()?;
    let mut tracker = build_tracker(&arch, &mut Rng::with_stream(cfg.seed, STREAM_INIT))?;
    let mut reports = Vec::new();

    let teacher_cfg = cfg.train_config(TrainMode::TeacherForced, snr_db)?;
    reports.push(train(&mut tracker, &teacher_cfg, &dynamics, cfg.zeta)?);

    if cfg.finetune_epochs > 0 {
        let finetune_cfg = cfg.train_config(TrainMode::ClosedLoop, snr_db)?;
        reports.push(train(&mut tracker, &finetune_cfg, &dynamics, cfg.zeta)?);
    }
    Ok((tracker, reports))
}

/// Process-noise covariance for the Kalman baseline, estimated once per
/// run from the master seed.
pub fn process_noise(cfg: &ExperimentConfig) -> Result<Mat> {
    estimate_process_noise_cov(
        cfg.m,
        cfg.gamma,
        cfg.process_noise_mc_samples,
        &mut Rng::with_stream(cfg.seed, STREAM_PROCESS_NOISE),
    )
}

fn beamformer(h_hat: &CVec, literal: bool) -> Option<CVec> {
    let norm = h_hat.norm();
    if norm == 0.0 {
        return None;
    }
    let scale = Complex64::new(1.0 / norm, 0.0);
    Some(if literal {
        h_hat.scaled(scale)
    } else {
        h_hat.conj().scaled(scale)
    })
}

fn beamformed_energy(h_hat: &CVec, h: &CVec, zeta: f64, literal: bool) -> f64 {
    match beamformer(h_hat, literal) {
        Some(x) => zeta * x.tdot(h).expect("lengths match").norm_sqr(),
        None => 0.0,
    }
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

struct SequenceScores {
    mse_proposed: f64,
    mse_conventional: f64,
    mse_aligned: f64,
    energy_proposed: f64,
    energy_conventional: f64,
    energy_perfect: f64,
    kalman_clamps: u64,
}

/// Run both trackers over one sequence under the shared protocol. Returns
/// None if either produced a non-finite estimate.
fn score_sequence(
    tracker: &mut LstmFnnTracker,
    q_cov: &Mat,
    seq: &ChannelSequence,
    gamma: f64,
    literal_beamformer: bool,
) -> Result<Option<SequenceScores>> {
    let t = tracker.arch().t_window;
    let m = tracker.arch().m;
    let zeta = seq.zeta;

    tracker.reset_window();
    tracker.seed_window(&seq.channels[..t], &seq.feedbacks[..t])?;

    let mut kalman = KalmanState::new(m, gamma, zeta, q_cov.clone())?;
    for n in 0..t {
        kalman_predict(&mut kalman);
        kalman_update(&mut kalman, &seq.probes[n], seq.feedbacks[n], seq.noise_var)?;
    }
    kalman.prev_estimate = seq.channels[t - 1].clone();

    let scored = seq.len() - t;
    let mut sse_p = 0.0;
    let mut sse_k = 0.0;
    let mut e_p = 0.0;
    let mut e_k = 0.0;
    let mut e_perfect = 0.0;
    // Phase-aligned MSE of the conventional scheme: one global rotation per
    // sequence, Σ‖e^{iφ}ĥ−h‖² minimized in closed form by the overlap sum.
    let mut aligned_sq = 0.0;
    let mut overlap = Complex64::new(0.0, 0.0);

    for n in t..seq.len() {
        let h = &seq.channels[n];
        let h_p = tracker.track_step(seq.feedbacks[n])?;

        kalman_predict(&mut kalman);
        kalman_update(&mut kalman, &seq.probes[n], seq.feedbacks[n], seq.noise_var)?;
        let h_k = extract_channel(&mut kalman);

        if !h_p.iter().all(|z| z.re.is_finite() && z.im.is_finite())
            || !h_k.iter().all(|z| z.re.is_finite() && z.im.is_finite())
        {
            return Ok(None);
        }

        sse_p += h_p.sub(h)?.norm_sqr();
        sse_k += h_k.sub(h)?.norm_sqr();
        aligned_sq += h_k.norm_sqr() + h.norm_sqr();
        overlap += h_k.hdot(h)?;
        e_p += beamformed_energy(&h_p, h, zeta, literal_beamformer);
        e_k += beamformed_energy(&h_k, h, zeta, literal_beamformer);
        e_perfect += zeta * h.norm_sqr();
    }

    let n = scored as f64;
    Ok(Some(SequenceScores {
        mse_proposed: sse_p / n,
        mse_conventional: sse_k / n,
        mse_aligned: (aligned_sq - 2.0 * overlap.norm()) / n,
        energy_proposed: e_p / n,
        energy_conventional: e_k / n,
        energy_perfect: e_perfect / n,
        kalman_clamps: kalman.clamp_count,
    }))
}

/// Paired evaluation of both trackers at one SNR over the configured test
/// corpus. Both consume byte-identical sequences.
pub fn evaluate_at_snr(
    cfg: &ExperimentConfig,
    tracker: &LstmFnnTracker,
    q_cov: &Mat,
    snr_db: f64,
    stream: u64,
) -> Result<(SnrRow, SnrDetail)> {
    let dynamics = cfg.channel_dynamics()?;
    let n_seq = cfg.test_sequence_count();
    let mut rng = Rng::with_stream(cfg.seed, stream);
    let mut work = tracker.clone();

    let mut per_seq: Vec<SequenceScores> = Vec::with_capacity(n_seq);
    let mut failed = false;
    let mut clamps = 0;
    for _ in 0..n_seq {
        let seq = generate_sequence(cfg.test_seq_len, cfg.m, &dynamics, cfg.zeta, snr_db, &mut rng)?;
        match score_sequence(&mut work, q_cov, &seq, cfg.gamma, cfg.literal_beamformer)? {
            Some(scores) => {
                clamps += scores.kalman_clamps;
                per_seq.push(scores);
            }
            None => {
                failed = true;
                break;
            }
        }
    }

    if failed || per_seq.is_empty() {
        return Ok((
            SnrRow {
                snr_db,
                mse_proposed: f64::NAN,
                mse_conventional: f64::NAN,
                mse_conventional_phase_aligned: f64::NAN,
                energy_proposed: f64::NAN,
                energy_conventional: f64::NAN,
                energy_perfect_csi: f64::NAN,
            },
            SnrDetail {
                failed: true,
                ..SnrDetail::default()
            },
        ));
    }

    let collect = |f: fn(&SequenceScores) -> f64| -> Vec<f64> { per_seq.iter().map(f).collect() };
    let (mse_p, mse_p_se) = mean_and_se(&collect(|s| s.mse_proposed));
    let (mse_k, mse_k_se) = mean_and_se(&collect(|s| s.mse_conventional));
    let (mse_a, _) = mean_and_se(&collect(|s| s.mse_aligned));
    let (e_p, e_p_se) = mean_and_se(&collect(|s| s.energy_proposed));
    let (e_k, e_k_se) = mean_and_se(&collect(|s| s.energy_conventional));
    let (e_perf, e_perf_se) = mean_and_se(&collect(|s| s.energy_perfect));

    Ok((
        SnrRow {
            snr_db,
            mse_proposed: mse_p,
            mse_conventional: mse_k,
            mse_conventional_phase_aligned: mse_a,
            energy_proposed: e_p,
            energy_conventional: e_k,
            energy_perfect_csi: e_perf,
        },
        SnrDetail {
            mse_proposed_se: mse_p_se,
            mse_conventional_se: mse_k_se,
            energy_proposed_se: e_p_se,
            energy_conventional_se: e_k_se,
            energy_perfect_se: e_perf_se,
            sequences: per_seq.len(),
            scored_steps: per_seq.len() * (cfg.test_seq_len - cfg.t_window),
            kalman_clamps: clamps,
            failed: false,
        },
    ))
}

/// Sweep every SNR in the grid with a shared trained tracker.
pub fn run_mse_sweep(cfg: &ExperimentConfig, tracker: &LstmFnnTracker) -> Result<MetricsReport> {
    if tracker.arch().m != cfg.m {
        return Err(Error::Config(format!(
            "tracker has {} antennas, config expects {}",
            tracker.arch().m,
            cfg.m
        )));
    }
    let q_cov = process_noise(cfg)?;
    let mut report = MetricsReport::default();
    for (i, &snr_db) in cfg.snr_grid_db.iter().enumerate() {
        let (row, detail) =
            evaluate_at_snr(cfg, tracker, &q_cov, snr_db, STREAM_SWEEP_BASE + i as u64)?;
        report.rows.push(row);
        report.details.push(detail);
    }
    Ok(report)
}

/// One seeded sequence at the training SNR; emits per-step true channel and
/// both estimates (real/imag/magnitude per antenna), warm-up excluded.
pub fn run_trajectory(
    cfg: &ExperimentConfig,
    tracker: &LstmFnnTracker,
    n_steps: usize,
) -> Result<TrajectoryTrace> {
    if n_steps <= cfg.t_window {
        return Err(Error::invalid("n_steps must exceed the warm-up length"));
    }
    let dynamics = cfg.channel_dynamics()?;
    let mut rng = Rng::with_stream(cfg.seed, STREAM_TRAJECTORY);
    let seq = generate_sequence(n_steps, cfg.m, &dynamics, cfg.zeta, cfg.train_snr_db, &mut rng)?;
    let q_cov = process_noise(cfg)?;

    let t = cfg.t_window;
    let mut work = tracker.clone();
    work.reset_window();
    work.seed_window(&seq.channels[..t], &seq.feedbacks[..t])?;
    let mut kalman = KalmanState::new(cfg.m, cfg.gamma, cfg.zeta, q_cov)?;
    for n in 0..t {
        kalman_predict(&mut kalman);
        kalman_update(&mut kalman, &seq.probes[n], seq.feedbacks[n], seq.noise_var)?;
    }
    kalman.prev_estimate = seq.channels[t - 1].clone();

    let mut trace = TrajectoryTrace {
        m: cfg.m,
        steps: Vec::with_capacity(n_steps - t),
        rows: Vec::with_capacity(n_steps - t),
    };
    for n in t..seq.len() {
        let h_p = work.track_step(seq.feedbacks[n])?;
        kalman_predict(&mut kalman);
        kalman_update(&mut kalman, &seq.probes[n], seq.feedbacks[n], seq.noise_var)?;
        let h_k = extract_channel(&mut kalman);

        let mut row = Vec::with_capacity(9 * cfg.m);
        for source in [&seq.channels[n], &h_p, &h_k] {
            for z in source.iter() {
                row.push(z.re);
                row.push(z.im);
                row.push(z.norm());
            }
        }
        trace.steps.push(n);
        trace.rows.push(row);
    }
    Ok(trace)
}

/// Train trackers at 10/20/30 dB and evaluate each on shared test sequences
/// at every test SNR in the same set.
pub fn run_train_snr_study(cfg: &ExperimentConfig) -> Result<SnrStudyReport> {
    let snrs = [10.0, 20.0, 30.0];
    let dynamics = cfg.channel_dynamics()?;

    let mut trackers = Vec::with_capacity(snrs.len());
    for &train_snr in &snrs {
        let (tracker, _) = train_pipeline(cfg, train_snr)?;
        trackers.push(tracker);
    }

    let n_seq = cfg.test_sequence_count();
    let t = cfg.t_window;
    let mut mse = vec![vec![0.0f64; snrs.len()]; snrs.len()];
    for (i, &test_snr) in snrs.iter().enumerate() {
        let mut rng = Rng::with_stream(cfg.seed, STREAM_SNR_STUDY_BASE + i as u64);
        let mut sse = vec![0.0f64; snrs.len()];
        let mut count = 0usize;
        for _ in 0..n_seq {
            let seq =
                generate_sequence(cfg.test_seq_len, cfg.m, &dynamics, cfg.zeta, test_snr, &mut rng)?;
            for (j, tracker) in trackers.iter().enumerate() {
                let mut work = tracker.clone();
                work.reset_window();
                work.seed_window(&seq.channels[..t], &seq.feedbacks[..t])?;
                for n in t..seq.len() {
                    let h_hat = work.track_step(seq.feedbacks[n])?;
                    sse[j] += h_hat.sub(&seq.channels[n])?.norm_sqr();
                }
            }
            count += seq.len() - t;
        }
        for j in 0..snrs.len() {
            mse[i][j] = sse[j] / count as f64;
        }
    }

    Ok(SnrStudyReport {
        train_snrs_db: snrs.to_vec(),
        test_snrs_db: snrs.to_vec(),
        mse,
    })
}
