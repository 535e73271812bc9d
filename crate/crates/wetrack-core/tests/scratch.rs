// Scratch experiment: fine-tune schedule search from a saved teacher net,
// with the Kalman baseline as the comparison target.
use wetrack_core::channel::{generate_sequence, ChannelDynamics};
use wetrack_core::harness::{evaluate_at_snr, process_noise, ExperimentConfig};
use wetrack_core::numerics::Rng;
use wetrack_core::tracker::{
    load_checkpoint, train, LstmFnnTracker, OptimizerKind, TrainConfig, TrainMode,
};

fn desk_cfg() -> ExperimentConfig {
    ExperimentConfig {
        n_test_samples: 50_000,
        test_seq_len: 102,
        process_noise_mc_samples: 200_000,
        teacher_noise_var: 5e-4,
        ..ExperimentConfig::default()
    }
}

fn eval_both(tracker: &LstmFnnTracker, label: &str) {
    let cfg = desk_cfg();
    let q = process_noise(&cfg).unwrap();
    let (row, detail) = evaluate_at_snr(&cfg, tracker, &q, 30.0, 100).unwrap();
    println!(
        "{label}: mse_p {:.4} (se {:.4}) | mse_k {:.4} | aligned_k {:.4} | e_p {:.4} e_k {:.4} e_perf {:.4}",
        row.mse_proposed,
        detail.mse_proposed_se,
        row.mse_conventional,
        row.mse_conventional_phase_aligned,
        row.energy_proposed,
        row.energy_conventional,
        row.energy_perfect_csi
    );
}

fn closed_loop_mse(tracker: &LstmFnnTracker, snr_db: f64, n_seq: usize, len: usize) -> f64 {
    let dynamics = ChannelDynamics::linear(0.998).unwrap();
    let mut rng = Rng::with_stream(777, 9);
    let t = tracker.arch().t_window;
    let mut sse = 0.0;
    let mut count = 0usize;
    let mut work = tracker.clone();
    for _ in 0..n_seq {
        let seq = generate_sequence(len, 2, &dynamics, 1.0, snr_db, &mut rng).unwrap();
        work.reset_window();
        work.seed_window(&seq.channels[..t], &seq.feedbacks[..t]).unwrap();
        for n in t..seq.len() {
            let h_hat = work.track_step(seq.feedbacks[n]).unwrap();
            sse += h_hat.sub(&seq.channels[n]).unwrap().norm_sqr();
            count += 1;
        }
    }
    sse / count as f64
}

#[test]
fn finetune_schedule_search() {
    let base = load_checkpoint("/tmp/teacher5/checkpoint.txt").unwrap();
    eval_both(&base, "teacher-only");
    let dynamics = ChannelDynamics::linear(0.998).unwrap();

    for (label, alpha, stages) in [
        ("A len12x3,25x3,50x2,100x2 a1e-3", 1e-3, vec![(12usize, 3usize), (25, 3), (50, 2), (100, 2)]),
        ("B len8x2,12x2,25x2,50x2,100x2 a3e-3", 3e-3, vec![(8, 2), (12, 2), (25, 2), (50, 2), (100, 2)]),
        ("C len12x10 a1e-3", 1e-3, vec![(12, 10)]),
    ] {
        let mut tracker = base.clone();
        for (stage, (seq_len, epochs)) in stages.iter().enumerate() {
            let cfg = TrainConfig {
                n_samples: 10_000,
                minibatch: 1_000,
                epochs: *epochs,
                alpha,
                optimizer: OptimizerKind::Adam,
                mode: TrainMode::ClosedLoop,
                train_snr_db: 30.0,
                seed: 0x5eed ^ (stage as u64),
                teacher_noise_var: 5e-4,
                seq_len: *seq_len,
            };
            let report = train(&mut tracker, &cfg, &dynamics, 1.0).unwrap();
            println!(
                "  {label} stage {stage} (len {seq_len}): last loss {:.4}",
                report.final_loss
            );
        }
        println!(
            "{label}: len102 -> {:.4}, len1000 -> {:.4}",
            closed_loop_mse(&tracker, 30.0, 100, 102),
            closed_loop_mse(&tracker, 30.0, 20, 1000)
        );
        eval_both(&tracker, label);
    }
    panic!("scratch");
}
