//! Experiment configuration, runners, metrics, and CSV/SVG emission.

mod config;
mod gradcheck;
mod metrics;
mod plot;
mod runner;

pub use config::ExperimentConfig;
pub use gradcheck::{gradcheck_suite, GradCheckSummary, GRADCHECK_EPSILON};
pub use metrics::{
    train_report_csv, MetricsReport, SnrDetail, SnrRow, SnrStudyReport, TrajectoryTrace,
    METRICS_CSV_HEADER,
};
pub use plot::render_plot;
pub use runner::{
    evaluate_at_snr, process_noise, run_mse_sweep, run_train_snr_study, run_trajectory,
    train_pipeline, STREAM_INIT, STREAM_PROCESS_NOISE, STREAM_SNR_STUDY_BASE, STREAM_SWEEP_BASE,
    STREAM_TRAJECTORY,
};

use std::path::Path;

use crate::error::Result;

/// Write a string artifact, creating parent directories as needed.
pub fn write_artifact(path: impl AsRef<Path>, content: &str) -> Result<()> {
    let path = path.as_ref();
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, content)?;
    Ok(())
}
