//! Metrics containers and their CSV forms.

use std::fmt::Write as _;

use crate::error::{Error, Result};

pub const METRICS_CSV_HEADER: &str = "snr_db,mse_proposed,mse_conventional,mse_conventional_phase_aligned,energy_proposed,energy_conventional,energy_perfect_csi";

/// One SNR point of the sweep; the CSV schema in declaration order.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrRow {
    pub snr_db: f64,
    pub mse_proposed: f64,
    pub mse_conventional: f64,
    pub mse_conventional_phase_aligned: f64,
    pub energy_proposed: f64,
    pub energy_conventional: f64,
    pub energy_perfect_csi: f64,
}

/// Side statistics per SNR point (not part of the CSV schema).
#[derive(Debug, Clone, Default)]
pub struct SnrDetail {
    /// Standard errors of the per-sequence means.
    pub mse_proposed_se: f64,
    pub mse_conventional_se: f64,
    pub energy_proposed_se: f64,
    pub energy_conventional_se: f64,
    pub energy_perfect_se: f64,
    pub sequences: usize,
    pub scored_steps: usize,
    pub kalman_clamps: u64,
    /// Set when a tracker produced a non-finite estimate at this SNR; the
    /// row then carries NaNs and the sweep continues.
    pub failed: bool,
}

#[derive(Debug, Clone, Default)]
pub struct MetricsReport {
    pub rows: Vec<SnrRow>,
    pub details: Vec<SnrDetail>,
}

impl MetricsReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{METRICS_CSV_HEADER}");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.snr_db,
                r.mse_proposed,
                r.mse_conventional,
                r.mse_conventional_phase_aligned,
                r.energy_proposed,
                r.energy_conventional,
                r.energy_perfect_csi
            );
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Vec<SnrRow>> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::invalid("empty metrics CSV"))?;
        if header != METRICS_CSV_HEADER {
            return Err(Error::invalid(format!("unexpected header: {header}")));
        }
        let mut rows = Vec::new();
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<f64> = line
                .split(',')
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| Error::invalid(format!("bad CSV field {f}")))
                })
                .collect::<Result<_>>()?;
            if fields.len() != 7 {
                return Err(Error::dims(format!("expected 7 fields, got {}", fields.len())));
            }
            rows.push(SnrRow {
                snr_db: fields[0],
                mse_proposed: fields[1],
                mse_conventional: fields[2],
                mse_conventional_phase_aligned: fields[3],
                energy_proposed: fields[4],
                energy_conventional: fields[5],
                energy_perfect_csi: fields[6],
            });
        }
        Ok(rows)
    }
}

/// Per-step traces of the true channel and both estimates over one sequence
/// (warm-up steps excluded). Components per antenna: real, imaginary,
/// magnitude.
#[derive(Debug, Clone)]
pub struct TrajectoryTrace {
    pub m: usize,
    /// Absolute step index of each row within the generated sequence.
    pub steps: Vec<usize>,
    /// Row-major per step: for each antenna, (re, im, mag) of the true
    /// channel, then of the proposed estimate, then of the conventional.
    pub rows: Vec<Vec<f64>>,
}

impl TrajectoryTrace {
    pub fn header(&self) -> String {
        let mut cols = vec!["n".to_string()];
        for source in ["true", "proposed", "conventional"] {
            for antenna in 0..self.m {
                for comp in ["re", "im", "mag"] {
                    cols.push(format!("{source}_h{antenna}_{comp}"));
                }
            }
        }
        cols.join(",")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.header());
        for (step, row) in self.steps.iter().zip(&self.rows) {
            let mut fields = vec![step.to_string()];
            fields.extend(row.iter().map(|v| format!("{v}")));
            let _ = writeln!(out, "{}", fields.join(","));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// MSE(test SNR | train SNR) matrix from the train-SNR study.
#[derive(Debug, Clone)]
pub struct SnrStudyReport {
    pub train_snrs_db: Vec<f64>,
    pub test_snrs_db: Vec<f64>,
    /// `mse[i][j]` = MSE at test SNR i for the tracker trained at SNR j.
    pub mse: Vec<Vec<f64>>,
}

impl SnrStudyReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let mut cols = vec!["test_snr_db".to_string()];
        for s in &self.train_snrs_db {
            cols.push(format!("mse_train_{s}db"));
        }
        let _ = writeln!(out, "{}", cols.join(","));
        for (i, test_snr) in self.test_snrs_db.iter().enumerate() {
            let mut fields = vec![format!("{test_snr}")];
            fields.extend(self.mse[i].iter().map(|v| format!("{v}")));
            let _ = writeln!(out, "{}", fields.join(","));
        }
        out
    }
}

/// Per-epoch training losses for each phase, CSV form.
pub fn train_report_csv(reports: &[crate::tracker::TrainReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "phase,epoch,loss");
    for report in reports {
        for (epoch, loss) in report.epoch_losses.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", report.mode.name(), epoch, loss);
        }
    }
    out
}
