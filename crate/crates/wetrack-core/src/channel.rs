//! Time-varying channel simulator: Gauss-Markov (and optional nonlinear)
//! trajectories, ±1 probe signals, harvested energy, and noisy scalar
//! feedback.
//!
//! Per slot n the receiver harvests Q(n) = ζ|xᵀ(n)h(n)|² and reports
//! r(n) = Q(n) + η(n) with η real Gaussian; negative reports are kept as-is.

use num_complex::Complex64;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::numerics::{
    sample_complex_gaussian, sample_rademacher_vec, sample_real_gaussian, CVec, Rng, PRNG_ID,
};

/// Channel evolution law.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DynamicsKind {
    /// h(n) = γ·h(n−1) + u(n), innovation variance (1−γ²) per entry.
    Linear,
    /// h(n) = γ·h(n−1) + β·tanh(h(n−1)) + u(n), tanh acting elementwise on
    /// real and imaginary parts. A concrete non-Gauss-Markov law for
    /// robustness experiments; not a physical model.
    Nonlinear,
}

#[derive(Debug, Clone, Copy)]
pub struct ChannelDynamics {
    pub kind: DynamicsKind,
    /// Temporal correlation γ ∈ [0, 1].
    pub gamma: f64,
    /// β, the tanh drift coefficient; ignored for linear dynamics.
    pub nonlinear_strength: f64,
    /// Force zero imaginary parts (innovation variance then lands entirely
    /// on the real part so the per-entry power stays 1).
    pub real_channel: bool,
}

impl ChannelDynamics {
    pub fn linear(gamma: f64) -> Result<Self> {
        Self::new(DynamicsKind::Linear, gamma, 0.0, false)
    }

    pub fn nonlinear(gamma: f64, strength: f64) -> Result<Self> {
        Self::new(DynamicsKind::Nonlinear, gamma, strength, false)
    }

    pub fn new(kind: DynamicsKind, gamma: f64, nonlinear_strength: f64, real_channel: bool) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::invalid(format!("gamma must be in [0,1], got {gamma}")));
        }
        if nonlinear_strength < 0.0 || !nonlinear_strength.is_finite() {
            return Err(Error::invalid(format!(
                "nonlinear_strength must be >= 0, got {nonlinear_strength}"
            )));
        }
        Ok(ChannelDynamics {
            kind,
            gamma,
            nonlinear_strength,
            real_channel,
        })
    }
}

/// Metadata stored with a generated sequence (everything needed to
/// regenerate it bit-exactly).
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceMeta {
    pub m: usize,
    pub n_steps: usize,
    pub gamma: f64,
    pub zeta: f64,
    pub noise_var: f64,
    pub seed: u64,
    pub prng: String,
}

/// A realized channel trajectory with the probes, feedback values, and
/// configuration that produced it. Immutable after creation.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSequence {
    pub channels: Vec<CVec>,
    pub probes: Vec<CVec>,
    pub feedbacks: Vec<f64>,
    pub zeta: f64,
    pub noise_var: f64,
    pub meta: SequenceMeta,
}

/// One step of the channel dynamics.
pub fn step_channel(h_prev: &CVec, dyn_: &ChannelDynamics, rng: &mut Rng) -> Result<CVec> {
    let m = h_prev.len();
    let innovation_var = 1.0 - dyn_.gamma * dyn_.gamma;
    let mut next = Vec::with_capacity(m);
    for i in 0..m {
        let h = h_prev.get(i);
        let mut value = h * dyn_.gamma;
        if dyn_.kind == DynamicsKind::Nonlinear {
            value += Complex64::new(h.re.tanh(), h.im.tanh()) * dyn_.nonlinear_strength;
        }
        let u = if dyn_.real_channel {
            Complex64::new(sample_real_gaussian(rng, innovation_var)?, 0.0)
        } else {
            sample_complex_gaussian(rng, innovation_var)?
        };
        next.push(value + u);
    }
    CVec::new(next)
}

/// Harvested energy Q = ζ·|xᵀh|².
pub fn harvested_energy(x: &CVec, h: &CVec, zeta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&zeta) || zeta == 0.0 {
        return Err(Error::invalid(format!("zeta must be in (0,1], got {zeta}")));
    }
    Ok(zeta * x.tdot(h)?.norm_sqr())
}

/// Noisy feedback r = Q + η, η ~ N(0, noise_var). May be negative.
pub fn feedback(x: &CVec, h: &CVec, zeta: f64, noise_var: f64, rng: &mut Rng) -> Result<f64> {
    let q = harvested_energy(x, h, zeta)?;
    Ok(q + sample_real_gaussian(rng, noise_var)?)
}

/// SNR (dB) → feedback noise variance ς² = 10^(−snr/10).
pub fn snr_to_noise_var(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

/// Draw from the stationary distribution: unit-power complex Gaussian per
/// entry (real N(0,1) under `real_channel`).
pub fn stationary_channel(m: usize, real_channel: bool, rng: &mut Rng) -> Result<CVec> {
    CVec::new(
        (0..m)
            .map(|_| {
                if real_channel {
                    Ok(Complex64::new(sample_real_gaussian(rng, 1.0)?, 0.0))
                } else {
                    sample_complex_gaussian(rng, 1.0)
                }
            })
            .collect::<Result<_>>()?,
    )
}

/// Generate a full sequence: h(0) stationary, then `n_steps − 1` dynamics
/// steps; independent Rademacher probe and noisy feedback at every step.
///
/// Draw order per step (fixed for reproducibility): innovations (M),
/// probe (M), feedback noise (1).
pub fn generate_sequence(
    n_steps: usize,
    m: usize,
    dyn_: &ChannelDynamics,
    zeta: f64,
    snr_db: f64,
    rng: &mut Rng,
) -> Result<ChannelSequence> {
    if n_steps == 0 {
        return Err(Error::invalid("n_steps must be >= 1"));
    }
    if m == 0 {
        return Err(Error::invalid("antenna count must be >= 1"));
    }
    let noise_var = snr_to_noise_var(snr_db);
    let seed = rng.seed();

    let mut channels = Vec::with_capacity(n_steps);
    let mut probes = Vec::with_capacity(n_steps);
    let mut feedbacks = Vec::with_capacity(n_steps);

    let mut h = stationary_channel(m, dyn_.real_channel, rng)?;
    for step in 0..n_steps {
        if step > 0 {
            h = step_channel(&h, dyn_, rng)?;
        }
        let x = sample_rademacher_vec(rng, m)?;
        let r = feedback(&x, &h, zeta, noise_var, rng)?;
        channels.push(h.clone());
        probes.push(x);
        feedbacks.push(r);
    }

    Ok(ChannelSequence {
        channels,
        probes,
        feedbacks,
        zeta,
        noise_var,
        meta: SequenceMeta {
            m,
            n_steps,
            gamma: dyn_.gamma,
            zeta,
            noise_var,
            seed,
            prng: PRNG_ID.to_string(),
        },
    })
}

impl ChannelSequence {
    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    /// Empirical variance of r − ζ|xᵀh|² over the stored realization (should
    /// sit near `noise_var` for long sequences).
    pub fn residual_variance(&self) -> f64 {
        let n = self.len();
        let residuals: Vec<f64> = (0..n)
            .map(|i| {
                let q = self.zeta * self.probes[i].tdot(&self.channels[i]).unwrap().norm_sqr();
                self.feedbacks[i] - q
            })
            .collect();
        let mean = residuals.iter().sum::<f64>() / n as f64;
        residuals.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n as f64
    }

    /// Column-oriented CSV: a `# key=value` header block followed by one row
    /// per step (channel real/imag parts, probe real parts, feedback).
    /// Floats are written in shortest round-trip form.
    pub fn to_csv(&self) -> String {
        let m = self.meta.m;
        let mut out = String::new();
        let _ = writeln!(out, "# m={}", self.meta.m);
        let _ = writeln!(out, "# n_steps={}", self.meta.n_steps);
        let _ = writeln!(out, "# gamma={}", self.meta.gamma);
        let _ = writeln!(out, "# zeta={}", self.meta.zeta);
        let _ = writeln!(out, "# noise_var={}", self.meta.noise_var);
        let _ = writeln!(out, "# seed={}", self.meta.seed);
        let _ = writeln!(out, "# prng={}", self.meta.prng);
        let mut header: Vec<String> = Vec::new();
        for i in 0..m {
            header.push(format!("h{i}_re"));
            header.push(format!("h{i}_im"));
        }
        for i in 0..m {
            header.push(format!("x{i}_re"));
            header.push(format!("x{i}_im"));
        }
        header.push("r".to_string());
        let _ = writeln!(out, "{}", header.join(","));
        for step in 0..self.len() {
            let mut fields: Vec<String> = Vec::with_capacity(4 * m + 1);
            for z in self.channels[step].iter() {
                fields.push(format!("{}", z.re));
                fields.push(format!("{}", z.im));
            }
            for z in self.probes[step].iter() {
                fields.push(format!("{}", z.re));
                fields.push(format!("{}", z.im));
            }
            fields.push(format!("{}", self.feedbacks[step]));
            let _ = writeln!(out, "{}", fields.join(","));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<ChannelSequence> {
        let mut meta_pairs = std::collections::BTreeMap::new();
        let mut rows: Vec<&str> = Vec::new();
        let mut header_seen = false;
        for line in text.lines() {
            let line = line.trim_end();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("# ") {
                let (key, value) = rest
                    .split_once('=')
                    .ok_or_else(|| Error::invalid(format!("bad metadata line: {line}")))?;
                meta_pairs.insert(key.to_string(), value.to_string());
            } else if !header_seen {
                header_seen = true; // column names; layout is fixed by m
            } else {
                rows.push(line);
            }
        }
        let get = |key: &str| -> Result<&String> {
            meta_pairs
                .get(key)
                .ok_or_else(|| Error::invalid(format!("missing metadata key {key}")))
        };
        let m: usize = get("m")?.parse().map_err(|_| Error::invalid("bad m"))?;
        let meta = SequenceMeta {
            m,
            n_steps: get("n_steps")?.parse().map_err(|_| Error::invalid("bad n_steps"))?,
            gamma: get("gamma")?.parse().map_err(|_| Error::invalid("bad gamma"))?,
            zeta: get("zeta")?.parse().map_err(|_| Error::invalid("bad zeta"))?,
            noise_var: get("noise_var")?
                .parse()
                .map_err(|_| Error::invalid("bad noise_var"))?,
            seed: get("seed")?.parse().map_err(|_| Error::invalid("bad seed"))?,
            prng: get("prng")?.clone(),
        };
        let mut channels = Vec::with_capacity(rows.len());
        let mut probes = Vec::with_capacity(rows.len());
        let mut feedbacks = Vec::with_capacity(rows.len());
        for row in rows {
            let fields: Vec<f64> = row
                .split(',')
                .map(|f| f.parse::<f64>().map_err(|_| Error::invalid(format!("bad field {f}"))))
                .collect::<Result<_>>()?;
            if fields.len() != 4 * m + 1 {
                return Err(Error::dims(format!(
                    "expected {} fields per row, got {}",
                    4 * m + 1,
                    fields.len()
                )));
            }
            let channel = CVec::new(
                (0..m)
                    .map(|i| Complex64::new(fields[2 * i], fields[2 * i + 1]))
                    .collect(),
            )?;
            let probe = CVec::new(
                (0..m)
                    .map(|i| Complex64::new(fields[2 * m + 2 * i], fields[2 * m + 2 * i + 1]))
                    .collect(),
            )?;
            channels.push(channel);
            probes.push(probe);
            feedbacks.push(fields[4 * m]);
        }
        Ok(ChannelSequence {
            channels,
            probes,
            feedbacks,
            zeta: meta.zeta,
            noise_var: meta.noise_var,
            meta,
        })
    }
}
