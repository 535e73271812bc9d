//! Self-describing text checkpoints.
//!
//! Layout: a `key=value` header (format version, architecture, PRNG id,
//! optional `meta.*` echo lines, and a SHA-256 of the parameter section),
//! then `[params]`, named blocks of decimal floats in shortest round-trip
//! scientific notation, and `end`. Round-trips are bit-exact.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::nn::{Activation, GateActivation, ParamFlat};
use crate::numerics::PRNG_ID;

use super::{build_tracker, LstmFnnTracker, TrackerArch};
use crate::numerics::Rng;

const FORMAT_LINE: &str = "wetrack-checkpoint v1";
const GATE_NAMES: [&str; 4] = ["f", "i", "o", "cand"];
const VALUES_PER_LINE: usize = 8;

pub fn save_checkpoint(tracker: &LstmFnnTracker, path: impl AsRef<Path>) -> Result<()> {
    save_checkpoint_with_meta(tracker, path, &[])
}

/// Save with extra `meta.key=value` echo lines (e.g. the training config).
pub fn save_checkpoint_with_meta(
    tracker: &LstmFnnTracker,
    path: impl AsRef<Path>,
    extras: &[(String, String)],
) -> Result<()> {
    let text = render(tracker, extras);
    std::fs::write(path, text)?;
    Ok(())
}

fn render(tracker: &LstmFnnTracker, extras: &[(String, String)]) -> String {
    let arch = tracker.arch();
    let params_section = render_params(tracker);
    let hash = hex_sha256(params_section.as_bytes());

    let mut out = String::new();
    let _ = writeln!(out, "{FORMAT_LINE}");
    let _ = writeln!(out, "prng={PRNG_ID}");
    let _ = writeln!(out, "m={}", arch.m);
    let _ = writeln!(out, "t_window={}", arch.t_window);
    let _ = writeln!(out, "k_depth={}", arch.k_depth);
    let _ = writeln!(out, "l_hidden={}", arch.l_hidden);
    let _ = writeln!(out, "q_hidden={}", arch.q_hidden);
    let _ = writeln!(out, "gate_activation={}", arch.gate_activation.name());
    let _ = writeln!(out, "fnn_hidden_activation={}", arch.fnn_hidden_activation.name());
    let _ = writeln!(out, "fnn_output_activation={}", arch.fnn_output_activation.name());
    let _ = writeln!(out, "untied={}", arch.untied);
    let _ = writeln!(out, "fb_scale={:e}", arch.fb_scale);
    for (key, value) in extras {
        let _ = writeln!(out, "meta.{key}={value}");
    }
    let _ = writeln!(out, "param_sha256={hash}");
    let _ = writeln!(out, "[params]");
    out.push_str(&params_section);
    let _ = writeln!(out, "end");
    out
}

fn render_params(tracker: &LstmFnnTracker) -> String {
    let mut out = String::new();
    let mut block = |name: &str, values: &[f64]| {
        let _ = writeln!(out, "block {name} {}", values.len());
        for chunk in values.chunks(VALUES_PER_LINE) {
            let line: Vec<String> = chunk.iter().map(|v| format!("{v:e}")).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
    };
    for (k, layer) in tracker.params().grid.iter().enumerate() {
        for (c, cell) in layer.iter().enumerate() {
            for j in 0..4 {
                let gate = GATE_NAMES[j];
                block(&format!("grid.{k}.{c}.{gate}.w"), cell.w[j].data());
                block(&format!("grid.{k}.{c}.{gate}.u"), cell.u[j].data());
                block(&format!("grid.{k}.{c}.{gate}.b"), &cell.b[j]);
            }
        }
    }
    for (i, layer) in tracker.params().fnn.iter().enumerate() {
        block(&format!("fnn.{i}.v"), layer.v.data());
        block(&format!("fnn.{i}.beta"), &layer.beta);
    }
    out
}

fn hex_sha256(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<LstmFnnTracker> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))?;
    parse(&text)
}

fn parse(text: &str) -> Result<LstmFnnTracker> {
    let bad = |msg: String| Error::Checkpoint(msg);
    let mut lines = text.lines();
    let first = lines.next().ok_or_else(|| bad("empty checkpoint".into()))?;
    if first != FORMAT_LINE {
        return Err(bad(format!("unsupported format line: {first}")));
    }

    let mut header = std::collections::BTreeMap::new();
    let mut params_text = String::new();
    let mut in_params = false;
    let mut saw_end = false;
    for line in lines {
        if in_params {
            if line == "end" {
                saw_end = true;
                break;
            }
            params_text.push_str(line);
            params_text.push('\n');
        } else if line == "[params]" {
            in_params = true;
        } else if let Some((key, value)) = line.split_once('=') {
            header.insert(key.to_string(), value.to_string());
        } else if !line.trim().is_empty() {
            return Err(bad(format!("unexpected header line: {line}")));
        }
    }
    if !saw_end {
        return Err(bad("missing end marker".into()));
    }

    let get = |key: &str| -> Result<&String> {
        header
            .get(key)
            .ok_or_else(|| Error::Checkpoint(format!("missing header key {key}")))
    };
    let parse_usize = |key: &str| -> Result<usize> {
        get(key)?
            .parse()
            .map_err(|_| Error::Checkpoint(format!("bad value for {key}")))
    };

    if get("prng")? != PRNG_ID {
        return Err(bad(format!(
            "checkpoint PRNG id {} does not match {PRNG_ID}",
            get("prng")?
        )));
    }
    let declared_hash = get("param_sha256")?.clone();
    let actual_hash = hex_sha256(params_text.as_bytes());
    if declared_hash != actual_hash {
        return Err(bad(format!(
            "parameter hash mismatch: header {declared_hash}, content {actual_hash}"
        )));
    }

    let arch = TrackerArch {
        m: parse_usize("m")?,
        t_window: parse_usize("t_window")?,
        k_depth: parse_usize("k_depth")?,
        l_hidden: parse_usize("l_hidden")?,
        q_hidden: parse_usize("q_hidden")?,
        gate_activation: GateActivation::parse(get("gate_activation")?)
            .ok_or_else(|| Error::Checkpoint("bad gate_activation".into()))?,
        fnn_hidden_activation: Activation::parse(get("fnn_hidden_activation")?)
            .ok_or_else(|| Error::Checkpoint("bad fnn_hidden_activation".into()))?,
        fnn_output_activation: Activation::parse(get("fnn_output_activation")?)
            .ok_or_else(|| Error::Checkpoint("bad fnn_output_activation".into()))?,
        untied: get("untied")? == "true",
        fb_scale: get("fb_scale")?
            .parse()
            .map_err(|_| Error::Checkpoint("bad fb_scale".into()))?,
    };

    // Parameters are written in a fixed block order; rebuild the shape from
    // the arch and stream the values back in.
    let mut tracker = build_tracker(&arch, &mut Rng::seeded(0))?;
    let mut values: Vec<f64> = Vec::with_capacity(tracker.params().flat_len());
    let mut expected_blocks = expected_block_names(&arch);
    expected_blocks.reverse(); // pop from the back

    let mut tokens = params_text.split_whitespace().peekable();
    while tokens.peek().is_some() {
        let tag = tokens.next().unwrap();
        if tag != "block" {
            return Err(bad(format!("expected block, found {tag}")));
        }
        let name = tokens
            .next()
            .ok_or_else(|| Error::Checkpoint("truncated block header".into()))?;
        let len: usize = tokens
            .next()
            .ok_or_else(|| Error::Checkpoint("truncated block header".into()))?
            .parse()
            .map_err(|_| Error::Checkpoint(format!("bad block length in {name}")))?;
        let expected = expected_blocks
            .pop()
            .ok_or_else(|| Error::Checkpoint(format!("unexpected extra block {name}")))?;
        if name != expected.0 || len != expected.1 {
            return Err(bad(format!(
                "block {name} ({len}) does not match expected {} ({})",
                expected.0, expected.1
            )));
        }
        for _ in 0..len {
            let tok = tokens
                .next()
                .ok_or_else(|| Error::Checkpoint(format!("block {name} truncated")))?;
            let v: f64 = tok
                .parse()
                .map_err(|_| Error::Checkpoint(format!("bad float {tok} in {name}")))?;
            values.push(v);
        }
    }
    if let Some((name, _)) = expected_blocks.pop() {
        return Err(bad(format!("missing block {name}")));
    }
    tracker.params_mut().load_flat(&values).map_err(|e| {
        Error::Checkpoint(format!("parameter shape inconsistency: {e}"))
    })?;
    Ok(tracker)
}

fn expected_block_names(arch: &TrackerArch) -> Vec<(String, usize)> {
    let q = arch.q_hidden;
    let cells = if arch.untied { arch.t_window } else { 1 };
    let mut blocks = Vec::new();
    for k in 0..arch.k_depth {
        let d = if k == 0 { arch.input_size() } else { q };
        for c in 0..cells {
            for gate in GATE_NAMES {
                blocks.push((format!("grid.{k}.{c}.{gate}.w"), q * d));
                blocks.push((format!("grid.{k}.{c}.{gate}.u"), q * q));
                blocks.push((format!("grid.{k}.{c}.{gate}.b"), q));
            }
        }
    }
    for i in 0..arch.l_hidden {
        blocks.push((format!("fnn.{i}.v"), q * q));
        blocks.push((format!("fnn.{i}.beta"), q));
    }
    let out = arch.output_size();
    blocks.push((format!("fnn.{}.v", arch.l_hidden), out * q));
    blocks.push((format!("fnn.{}.beta", arch.l_hidden), out));
    blocks
}
