//! Standalone SVG emission: one log-scaled MSE panel and one energy panel
//! versus SNR. No interactivity, no external assets.

use std::fmt::Write as _;

use super::metrics::MetricsReport;

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 420.0;
const PANEL_W: f64 = 400.0;
const PANEL_H: f64 = 300.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_TOP: f64 = 50.0;
const PANEL_GAP: f64 = 120.0;

struct Series<'a> {
    label: &'a str,
    color: &'a str,
    values: Vec<f64>,
}

pub fn render_plot(report: &MetricsReport) -> String {
    let snrs: Vec<f64> = report.rows.iter().map(|r| r.snr_db).collect();
    let mse_series = vec![
        Series {
            label: "proposed",
            color: "#c0392b",
            values: report.rows.iter().map(|r| r.mse_proposed).collect(),
        },
        Series {
            label: "conventional",
            color: "#2980b9",
            values: report.rows.iter().map(|r| r.mse_conventional).collect(),
        },
        Series {
            label: "conventional (phase aligned)",
            color: "#8e44ad",
            values: report
                .rows
                .iter()
                .map(|r| r.mse_conventional_phase_aligned)
                .collect(),
        },
    ];
    let energy_series = vec![
        Series {
            label: "proposed",
            color: "#c0392b",
            values: report.rows.iter().map(|r| r.energy_proposed).collect(),
        },
        Series {
            label: "conventional",
            color: "#2980b9",
            values: report.rows.iter().map(|r| r.energy_conventional).collect(),
        },
        Series {
            label: "perfect CSI",
            color: "#27ae60",
            values: report.rows.iter().map(|r| r.energy_perfect_csi).collect(),
        },
    ];

    let mut svg = String::new();
    let _ = writeln!(svg, r##"<?xml version="1.0" encoding="UTF-8"?>"##);
    let _ = writeln!(
        svg,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"##
    );
    let _ = writeln!(svg, r##"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"##);
    draw_panel(
        &mut svg,
        MARGIN_LEFT,
        &snrs,
        &mse_series,
        "channel estimation MSE",
        true,
    );
    draw_panel(
        &mut svg,
        MARGIN_LEFT + PANEL_W + PANEL_GAP,
        &snrs,
        &energy_series,
        "average harvested energy",
        false,
    );
    let _ = writeln!(svg, "</svg>");
    svg
}

fn draw_panel(
    svg: &mut String,
    x0: f64,
    snrs: &[f64],
    series: &[Series<'_>],
    title: &str,
    log_scale: bool,
) {
    let y0 = MARGIN_TOP;
    let _ = writeln!(
        svg,
        r##"<rect x="{x0}" y="{y0}" width="{PANEL_W}" height="{PANEL_H}" fill="none" stroke="#333" stroke-width="1"/>"##
    );
    let _ = writeln!(
        svg,
        r##"<text x="{}" y="{}" font-family="sans-serif" font-size="14" text-anchor="middle">{title}</text>"##,
        x0 + PANEL_W / 2.0,
        y0 - 14.0
    );
    let _ = writeln!(
        svg,
        r##"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">SNR (dB)</text>"##,
        x0 + PANEL_W / 2.0,
        y0 + PANEL_H + 36.0
    );

    let finite: Vec<f64> = series
        .iter()
        .flat_map(|s| s.values.iter().copied())
        .filter(|v| v.is_finite() && (!log_scale || *v > 0.0))
        .collect();
    if snrs.is_empty() || finite.is_empty() {
        return;
    }
    let transform = |v: f64| if log_scale { v.log10() } else { v };
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in &finite {
        lo = lo.min(transform(v));
        hi = hi.max(transform(v));
    }
    if hi - lo < 1e-9 {
        hi = lo + 1.0;
    }
    let (snr_lo, snr_hi) = (
        snrs.iter().cloned().fold(f64::INFINITY, f64::min),
        snrs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );
    let snr_span = if (snr_hi - snr_lo).abs() < 1e-9 {
        1.0
    } else {
        snr_hi - snr_lo
    };
    let sx = |snr: f64| x0 + (snr - snr_lo) / snr_span * PANEL_W;
    let sy = |v: f64| y0 + PANEL_H - (transform(v) - lo) / (hi - lo) * PANEL_H;

    // Axis ticks: SNR points below, 4 value ticks on the left.
    for &snr in snrs {
        let x = sx(snr);
        let _ = writeln!(
            svg,
            r##"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="#333"/>"##,
            y0 + PANEL_H,
            y0 + PANEL_H + 5.0
        );
        let _ = writeln!(
            svg,
            r##"<text x="{x}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{snr}</text>"##,
            y0 + PANEL_H + 18.0
        );
    }
    for tick in 0..=4 {
        let frac = tick as f64 / 4.0;
        let value = lo + frac * (hi - lo);
        let y = y0 + PANEL_H - frac * PANEL_H;
        let label = if log_scale {
            format!("1e{value:.1}")
        } else {
            format!("{value:.3}")
        };
        let _ = writeln!(
            svg,
            r##"<line x1="{}" y1="{y}" x2="{x0}" y2="{y}" stroke="#333"/>"##,
            x0 - 5.0
        );
        let _ = writeln!(
            svg,
            r##"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{label}</text>"##,
            x0 - 8.0,
            y + 4.0
        );
    }

    for (i, s) in series.iter().enumerate() {
        let points: Vec<String> = snrs
            .iter()
            .zip(&s.values)
            .filter(|(_, v)| v.is_finite() && (!log_scale || **v > 0.0))
            .map(|(&snr, &v)| format!("{:.2},{:.2}", sx(snr), sy(v)))
            .collect();
        if points.len() > 1 {
            let _ = writeln!(
                svg,
                r##"<polyline points="{}" fill="none" stroke="{}" stroke-width="2"/>"##,
                points.join(" "),
                s.color
            );
        }
        for point in &points {
            let (px, py) = point.split_once(',').expect("formatted above");
            let _ = writeln!(
                svg,
                r##"<circle cx="{px}" cy="{py}" r="3" fill="{}"/>"##,
                s.color
            );
        }
        // Legend entry.
        let ly = y0 + 16.0 * i as f64 + 8.0;
        let _ = writeln!(
            svg,
            r##"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}" stroke-width="2"/>"##,
            x0 + PANEL_W - 150.0,
            x0 + PANEL_W - 128.0,
            s.color
        );
        let _ = writeln!(
            svg,
            r##"<text x="{}" y="{}" font-family="sans-serif" font-size="10">{}</text>"##,
            x0 + PANEL_W - 124.0,
            ly + 3.0,
            s.label
        );
    }
}
