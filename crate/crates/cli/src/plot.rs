//! Static SVG output.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use vqc_spectrum::data_spectrum::DataSpectrumRecord;
use vqc_spectrum::sim::EpochRecord;
use vqc_spectrum::spectrum::{evaluate_coefficient, CoefficientPolynomial};
use vqc_spectrum::{RankReport, SpectrumReport};

const CELL: f64 = 14.0;
const MARGIN: f64 = 48.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(w: f64, h: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\" font-family=\"sans-serif\" font-size=\"11\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

/// White to dark blue.
fn shade(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let r = (255.0 * (1.0 - 0.85 * t)) as u8;
    let g = (255.0 * (1.0 - 0.65 * t)) as u8;
    let b = (255.0 * (1.0 - 0.25 * t)) as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Cells keyed by the first two frequency components (the second is 0 when
/// d = 1); values are combined with `max`.
fn heatmap(title: &str, cells: &BTreeMap<(i64, i64), f64>, xs: (i64, i64), ys: (i64, i64)) -> String {
    let nx = (xs.1 - xs.0 + 1) as f64;
    let ny = (ys.1 - ys.0 + 1) as f64;
    let (w, h) = (2.0 * MARGIN + nx * CELL, 2.0 * MARGIN + ny * CELL);
    let peak = cells.values().cloned().fold(0.0, f64::max);
    let mut s = header(w, h);
    let _ = writeln!(s, "<text x=\"{MARGIN}\" y=\"20\" font-size=\"13\">{}</text>", escape(title));
    for ((a, b), v) in cells {
        let x = MARGIN + (a - xs.0) as f64 * CELL;
        let y = MARGIN + (ys.1 - b) as f64 * CELL;
        let t = if peak > 0.0 { v / peak } else { 0.0 };
        let _ = writeln!(
            s,
            "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{CELL}\" height=\"{CELL}\" fill=\"{}\" stroke=\"#ccc\" stroke-width=\"0.5\"><title>({a},{b}): {v:.4e}</title></rect>",
            shade(t)
        );
    }
    let _ = writeln!(
        s,
        "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"#444\"/>",
        nx * CELL,
        ny * CELL
    );
    let _ = writeln!(
        s,
        "<text x=\"{MARGIN}\" y=\"{:.1}\">ω₁ ∈ [{}, {}]</text>",
        h - MARGIN / 2.0,
        xs.0,
        xs.1
    );
    let _ = writeln!(
        s,
        "<text x=\"6\" y=\"{:.1}\">ω₂ ∈ [{}, {}]</text>",
        MARGIN - 8.0,
        ys.0,
        ys.1
    );
    s.push_str("</svg>\n");
    s
}

fn key(components: &[i64]) -> (i64, i64) {
    (components.first().copied().unwrap_or(0), components.get(1).copied().unwrap_or(0))
}

/// Coefficient magnitude at θ = 0.
fn magnitude(poly: &CoefficientPolynomial) -> f64 {
    evaluate_coefficient::<f64>(poly, &vec![0.0; poly.w]).map_or(0.0, |c| c.norm())
}

pub fn spectrum_heatmap(report: &SpectrumReport) -> String {
    let n0 = report.encoding_counts.first().copied().unwrap_or(0) as i64;
    let n1 = report.encoding_counts.get(1).copied().unwrap_or(0) as i64;
    let mut cells = BTreeMap::new();
    for poly in &report.coefficients {
        // Frequencies live on the spectrum even when |c(0)| vanishes.
        let v = magnitude(poly).max(f64::MIN_POSITIVE);
        let e = cells.entry(key(&poly.frequency.0)).or_insert(0.0f64);
        *e = e.max(v);
    }
    heatmap(
        &format!("Ω({}), |c_ω(θ=0)|, {} frequencies", report.circuit_id, report.len()),
        &cells,
        (-n0, n0),
        (-n1, n1),
    )
}

pub fn data_heatmap(record: &DataSpectrumRecord) -> String {
    let mut cells = BTreeMap::new();
    let (mut xs, mut ys) = ((0i64, 0i64), (0i64, 0i64));
    for c in &record.coefficients {
        let k = key(&c.frequency.0);
        xs = (xs.0.min(k.0), xs.1.max(k.0));
        ys = (ys.0.min(k.1), ys.1.max(k.1));
        let e = cells.entry(k).or_insert(0.0f64);
        *e = e.max(c.re.hypot(c.im));
    }
    heatmap("data spectrum |f_ω|", &cells, xs, ys)
}

/// Stacked horizontal bars of the three score terms, best rank on top.
pub fn score_bars(report: &RankReport) -> String {
    const BAR: f64 = 18.0;
    const LABEL: f64 = 160.0;
    const SPAN: f64 = 320.0;
    let colors = ["#4c72b0", "#dd8452", "#55a868"];
    let names = ["R_Ω", "R_corr", "R_punish"];
    let max = report.architectures.iter().map(|a| a.score).fold(0.0, f64::max).max(1e-300);
    let h = 2.0 * MARGIN + report.architectures.len() as f64 * (BAR + 6.0) + 20.0;
    let w = LABEL + SPAN + 2.0 * MARGIN;
    let mut s = header(w, h);
    let _ = writeln!(s, "<text x=\"{MARGIN}\" y=\"20\" font-size=\"13\">architecture scores</text>");
    for (i, a) in report.architectures.iter().enumerate() {
        let y = MARGIN + i as f64 * (BAR + 6.0);
        let _ = writeln!(
            s,
            "<text x=\"{MARGIN}\" y=\"{:.1}\">{}. {}</text>",
            y + BAR * 0.7,
            a.rank,
            escape(&a.id)
        );
        let mut x = MARGIN + LABEL;
        for (k, v) in [a.r_omega_normalized, a.r_corr_normalized, a.r_punish].into_iter().enumerate() {
            let len = SPAN * v.max(0.0) / max;
            let _ = writeln!(
                s,
                "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{len:.2}\" height=\"{BAR}\" fill=\"{}\"><title>{}: {v:.4}</title></rect>",
                colors[k], names[k]
            );
            x += len;
        }
    }
    let ly = h - MARGIN / 2.0;
    for k in 0..3 {
        let x = MARGIN + LABEL + k as f64 * 90.0;
        let _ = writeln!(
            s,
            "<rect x=\"{x:.1}\" y=\"{:.1}\" width=\"10\" height=\"10\" fill=\"{}\"/><text x=\"{:.1}\" y=\"{ly:.1}\">{}</text>",
            ly - 9.0,
            colors[k],
            x + 14.0,
            names[k]
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Train (and test) MSE per epoch on a log scale.
pub fn loss_curve(history: &[EpochRecord]) -> String {
    let (w, h) = (480.0, 300.0);
    let mut s = header(w, h);
    let _ = writeln!(s, "<text x=\"{MARGIN}\" y=\"20\" font-size=\"13\">MSE per epoch (log scale)</text>");
    let values: Vec<f64> = history
        .iter()
        .flat_map(|r| std::iter::once(r.train_mse).chain(r.test_mse))
        .filter(|v| *v > 0.0 && v.is_finite())
        .collect();
    if values.is_empty() {
        s.push_str("</svg>\n");
        return s;
    }
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min).log10().floor();
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max).log10().ceil().max(lo + 1.0);
    let n = history.len().max(2) as f64 - 1.0;
    let px = |i: usize| MARGIN + (w - 2.0 * MARGIN) * i as f64 / n;
    let py = |v: f64| MARGIN + (h - 2.0 * MARGIN) * (hi - v.max(1e-300).log10()) / (hi - lo);
    let mut line = |pick: &dyn Fn(&EpochRecord) -> Option<f64>, color: &str| {
        let pts: Vec<String> = history
            .iter()
            .enumerate()
            .filter_map(|(i, r)| pick(r).map(|v| format!("{:.1},{:.1}", px(i), py(v))))
            .collect();
        if !pts.is_empty() {
            let _ = writeln!(
                s,
                "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
                pts.join(" ")
            );
        }
    };
    line(&|r| Some(r.train_mse), "#4c72b0");
    line(&|r| r.test_mse, "#dd8452");
    let _ = writeln!(
        s,
        "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"#444\"/>",
        w - 2.0 * MARGIN,
        h - 2.0 * MARGIN
    );
    let _ = writeln!(s, "<text x=\"4\" y=\"{:.1}\">1e{hi}</text>", MARGIN + 4.0);
    let _ = writeln!(s, "<text x=\"4\" y=\"{:.1}\">1e{lo}</text>", h - MARGIN);
    s.push_str("</svg>\n");
    s
}
