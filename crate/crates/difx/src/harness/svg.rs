//! Estimated-vs-reference plots: one polyline per SNR level, as SVG.

use std::fs;
use std::path::Path;

use super::{CsvRow, SweepParameter, SweepTable};
use crate::noise::SnrLevel;
use crate::{DifxError, Result};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 48.0;
const MARGIN_B: f64 = 64.0;

const PALETTE: [&str; 7] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#17becf",
];

fn snr_label(snr: SnrLevel) -> String {
    match snr {
        SnrLevel::Infinite => "noiseless".to_string(),
        SnrLevel::Db(v) => format!("{v} dB"),
    }
}

fn extract(param: SweepParameter, row: &CsvRow) -> Option<f64> {
    match param {
        SweepParameter::Width => row.width_rms_px,
        SweepParameter::Height => row.height_rms_px,
        SweepParameter::BumpDepth => row.bumpiness,
        SweepParameter::Green => row.chrom[1],
    }
}

/// Plots a sweep table; the y column follows the swept parameter.
pub fn render_plot_svg(table: &SweepTable, path: &Path) -> Result<()> {
    let rows: Vec<CsvRow> = table
        .rows
        .iter()
        .map(|r| CsvRow::from_sweep(table.parameter, r))
        .collect();
    render_plot_svg_from_rows(&rows, path)
}

/// Plots previously written CSV rows (the `report` subcommand path). All
/// rows must belong to the same sweep parameter.
pub fn render_plot_svg_from_rows(rows: &[CsvRow], path: &Path) -> Result<()> {
    let param = match rows.first() {
        Some(first) => first.param,
        None => return Err(DifxError::InvalidArgument("no rows to plot".into())),
    };
    if rows.iter().any(|r| r.param != param) {
        return Err(DifxError::InvalidArgument(
            "rows mix several sweep parameters".into(),
        ));
    }

    // Series per SNR level, ascending with the noiseless case last.
    let mut levels: Vec<SnrLevel> = Vec::new();
    for row in rows {
        if !levels.contains(&row.snr) {
            levels.push(row.snr);
        }
    }
    levels.sort_by(|a, b| a.sort_value().partial_cmp(&b.sort_value()).unwrap());

    let mut series: Vec<(SnrLevel, Vec<(f64, f64)>)> = Vec::new();
    for &snr in &levels {
        let mut pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.snr == snr)
            .filter_map(|r| extract(param, r).map(|y| (r.value, y)))
            .collect();
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        series.push((snr, pts));
    }

    let xs: Vec<f64> = rows.iter().map(|r| r.value).collect();
    let ys: Vec<f64> = series
        .iter()
        .flat_map(|(_, pts)| pts.iter().map(|p| p.1))
        .collect();
    let (x_min, x_max) = span(&xs, 0.0);
    let (y_min, y_max) = span(&ys, 0.05);

    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = move |x: f64| MARGIN_L + (x - x_min) / (x_max - x_min) * plot_w;
    let sy = move |y: f64| HEIGHT - MARGIN_B - (y - y_min) / (y_max - y_min) * plot_h;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"sans-serif\" font-size=\"13\">\n"
    ));
    svg.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    let unit = param.unit();
    let x_label = if unit.is_empty() {
        format!("reference {}", param.token())
    } else {
        format!("reference {} ({})", param.token(), unit)
    };
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{} sweep: estimated vs reference</text>\n",
        MARGIN_L + plot_w / 2.0,
        param.token()
    ));

    // Axes.
    svg.push_str(&format!(
        "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        MARGIN_L,
        HEIGHT - MARGIN_B,
        MARGIN_L + plot_w,
        HEIGHT - MARGIN_B
    ));
    svg.push_str(&format!(
        "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        MARGIN_L,
        MARGIN_T,
        MARGIN_L,
        HEIGHT - MARGIN_B
    ));

    // Ticks and grid.
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let xv = x_min + f * (x_max - x_min);
        let yv = y_min + f * (y_max - y_min);
        svg.push_str(&format!(
            "  <line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#ddd\"/>\n",
            sx(xv),
            MARGIN_T,
            HEIGHT - MARGIN_B
        ));
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            sx(xv),
            HEIGHT - MARGIN_B + 20.0,
            trim_float(xv)
        ));
        svg.push_str(&format!(
            "  <line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"#ddd\"/>\n",
            MARGIN_L,
            sy(yv),
            MARGIN_L + plot_w
        ));
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
            MARGIN_L - 8.0,
            sy(yv) + 4.0,
            trim_float(yv)
        ));
    }

    // Axis labels.
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
        MARGIN_L + plot_w / 2.0,
        HEIGHT - 16.0,
        x_label
    ));
    svg.push_str(&format!(
        "  <text x=\"20\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {})\">{}</text>\n",
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0,
        xml_escape(param.estimate_label())
    ));

    // One polyline + legend entry per SNR level.
    for (i, (snr, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        svg.push_str(&format!(
            "  <polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.8\" points=\"{}\"/>\n",
            color,
            points.join(" ")
        ));
        for p in &points {
            let (px, py) = p.split_once(',').unwrap();
            svg.push_str(&format!(
                "  <circle cx=\"{px}\" cy=\"{py}\" r=\"2.4\" fill=\"{color}\"/>\n"
            ));
        }
        let ly = MARGIN_T + 14.0 + i as f64 * 20.0;
        let lx = WIDTH - MARGIN_R + 16.0;
        svg.push_str(&format!(
            "  <line x1=\"{lx}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"3\"/>\n",
            lx + 22.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\">{}</text>\n",
            lx + 28.0,
            ly + 4.0,
            snr_label(*snr)
        ));
    }

    svg.push_str("</svg>\n");
    fs::write(path, svg)?;
    Ok(())
}

fn span(values: &[f64], pad: f64) -> (f64, f64) {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &v in values {
        min = min.min(v);
        max = max.max(v);
    }
    if !min.is_finite() || !max.is_finite() {
        return (0.0, 1.0);
    }
    if min == max {
        return (min - 0.5, max + 0.5);
    }
    let padding = (max - min) * pad;
    (min - padding, max + padding)
}

fn trim_float(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn xml_escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
