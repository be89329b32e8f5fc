//! Minimal SVG line charts for run traces.
//!
//! Three charts per trace set: training error vs iteration, training
//! error vs effective gradient evaluations, and test loss vs EGE, all
//! with a log y axis. Values at or below 1e-16 are clipped to 1e-16 so
//! the log axis stays finite.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::methods::TraceRow;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const MARGIN_L: f64 = 78.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 34.0;
const MARGIN_B: f64 = 54.0;
const Y_CLIP: f64 = 1e-16;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// One labeled polyline.
pub struct PlotSeries {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Renders a log-y line chart as an SVG document.
pub fn svg_log_chart(title: &str, x_label: &str, y_label: &str, series: &[PlotSeries]) -> String {
    let mut xs_min = f64::INFINITY;
    let mut xs_max = f64::NEG_INFINITY;
    let mut ly_min = f64::INFINITY;
    let mut ly_max = f64::NEG_INFINITY;
    for s in series {
        for &(x, y) in &s.points {
            if !x.is_finite() || !y.is_finite() {
                continue;
            }
            let ly = y.max(Y_CLIP).log10();
            xs_min = xs_min.min(x);
            xs_max = xs_max.max(x);
            ly_min = ly_min.min(ly);
            ly_max = ly_max.max(ly);
        }
    }
    if !xs_min.is_finite() {
        xs_min = 0.0;
        xs_max = 1.0;
        ly_min = -1.0;
        ly_max = 0.0;
    }
    if xs_max - xs_min < 1e-12 {
        xs_max = xs_min + 1.0;
    }
    if ly_max - ly_min < 1e-12 {
        ly_max = ly_min + 1.0;
    }

    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let px = |x: f64| MARGIN_L + (x - xs_min) / (xs_max - xs_min) * plot_w;
    let py = |ly: f64| MARGIN_T + (ly_max - ly) / (ly_max - ly_min) * plot_h;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\" \
         text-anchor=\"middle\">{}</text>\n",
        WIDTH / 2.0,
        esc(title)
    ));

    // frame
    svg.push_str(&format!(
        "<rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{plot_w}\" height=\"{plot_h}\" \
         fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n"
    ));

    // x ticks (5, linear)
    for k in 0..=4 {
        let x = xs_min + (xs_max - xs_min) * k as f64 / 4.0;
        let xp = px(x);
        svg.push_str(&format!(
            "<line x1=\"{xp:.1}\" y1=\"{:.1}\" x2=\"{xp:.1}\" y2=\"{:.1}\" stroke=\"#333\"/>\n",
            MARGIN_T + plot_h,
            MARGIN_T + plot_h + 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{xp:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"middle\">{}</text>\n",
            MARGIN_T + plot_h + 18.0,
            format_tick(x)
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\" \
         text-anchor=\"middle\">{}</text>\n",
        MARGIN_L + plot_w / 2.0,
        HEIGHT - 12.0,
        esc(x_label)
    ));

    // y ticks at whole decades
    let dec_lo = ly_min.floor() as i64;
    let dec_hi = ly_max.ceil() as i64;
    let step = (((dec_hi - dec_lo) as f64 / 8.0).ceil() as i64).max(1);
    let mut dec = dec_lo;
    while dec <= dec_hi {
        let ly = dec as f64;
        if ly >= ly_min - 1e-9 && ly <= ly_max + 1e-9 {
            let yp = py(ly);
            svg.push_str(&format!(
                "<line x1=\"{:.1}\" y1=\"{yp:.1}\" x2=\"{MARGIN_L}\" y2=\"{yp:.1}\" \
                 stroke=\"#333\"/>\n",
                MARGIN_L - 5.0
            ));
            svg.push_str(&format!(
                "<line x1=\"{MARGIN_L}\" y1=\"{yp:.1}\" x2=\"{:.1}\" y2=\"{yp:.1}\" \
                 stroke=\"#ddd\"/>\n",
                MARGIN_L + plot_w
            ));
            svg.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" \
                 text-anchor=\"end\">1e{dec}</text>\n",
                MARGIN_L - 8.0,
                yp + 4.0
            ));
        }
        dec += step;
    }
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\" \
         text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">{}</text>\n",
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0,
        esc(y_label)
    ));

    // series
    for (si, s) in series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        let pts: Vec<(f64, f64)> = s
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| (px(x), py(y.max(Y_CLIP).log10())))
            .collect();
        if pts.len() == 1 {
            svg.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3.5\" fill=\"{color}\"/>\n",
                pts[0].0, pts[0].1
            ));
        } else if !pts.is_empty() {
            let joined: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            svg.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" \
                 stroke-width=\"1.8\"/>\n",
                joined.join(" ")
            ));
        }
        // legend entry
        let ly = MARGIN_T + 14.0 + 16.0 * si as f64;
        let lx = MARGIN_L + plot_w - 150.0;
        svg.push_str(&format!(
            "<rect x=\"{lx:.1}\" y=\"{:.1}\" width=\"12\" height=\"3\" fill=\"{color}\"/>\n",
            ly - 4.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{ly:.1}\" font-family=\"sans-serif\" \
             font-size=\"11\">{}</text>\n",
            lx + 18.0,
            esc(&s.label)
        ));
    }

    svg.push_str("</svg>\n");
    svg
}

fn format_tick(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let a = x.abs();
    if (0.01..100_000.0).contains(&a) {
        let s = format!("{x:.2}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    } else {
        format!("{x:.1e}")
    }
}

/// Emits the three standard charts and the combined data CSV for a set of
/// labeled traces. Returns the created file paths.
pub fn emit_plots(
    traces: &[(String, Vec<TraceRow>)],
    out_dir: impl AsRef<Path>,
) -> Result<Vec<PathBuf>> {
    if traces.is_empty() {
        return Err(crate::error::Error::InvalidParam(
            "no traces to plot".into(),
        ));
    }
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir)?;

    let series_of = |f: &dyn Fn(&TraceRow) -> (f64, f64)| -> Vec<PlotSeries> {
        traces
            .iter()
            .map(|(label, rows)| PlotSeries {
                label: label.clone(),
                points: rows.iter().map(f).collect(),
            })
            .collect()
    };

    let mut written = Vec::new();

    let charts: [(&str, &str, &str, Vec<PlotSeries>); 3] = [
        (
            "error_vs_iter.svg",
            "iteration",
            "training error",
            series_of(&|r| (r.iter as f64, r.train_error)),
        ),
        (
            "error_vs_ege.svg",
            "effective gradient evaluations",
            "training error",
            series_of(&|r| (r.cum_ege, r.train_error)),
        ),
        (
            "testloss_vs_ege.svg",
            "effective gradient evaluations",
            "test loss",
            traces
                .iter()
                .map(|(label, rows)| PlotSeries {
                    label: label.clone(),
                    points: rows
                        .iter()
                        .filter(|r| r.test_loss.is_finite())
                        .map(|r| (r.cum_ege, r.test_loss))
                        .collect(),
                })
                .collect(),
        ),
    ];
    for (file, xl, yl, series) in charts {
        let title = file.trim_end_matches(".svg").replace('_', " ");
        let svg = svg_log_chart(&title, xl, yl, &series);
        let path = out_dir.join(file);
        fs::write(&path, svg)?;
        written.push(path);
    }

    // combined underlying data
    let mut csv =
        String::from("method,iter,cum_ege,train_error,test_loss,step_len,inner_iters,wall_ms\n");
    for (label, rows) in traces {
        for r in rows {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                label,
                r.iter,
                r.cum_ege,
                r.train_error,
                r.test_loss,
                r.step_len,
                r.inner_iters,
                r.wall_ms
            ));
        }
    }
    let data_path = out_dir.join("plotdata.csv");
    fs::write(&data_path, csv)?;
    written.push(data_path);
    Ok(written)
}
