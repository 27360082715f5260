//! Deterministic SVG charts of sweep results.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::bits::BitBudgetModel;
use crate::error::Result;
use crate::helmholtz::DEFAULT_KNEE_TOLERANCE;
use crate::sweep::{read_sweep_csv, summarize_lenient, Domain, SweepRecord};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 52.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];
/// Largest Q drawn for the theoretical curve, which diverges at 1.
const OVERLAY_Q_MAX: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlotKind {
    AccuracyVsQ,
    EpochsVsQ,
    AccuracyVsParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSpec {
    pub kind: PlotKind,
    /// Draw `c · ln(100 − 100·Q)` per architecture (accuracy-vs-Q only).
    pub overlay: bool,
    pub input: PathBuf,
    pub output: PathBuf,
    pub title: String,
}

struct Axis {
    lo: f64,
    hi: f64,
    ticks: Vec<f64>,
    label: &'static str,
}

impl Axis {
    fn span(&self) -> f64 {
        self.hi - self.lo
    }
}

struct Frame {
    x: Axis,
    y: Axis,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.lo) / self.x.span() * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y.lo) / self.y.span() * (HEIGHT - TOP - BOTTOM)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn ticks(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + step * i as f64).collect()
}

/// Vertices of the theoretical overlay: a fine grid plus every data `Q`, so
/// the polyline passes exactly through curves sampled at those points.
pub fn overlay_vertices(c: f64, data_qs: &[f64]) -> Vec<(f64, f64)> {
    let mut qs: Vec<f64> = (0..=198).map(|i| i as f64 / 200.0).collect();
    qs.extend(data_qs.iter().copied().filter(|q| (0.0..=OVERLAY_Q_MAX).contains(q)));
    qs.push(OVERLAY_Q_MAX);
    qs.sort_by(f64::total_cmp);
    qs.dedup();
    qs.into_iter().map(|q| (q, (c * (100.0 - 100.0 * q).ln()).max(0.0))).collect()
}

fn polyline(frame: &Frame, pts: &[(f64, f64)], color: &str, extra: &str) -> String {
    let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.4},{:.4}", frame.px(x), frame.py(y))).collect();
    format!(
        "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"{extra} points=\"{}\"/>\n",
        coords.join(" ")
    )
}

/// Mean of `value` over successful records, grouped by series then x.
fn means(
    records: &[SweepRecord],
    series: impl Fn(&SweepRecord) -> String,
    x: impl Fn(&SweepRecord) -> f64,
    value: impl Fn(&SweepRecord) -> Option<f64>,
) -> Vec<(String, Vec<(f64, f64)>)> {
    let mut order = Vec::new();
    let mut acc: BTreeMap<String, BTreeMap<u64, (f64, f64, usize)>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.status.is_ok()) {
        let Some(v) = value(r) else { continue };
        let key = series(r);
        if !acc.contains_key(&key) {
            order.push(key.clone());
        }
        let xv = x(r);
        let e = acc.entry(key).or_default().entry(xv.to_bits()).or_insert((xv, 0.0, 0));
        e.1 += v;
        e.2 += 1;
    }
    order
        .into_iter()
        .map(|k| {
            let mut pts: Vec<(f64, f64)> = acc[&k].values().map(|&(x, s, n)| (x, s / n as f64)).collect();
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            (k, pts)
        })
        .collect()
}

/// Renders one chart. `overlay` maps architecture names to fitted `c`.
/// Records without a successful run contribute nothing; with none at all the
/// chart has axes only.
pub fn render_svg(
    kind: PlotKind,
    records: &[SweepRecord],
    overlay: Option<&BTreeMap<String, f64>>,
    title: &str,
) -> Result<String> {
    let (series, frame) = match kind {
        PlotKind::AccuracyVsQ => (
            means(records, |r| r.arch.clone(), |r| r.q, |r| r.test_accuracy),
            Frame {
                x: Axis { lo: 0.0, hi: 1.0, ticks: ticks(0.0, 1.0, 0.2), label: "Q" },
                y: Axis { lo: 0.0, hi: 1.0, ticks: ticks(0.0, 1.0, 0.2), label: "test accuracy" },
            },
        ),
        PlotKind::EpochsVsQ => {
            let s = means(records, |r| r.arch.clone(), |r| r.q, |r| r.epochs_to_converge.map(|e| e as f64));
            let top = s.iter().flat_map(|(_, p)| p.iter().map(|v| v.1)).fold(1.0, f64::max);
            let step = (top / 5.0).ceil().max(1.0);
            let hi = step * 5.0;
            (
                s,
                Frame {
                    x: Axis { lo: 0.0, hi: 1.0, ticks: ticks(0.0, 1.0, 0.2), label: "Q" },
                    y: Axis { lo: 0.0, hi, ticks: ticks(0.0, hi, step), label: "epochs to converge" },
                },
            )
        }
        PlotKind::AccuracyVsParams => {
            let s = means(records, |r| format!("Q={}", r.q), |r| (r.params.max(1) as f64).log10(), |r| r.test_accuracy);
            let xs: Vec<f64> = s.iter().flat_map(|(_, p)| p.iter().map(|v| v.0)).collect();
            let lo = xs.iter().copied().fold(f64::INFINITY, f64::min).floor();
            let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max).ceil();
            let (lo, hi) = if lo.is_finite() && hi > lo { (lo, hi) } else { (0.0, 1.0) };
            (
                s,
                Frame {
                    x: Axis { lo, hi, ticks: ticks(lo, hi, 1.0), label: "log10(parameters)" },
                    y: Axis { lo: 0.0, hi: 1.0, ticks: ticks(0.0, 1.0, 0.2), label: "test accuracy" },
                },
            )
        }
    };
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(svg, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
    let _ = writeln!(svg, "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>", WIDTH / 2.0, escape(title));
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
    let _ = writeln!(svg, "<g stroke=\"#444\" stroke-width=\"1\">");
    let _ = writeln!(svg, "<line x1=\"{x0}\" y1=\"{y1}\" x2=\"{x1}\" y2=\"{y1}\"/>");
    let _ = writeln!(svg, "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\"/>");
    let _ = writeln!(svg, "</g>");
    for &t in &frame.x.ticks {
        let x = frame.px(t);
        let _ = writeln!(svg, "<line x1=\"{x:.4}\" y1=\"{y1}\" x2=\"{x:.4}\" y2=\"{}\" stroke=\"#444\"/>", y1 + 5.0);
        let _ = writeln!(svg, "<text x=\"{x:.4}\" y=\"{}\" text-anchor=\"middle\">{}</text>", y1 + 18.0, fmt_tick(t));
    }
    for &t in &frame.y.ticks {
        let y = frame.py(t);
        let _ = writeln!(svg, "<line x1=\"{}\" y1=\"{y:.4}\" x2=\"{x0}\" y2=\"{y:.4}\" stroke=\"#444\"/>", x0 - 5.0);
        let _ = writeln!(svg, "<text x=\"{}\" y=\"{:.4}\" text-anchor=\"end\">{}</text>", x0 - 8.0, y + 4.0, fmt_tick(t));
    }
    let _ = writeln!(svg, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>", (x0 + x1) / 2.0, HEIGHT - 12.0, frame.x.label);
    let _ = writeln!(
        svg,
        "<text x=\"16\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {0})\">{1}</text>",
        (y0 + y1) / 2.0,
        frame.y.label
    );

    for (i, (name, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if let (PlotKind::AccuracyVsQ, Some(&c)) = (kind, overlay.and_then(|o| o.get(name))) {
            let qs: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let verts: Vec<(f64, f64)> = overlay_vertices(c, &qs).into_iter().map(|(q, a)| (q, a.min(frame.y.hi))).collect();
            svg.push_str(&polyline(&frame, &verts, color, " stroke-dasharray=\"5,4\" opacity=\"0.6\" class=\"overlay\""));
        }
        svg.push_str(&polyline(&frame, pts, color, " class=\"series\""));
        for &(x, y) in pts {
            let _ = writeln!(svg, "<circle cx=\"{:.4}\" cy=\"{:.4}\" r=\"3\" fill=\"{color}\"/>", frame.px(x), frame.py(y));
        }
        let ly = TOP + 16.0 * i as f64;
        let _ = writeln!(svg, "<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"4\" fill=\"{color}\"/>", x1 + 12.0, ly + 4.0);
        let _ = writeln!(svg, "<text x=\"{}\" y=\"{}\">{}</text>", x1 + 30.0, ly + 10.0, escape(name));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn fmt_tick(t: f64) -> String {
    if t.fract() == 0.0 {
        format!("{t:.0}")
    } else {
        format!("{t:.1}")
    }
}

/// Reads the sweep CSV named by `spec` and writes the chart. The overlay
/// uses `c` fitted from the same records.
pub fn render_plot(spec: &PlotSpec) -> Result<()> {
    let records = read_sweep_csv(&spec.input)?;
    let fits = if spec.overlay {
        Some(summarize_lenient(&records, Domain::Audio, DEFAULT_KNEE_TOLERANCE, &BitBudgetModel::default()).fitted_scales())
    } else {
        None
    };
    let svg = render_svg(spec.kind, &records, fits.as_ref(), &spec.title)?;
    fs::write(&spec.output, svg)?;
    Ok(())
}
