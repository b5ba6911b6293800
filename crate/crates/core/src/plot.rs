//! Static SVG line charts with confidence whiskers. Output depends only on
//! the input rows, so re-plotting the same CSV gives identical bytes.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use crate::report::AggRecord;
use crate::scenario::ScenarioKind;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 52.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    /// `(x, y, ci95)`, sorted by x.
    pub points: Vec<(f64, f64, Option<f64>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub series: Vec<Series>,
}

fn colour(name: &str) -> &'static str {
    match name {
        "cbap-only" => "#d62728",
        "sp1" => "#1f77b4",
        "sp2" => "#2ca02c",
        "sp3" => "#ff7f0e",
        _ => "#7f7f7f",
    }
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let f = raw / mag;
    let nice = if f < 1.5 {
        1.0
    } else if f < 3.0 {
        2.0
    } else if f < 7.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn label(v: f64, step: f64) -> String {
    let digits = if step >= 1.0 { 0 } else { (-step.log10().floor()) as usize };
    format!("{v:.digits$}")
}

/// Axis range and ticks; log axes are in log10 units.
fn axis(lo: f64, hi: f64, log: bool) -> (f64, f64, Vec<(f64, String)>) {
    if log {
        let (a, b) = (lo.log10().floor(), hi.log10().ceil().max(lo.log10().floor() + 1.0));
        let ticks = (a as i32..=b as i32).map(|e| (f64::from(e), format!("{}", 10f64.powi(e)))).collect();
        return (a, b, ticks);
    }
    let (lo, hi) = if hi - lo < 1e-12 { (lo - 0.5 * lo.abs().max(1.0), hi + 0.5 * hi.abs().max(1.0)) } else { (lo, hi) };
    let step = nice_step(hi - lo);
    let a = (lo / step).floor() * step;
    let b = (hi / step).ceil() * step;
    let n = ((b - a) / step).round() as i64;
    let ticks = (0..=n).map(|k| a + k as f64 * step).map(|v| (v, label(v, step))).collect();
    (a, b, ticks)
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render_svg(chart: &Chart) -> String {
    let pts = chart.series.iter().flat_map(|s| s.points.iter());
    let xs: Vec<f64> = pts.clone().map(|p| p.0).collect();
    let mut ys: Vec<f64> = Vec::new();
    for &(_, y, ci) in pts {
        let c = ci.unwrap_or(0.0);
        ys.push(y + c);
        ys.push(if chart.log_y && y - c <= 0.0 { y } else { y - c });
    }
    if chart.log_y {
        ys.retain(|&y| y > 0.0);
    }
    let fold = |v: &[f64]| v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let (x_lo, x_hi) = if xs.is_empty() { (0.0, 1.0) } else { fold(&xs) };
    let (y_lo, y_hi) = if ys.is_empty() { (1.0, 10.0) } else { fold(&ys) };
    let (xa, xb, xticks) = axis(x_lo, x_hi, false);
    let (ya, yb, yticks) = axis(y_lo, y_hi, chart.log_y);
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - xa) / (xb - xa) * pw;
    let ty = |y: f64| if chart.log_y { y.max(1e-300).log10() } else { y };
    let sy = |y: f64| TOP + ph - (ty(y) - ya) / (yb - ya) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#, LEFT + pw / 2.0, esc(&chart.title));
    for (v, text) in &xticks {
        let x = LEFT + (v - xa) / (xb - xa) * pw;
        let _ = writeln!(s, r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#dddddd"/>"##, TOP, TOP + ph);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{text}</text>"#, TOP + ph + 16.0);
    }
    for (v, text) in &yticks {
        let y = TOP + ph - (v - ya) / (yb - ya) * ph;
        let _ = writeln!(s, r##"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##, LEFT + pw);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{text}</text>"#, LEFT - 6.0, y + 4.0);
    }
    let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, H - 12.0, esc(&chart.x_label));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{0:.1}" text-anchor="middle" transform="rotate(-90 16 {0:.1})">{1}</text>"#,
        TOP + ph / 2.0,
        esc(&chart.y_label)
    );

    for (k, series) in chart.series.iter().enumerate() {
        let c = colour(&series.name);
        let visible: Vec<_> = series.points.iter().filter(|p| !chart.log_y || p.1 > 0.0).collect();
        let path: Vec<String> = visible.iter().map(|p| format!("{:.2},{:.2}", sx(p.0), sy(p.1))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{c}" stroke-width="1.5"/>"#, path.join(" "));
        for &&(x, y, ci) in &visible {
            let (px, py) = (sx(x), sy(y));
            if let Some(ci) = ci.filter(|&c| c > 0.0) {
                let lo = if chart.log_y && y - ci <= 0.0 { y } else { y - ci };
                let (y1, y2) = (sy(y + ci), sy(lo));
                let _ = writeln!(s, r#"<line x1="{px:.2}" y1="{y1:.2}" x2="{px:.2}" y2="{y2:.2}" stroke="{c}"/>"#);
                for yy in [y1, y2] {
                    let _ = writeln!(s, r#"<line x1="{:.2}" y1="{yy:.2}" x2="{:.2}" y2="{yy:.2}" stroke="{c}"/>"#, px - 3.0, px + 3.0);
                }
            }
            let _ = writeln!(s, r#"<circle cx="{px:.2}" cy="{py:.2}" r="3" fill="{c}"/>"#);
        }
        let ly = TOP + 12.0 + 18.0 * k as f64;
        let lx = LEFT + pw + 14.0;
        let _ = writeln!(s, r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{c}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, lx + 26.0, ly + 4.0, esc(&series.name));
    }
    s.push_str("</svg>\n");
    s
}

#[derive(Clone, Copy)]
enum XAxis {
    Load,
    NStas,
    Rho,
}

fn x_of(r: &AggRecord, x: XAxis) -> f64 {
    match x {
        XAxis::Load => r.eta_or_r,
        XAxis::NStas => f64::from(r.n_stas),
        XAxis::Rho => r.rho,
    }
}

/// One line per configuration, in first-appearance order.
fn series(rows: &[&AggRecord], x: XAxis, metric: &str, scale: f64) -> Vec<Series> {
    let mut names: Vec<&str> = Vec::new();
    for r in rows {
        if !names.contains(&r.config.as_str()) {
            names.push(&r.config);
        }
    }
    names
        .into_iter()
        .map(|name| {
            let mut points: Vec<_> = rows
                .iter()
                .filter(|r| r.config == name)
                .filter_map(|r| {
                    let (mean, ci) = r.metric(metric)?;
                    Some((x_of(r, x), mean? * scale, ci.map(|c| c * scale)))
                })
                .collect();
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            Series { name: name.to_string(), points }
        })
        .collect()
}

fn distinct(rows: &[AggRecord], f: impl Fn(&AggRecord) -> f64) -> usize {
    rows.iter().map(|r| f(r).to_bits()).collect::<BTreeSet<_>>().len()
}

/// Writes the scenario's figure set into `out_dir` and returns the paths.
pub fn emit_plots(rows: &[AggRecord], kind: ScenarioKind, out_dir: &Path) -> io::Result<Vec<PathBuf>> {
    let rate_mode = kind == ScenarioKind::Two;
    let load_label = if rate_mode { "R (b/s)" } else { "normalized offered traffic η" };
    let mut charts: Vec<(String, Chart)> = Vec::new();
    let all: Vec<&AggRecord> = rows.iter().collect();
    let chart = |title: &str, x_label: &str, y_label: &str, log_y, series| Chart {
        title: title.to_string(),
        x_label: x_label.to_string(),
        y_label: y_label.to_string(),
        log_y,
        series,
    };
    if rate_mode {
        let mut rates: Vec<f64> = rows.iter().map(|r| r.eta_or_r).collect();
        rates.sort_by(f64::total_cmp);
        rates.dedup();
        for rate in rates {
            let sub: Vec<&AggRecord> = rows.iter().filter(|r| r.eta_or_r == rate).collect();
            let mbps = rate / 1e6;
            charts.push((
                format!("thr_R{mbps}.svg"),
                chart(&format!("Aggregated throughput (R = {mbps} Mb/s)"), "number of STAs", "throughput (Mb/s)", false, series(&sub, XAxis::NStas, "thr_bps", 1e-6)),
            ));
            charts.push((
                format!("delay_R{mbps}.svg"),
                chart(&format!("Average delay (R = {mbps} Mb/s)"), "number of STAs", "delay (ms)", true, series(&sub, XAxis::NStas, "avg_delay_ns", 1e-6)),
            ));
        }
    } else {
        let (x, x_label) = match kind {
            ScenarioKind::Three => (XAxis::Rho, "period deviation ratio ρ"),
            ScenarioKind::Custom if distinct(rows, |r| r.rho) > distinct(rows, |r| r.eta_or_r).max(distinct(rows, |r| f64::from(r.n_stas))) => {
                (XAxis::Rho, "period deviation ratio ρ")
            }
            ScenarioKind::Custom if distinct(rows, |r| f64::from(r.n_stas)) > distinct(rows, |r| r.eta_or_r) => {
                (XAxis::NStas, "number of STAs")
            }
            _ => (XAxis::Load, load_label),
        };
        charts.push(("delay.svg".into(), chart("Average delay", x_label, "delay (ms)", true, series(&all, x, "avg_delay_ns", 1e-6))));
        charts.push(("jitter.svg".into(), chart("Average delay variation (jitter)", x_label, "jitter (µs)", true, series(&all, x, "jitter_ns", 1e-3))));
        charts.push((
            "norm_throughput.svg".into(),
            chart("Normalized throughput", x_label, "delivered / offered", false, series(&all, x, "norm_thr", 1.0)),
        ));
    }
    let mut paths = Vec::new();
    for (name, c) in charts {
        let path = out_dir.join(name);
        std::fs::write(&path, render_svg(&c))?;
        paths.push(path);
    }
    Ok(paths)
}
