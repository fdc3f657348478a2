//! Self-contained SVG line charts of sweep tables.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{usage, Result};
use crate::sweep::{Engine, Row};

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 520.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 250.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

/// Decades shown below the top of a log ASE axis; smaller values sit on the floor.
const ASE_DECADES: f64 = 6.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

/// Quantity on the y axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// Coverage probability on a linear [0, 1] axis.
    Pcov,
    /// Area spectral efficiency on a log axis.
    Ase,
}

impl Metric {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Pcov => "coverage probability",
            Self::Ase => "ASE (bps/Hz/m^2)",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PlotStyle<'a> {
    pub metric: Metric,
    pub title: &'a str,
}

struct Series<'a> {
    scenario: &'a str,
    engine: Engine,
    /// (x, y, whisker half-height in y units)
    points: Vec<(f64, f64, Option<f64>)>,
}

#[derive(Clone, Copy)]
struct Scale {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Scale {
    fn frac(&self, v: f64) -> f64 {
        if self.log {
            (v.log10() - self.lo) / (self.hi - self.lo)
        } else {
            (v - self.lo) / (self.hi - self.lo)
        }
    }

    /// Tick positions in data units.
    fn ticks(&self) -> Vec<f64> {
        if self.log {
            (self.lo.ceil() as i32..=self.hi.floor() as i32).map(|e| 10f64.powi(e)).collect()
        } else {
            let step = nice_step((self.hi - self.lo) / 5.0);
            let first = (self.lo / step).ceil() as i64;
            let last = (self.hi / step).floor() as i64;
            (first..=last).map(|k| k as f64 * step).collect()
        }
    }
}

fn nice_step(raw: f64) -> f64 {
    let mag = 10f64.powf(raw.log10().floor());
    let f = raw / mag;
    let nice = if f <= 1.0 {
        1.0
    } else if f <= 2.0 {
        2.0
    } else if f <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn log_bounds(lo: f64, hi: f64) -> (f64, f64) {
    let (a, b) = (lo.log10().floor(), hi.log10().ceil());
    if a == b {
        (a, b + 1.0)
    } else {
        (a, b)
    }
}

fn fmt_tick(v: f64, log: bool) -> String {
    if log {
        format!("1e{}", v.log10().round() as i32)
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn collect_series<'a>(rows: &'a [Row], metric: Metric) -> Vec<Series<'a>> {
    let mut series: Vec<Series<'a>> = Vec::new();
    for row in rows {
        let idx = match series.iter().position(|s| s.scenario == row.scenario_id && s.engine == row.engine) {
            Some(i) => i,
            None => {
                series.push(Series {
                    scenario: &row.scenario_id,
                    engine: row.engine,
                    points: Vec::new(),
                });
                series.len() - 1
            }
        };
        let Ok(p) = &row.outcome else { continue };
        let (y, whisker) = match metric {
            Metric::Pcov => (p.pcov, p.ci_halfwidth),
            Metric::Ase => {
                let ratio = if p.pcov > 0.0 { p.ase / p.pcov } else { 0.0 };
                (p.ase, p.ci_halfwidth.map(|c| c * ratio))
            }
        };
        if y.is_finite() && (metric == Metric::Pcov || y > 0.0) {
            series[idx].points.push((row.axis_value, y, whisker));
        }
    }
    series
}

/// Renders `rows` with log-x when every axis value is positive and linear-x
/// otherwise. Each (scenario, engine) pair becomes one polyline; Monte Carlo
/// series carry confidence whiskers.
pub fn render_svg(rows: &[Row], style: PlotStyle<'_>) -> Result<String> {
    let Some(first) = rows.first() else {
        return Err(usage("nothing to plot: the table is empty"));
    };
    if rows.iter().any(|r| r.axis != first.axis) {
        return Err(usage("cannot plot a table that mixes sweep axes"));
    }
    let series = collect_series(rows, style.metric);
    let all: Vec<(f64, f64)> = series.iter().flat_map(|s| s.points.iter().map(|p| (p.0, p.1))).collect();
    if all.is_empty() {
        return Err(usage("nothing to plot: every series is empty"));
    }

    let (xmin, xmax) = all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let xlog = all.iter().all(|p| p.0 > 0.0);
    let xs = if xlog {
        let (lo, hi) = log_bounds(xmin, xmax);
        Scale { lo, hi, log: true }
    } else if xmin == xmax {
        Scale { lo: xmin - 1.0, hi: xmax + 1.0, log: false }
    } else {
        Scale { lo: xmin, hi: xmax, log: false }
    };
    let ys = match style.metric {
        Metric::Pcov => Scale { lo: 0.0, hi: 1.0, log: false },
        Metric::Ase => {
            let (lo, hi) = all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
            let (lo, hi) = log_bounds(lo, hi);
            Scale { lo: lo.max(hi - ASE_DECADES), hi, log: true }
        }
    };
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let px = |x: f64| LEFT + xs.frac(x) * pw;
    let py = |y: f64| {
        let f = ys.frac(y);
        let f = if ys.log { f.clamp(0.0, 1.0) } else { f.clamp(-0.05, 1.05) };
        TOP + (1.0 - f) * ph
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        LEFT + pw / 2.0,
        escape(style.title)
    );

    // grid and ticks
    for t in xs.ticks() {
        let x = px(t);
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#e0e0e0"/>"##,
            TOP + ph
        );
        let _ = writeln!(
            svg,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + ph + 18.0,
            fmt_tick(t, xs.log)
        );
    }
    for t in ys.ticks() {
        let y = py(t);
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e0e0e0"/>"##,
            LEFT + pw
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            y + 4.0,
            fmt_tick(t, ys.log)
        );
    }
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0,
        escape(first.axis.name())
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        style.metric.label()
    );

    let mut legend = 0;
    for (i, s) in series.iter().enumerate() {
        if s.points.is_empty() {
            continue;
        }
        let color = PALETTE[i % PALETTE.len()];
        let dash = if s.engine == Engine::MonteCarlo { r#" stroke-dasharray="5 3""# } else { "" };
        let pts: Vec<String> = s.points.iter().map(|p| format!("{:.2},{:.2}", px(p.0), py(p.1))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.6"{dash} points="{}"/>"#,
            pts.join(" ")
        );
        for &(x, y, w) in &s.points {
            let Some(w) = w else { continue };
            let lo = if ys.log { (y - w).max(10f64.powf(ys.lo)) } else { y - w };
            let (x, y1, y2) = (px(x), py(lo), py(y + w));
            let _ = writeln!(
                svg,
                r#"<path d="M{x:.2},{y1:.2}V{y2:.2}M{:.2},{y1:.2}h6M{:.2},{y2:.2}h6" stroke="{color}" fill="none"/>"#,
                x - 3.0,
                x - 3.0
            );
        }
        let ly = TOP + 10.0 + 18.0 * legend as f64;
        let lx = LEFT + pw + 15.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"{dash}/>"#,
            lx + 24.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}">{} ({})</text>"#,
            lx + 30.0,
            ly + 4.0,
            escape(s.scenario),
            s.engine.name()
        );
        legend += 1;
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn write_file(path: &Path, rows: &[Row], style: PlotStyle<'_>) -> Result<()> {
    std::fs::write(path, render_svg(rows, style)?)?;
    Ok(())
}
