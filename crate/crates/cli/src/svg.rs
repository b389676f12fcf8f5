//! Hand-built SVG on a fixed layout grid. Plotted values travel in `data-*`
//! attributes formatted exactly like the CSV sidecar cells.

use crate::report::{num, ProfileRecord};
use precipice::{IntervalEstimate, RankDistribution};
use std::fmt::Write as _;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn px(x: f64) -> String {
    format!("{x:.2}")
}

fn joined(values: impl IntoIterator<Item = f64>) -> String {
    values.into_iter().map(num).collect::<Vec<_>>().join(" ")
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn plot(lo: f64, hi: f64, ylo: f64, yhi: f64) -> Self {
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
        let (ylo, yhi) = if yhi > ylo { (ylo, yhi) } else { (ylo - 0.5, ylo + 0.5) };
        Self { x0: lo, x1: hi, y0: ylo, y1: yhi }
    }

    fn x(&self, v: f64) -> f64 {
        LEFT + (v - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - BOTTOM - (v - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn open(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"#,
        w = WIDTH,
        h = HEIGHT
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="18" font-size="13">{}</text>"#, px(LEFT), escape(title));
    s
}

fn axes(s: &mut String, xlabel: &str, ylabel: &str) {
    let (l, r, t, b) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
    let _ = writeln!(
        s,
        r#"<path class="axes" d="M{} {} V{} H{}" fill="none" stroke="black"/>"#,
        px(l),
        px(t),
        px(b),
        px(r)
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, px((l + r) / 2.0), px(b + 40.0), escape(xlabel));
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
        px((t + b) / 2.0),
        px((t + b) / 2.0),
        escape(ylabel)
    );
}

fn y_ticks(s: &mut String, frame: &Frame, ticks: &[f64]) {
    for &v in ticks {
        let y = frame.y(v);
        let _ = writeln!(
            s,
            r#"<path d="M{} {} H{}" stroke="black"/><text x="{}" y="{}" text-anchor="end">{}</text>"#,
            px(LEFT - 4.0),
            px(y),
            px(LEFT),
            px(LEFT - 6.0),
            px(y + 4.0),
            num(v)
        );
    }
}

fn legend(s: &mut String, names: &[&str]) {
    for (i, name) in names.iter().enumerate() {
        let y = TOP + 10.0 + 16.0 * i as f64;
        let x = WIDTH - RIGHT + 16.0;
        let _ = writeln!(
            s,
            r#"<rect x="{}" y="{}" width="10" height="10" fill="{}"/><text x="{}" y="{}">{}</text>"#,
            px(x),
            px(y - 9.0),
            color(i),
            px(x + 14.0),
            px(y),
            escape(name)
        );
    }
}

/// Step curves with optional shaded bands. With `axis`, τ is placed at the
/// rescaled coordinate instead of its raw value.
pub fn profiles(records: &[ProfileRecord], axis: Option<&[(f64, f64)]>, title: &str) -> String {
    let taus = records.first().map(|r| r.curve.taus().to_vec()).unwrap_or_default();
    let coords: Vec<f64> = match axis {
        Some(a) => a.iter().map(|&(_, c)| c).collect(),
        None => taus.clone(),
    };
    let (lo, hi) = match (coords.first(), coords.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => (0.0, 1.0),
    };
    let frame = Frame::plot(lo, hi, 0.0, 1.0);
    let mut s = open(title);
    axes(&mut s, if axis.is_some() { "τ (rescaled)" } else { "τ" }, "fraction of runs with score > τ");
    y_ticks(&mut s, &frame, &[0.0, 0.25, 0.5, 0.75, 1.0]);
    let ticks = 6.min(taus.len());
    for k in 0..ticks {
        let i = if ticks > 1 { k * (taus.len() - 1) / (ticks - 1) } else { 0 };
        let x = frame.x(coords[i]);
        let _ = writeln!(
            s,
            r#"<path d="M{} {} V{}" stroke="black"/><text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            px(x),
            px(HEIGHT - BOTTOM),
            px(HEIGHT - BOTTOM + 4.0),
            px(x),
            px(HEIGHT - BOTTOM + 16.0),
            num(taus[i])
        );
    }
    for (i, r) in records.iter().enumerate() {
        let values = r.curve.values();
        let step = |ys: &[f64]| {
            let mut d = format!("M{} {}", px(frame.x(coords[0])), px(frame.y(ys[0])));
            for k in 1..coords.len() {
                let _ = write!(d, " H{} V{}", px(frame.x(coords[k])), px(frame.y(ys[k])));
            }
            d
        };
        let mut attrs = format!(
            r#"class="series" data-algorithm="{}" data-tau="{}" data-value="{}""#,
            escape(&r.algorithm),
            joined(taus.iter().copied()),
            joined(values.iter().copied())
        );
        if let Some(bands) = r.curve.bands() {
            let _ = write!(
                attrs,
                r#" data-lower="{}" data-upper="{}""#,
                joined(bands.iter().map(|b| b.0)),
                joined(bands.iter().map(|b| b.1))
            );
        }
        if axis.is_some() {
            let _ = write!(attrs, r#" data-axis="{}""#, joined(coords.iter().copied()));
        }
        let _ = writeln!(s, "<g {attrs}>");
        if let Some(bands) = r.curve.bands() {
            let upper: Vec<f64> = bands.iter().map(|b| b.1).collect();
            let lower: Vec<f64> = bands.iter().map(|b| b.0).collect();
            let mut d = step(&upper);
            for k in (0..coords.len()).rev() {
                let _ = write!(d, " L{} {}", px(frame.x(coords[k])), px(frame.y(lower[k])));
                if k > 0 {
                    let _ = write!(d, " V{}", px(frame.y(lower[k - 1])));
                }
            }
            let _ = writeln!(s, r#"<path class="band" d="{d} Z" fill="{}" fill-opacity="0.2" stroke="none"/>"#, color(i));
        }
        let _ = writeln!(s, r#"<path class="step" d="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#, step(values), color(i));
        let _ = writeln!(s, "</g>");
    }
    let names: Vec<&str> = records.iter().map(|r| r.algorithm.as_str()).collect();
    legend(&mut s, &names);
    s.push_str("</svg>\n");
    s
}

/// One stacked bar per algorithm from the task-averaged rank matrix.
pub fn ranks(r: &RankDistribution, title: &str) -> String {
    let frame = Frame::plot(0.0, r.algorithms.len() as f64, 0.0, 1.0);
    let mut s = open(title);
    axes(&mut s, "algorithm", "probability of rank");
    y_ticks(&mut s, &frame, &[0.0, 0.25, 0.5, 0.75, 1.0]);
    let slot = frame.x(1.0) - frame.x(0.0);
    for (i, (alg, row)) in r.algorithms.iter().zip(&r.mean_matrix).enumerate() {
        let x = frame.x(i as f64) + 0.15 * slot;
        let _ = writeln!(s, r#"<g class="bar" data-algorithm="{}" data-values="{}">"#, escape(alg), joined(row.iter().copied()));
        let mut acc = 0.0;
        for (k, &p) in row.iter().enumerate() {
            let (top, bottom) = (frame.y(acc + p), frame.y(acc));
            let _ = writeln!(
                s,
                r#"<rect class="rank" data-rank="{}" data-value="{}" x="{}" y="{}" width="{}" height="{}" fill="{}"/>"#,
                k + 1,
                num(p),
                px(x),
                px(top),
                px(0.7 * slot),
                px(bottom - top),
                color(k)
            );
            acc += p;
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text></g>"#,
            px(x + 0.35 * slot),
            px(HEIGHT - BOTTOM + 16.0),
            escape(alg)
        );
    }
    let labels: Vec<String> = (1..=r.algorithms.len()).map(|k| format!("rank {k}")).collect();
    legend(&mut s, &labels.iter().map(String::as_str).collect::<Vec<_>>());
    s.push_str("</svg>\n");
    s
}

/// A labelled interval for [`intervals`].
pub struct IntervalRow<'a> {
    pub label: &'a str,
    pub panel: &'a str,
    pub estimate: &'a IntervalEstimate,
}

/// Point-and-whisker panels, one per distinct `panel`, each on its own scale.
pub fn intervals(rows: &[IntervalRow<'_>], title: &str) -> String {
    let mut panels: Vec<&str> = Vec::new();
    let mut labels: Vec<&str> = Vec::new();
    for r in rows {
        if !panels.contains(&r.panel) {
            panels.push(r.panel);
        }
        if !labels.contains(&r.label) {
            labels.push(r.label);
        }
    }
    let mut s = open(title);
    let inner = WIDTH - LEFT - 20.0;
    let width = inner / panels.len().max(1) as f64;
    let row_h = (HEIGHT - TOP - BOTTOM) / labels.len().max(1) as f64;
    for (k, label) in labels.iter().enumerate() {
        let y = TOP + row_h * (k as f64 + 0.5);
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, px(LEFT + 6.0), px(y + 4.0), escape(label));
    }
    for (p, panel) in panels.iter().enumerate() {
        let mine: Vec<&IntervalRow> = rows.iter().filter(|r| r.panel == *panel).collect();
        let lo = mine.iter().map(|r| r.estimate.lower.min(r.estimate.point)).fold(f64::INFINITY, f64::min);
        let hi = mine.iter().map(|r| r.estimate.upper.max(r.estimate.point)).fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
        let left = LEFT + 20.0 + width * p as f64;
        let span = width - 30.0;
        let xs = |v: f64| left + (v - lo) / (hi - lo) * span;
        let _ = writeln!(
            s,
            r#"<path class="panel" d="M{} {} H{}" stroke="black"/><text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            px(left),
            px(HEIGHT - BOTTOM),
            px(left + span),
            px(left + span / 2.0),
            px(HEIGHT - BOTTOM + 30.0),
            escape(panel)
        );
        for (v, anchor) in [(lo, "start"), (hi, "end")] {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="{anchor}">{}</text>"#,
                px(xs(v)),
                px(HEIGHT - BOTTOM + 14.0),
                num(v)
            );
        }
        for r in mine {
            let k = labels.iter().position(|l| *l == r.label).unwrap_or(0);
            let y = TOP + row_h * (k as f64 + 0.5);
            let e = r.estimate;
            let _ = writeln!(
                s,
                r#"<g class="interval" data-label="{}" data-panel="{}" data-point="{}" data-lower="{}" data-upper="{}"><path d="M{} {} H{}" stroke="{c}" stroke-width="2"/><circle cx="{}" cy="{}" r="3" fill="{c}"/></g>"#,
                escape(r.label),
                escape(panel),
                num(e.point),
                num(e.lower),
                num(e.upper),
                px(xs(e.lower)),
                px(y),
                px(xs(e.upper)),
                px(xs(e.point)),
                px(y),
                c = color(k)
            );
        }
    }
    s.push_str("</svg>\n");
    s
}
