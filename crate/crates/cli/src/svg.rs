//! Minimal SVG charts: polylines with optional error bars, cumulative
//! stacked areas and heatmaps, with axes and a legend.

use std::fmt::Write;

const W: f64 = 720.0;
const H: f64 = 460.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Line,
    /// Markers with `±err` bars.
    Markers,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    /// Half-widths of the error bars, one per point.
    pub err: Option<Vec<f64>>,
    pub style: Style,
}

impl Series {
    pub fn line(name: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            name: name.into(),
            points,
            err: None,
            style: Style::Line,
        }
    }

    pub fn markers(name: impl Into<String>, points: Vec<(f64, f64)>, err: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            points,
            err: Some(err),
            style: Style::Markers,
        }
    }
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Self {
        Self {
            x: padded(range(xs), 0.0),
            y: padded(range(ys), 0.05),
        }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (H - TOP - BOTTOM)
    }
}

fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    vals.filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn padded((lo, hi): (f64, f64), frac: f64) -> (f64, f64) {
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 * lo.abs().max(1.0) {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = (hi - lo) * frac;
    (lo - pad, hi + pad)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn header(out: &mut String, title: &str) {
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = write!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = write!(
        out,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        (LEFT + W - RIGHT) / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, f: &Frame, xlabel: &str, ylabel: &str) {
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, H - BOTTOM, TOP);
    let _ = write!(
        out,
        r#"<path d="M{x0},{y1} L{x0},{y0} L{x1},{y0}" fill="none" stroke="black"/>"#
    );
    for k in 0..=5 {
        let t = k as f64 / 5.0;
        let xv = f.x.0 + t * (f.x.1 - f.x.0);
        let px = f.px(xv);
        let _ = write!(
            out,
            r#"<line x1="{px}" y1="{y0}" x2="{px}" y2="{}" stroke="black"/><text x="{px}" y="{}" text-anchor="middle">{}</text>"#,
            y0 + 5.0,
            y0 + 18.0,
            tick_label(xv)
        );
        let yv = f.y.0 + t * (f.y.1 - f.y.0);
        let py = f.py(yv);
        let _ = write!(
            out,
            r#"<line x1="{}" y1="{py}" x2="{x0}" y2="{py}" stroke="black"/><text x="{}" y="{}" text-anchor="end">{}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            py + 4.0,
            tick_label(yv)
        );
    }
    let _ = write!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        H - 15.0,
        escape(xlabel)
    );
    let _ = write!(
        out,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(ylabel)
    );
}

fn legend(out: &mut String, names: &[(String, &str)]) {
    for (k, (name, color)) in names.iter().enumerate() {
        let y = TOP + 10.0 + 18.0 * k as f64;
        let x = W - RIGHT + 15.0;
        let _ = write!(
            out,
            r#"<rect x="{x}" y="{}" width="12" height="12" fill="{color}"/><text x="{}" y="{}">{}</text>"#,
            y - 10.0,
            x + 18.0,
            y,
            escape(name)
        );
    }
}

pub fn line_chart(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let xs = series.iter().flat_map(|s| s.points.iter().map(|p| p.0));
    let ys = series.iter().flat_map(|s| {
        s.points.iter().enumerate().flat_map(move |(i, p)| {
            let e = s.err.as_ref().map_or(0.0, |e| e[i]);
            [p.1 - e, p.1 + e]
        })
    });
    let f = Frame::new(xs.clone(), ys.clone());
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, &f, xlabel, ylabel);
    let mut names = Vec::new();
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        names.push((s.name.clone(), color));
        let pts: Vec<(f64, f64)> = s.points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()).copied().collect();
        match s.style {
            Style::Line => {
                let d: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", f.px(x), f.py(y))).collect();
                let _ = write!(
                    out,
                    r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                    d.join(" ")
                );
            }
            Style::Markers => {
                for (i, &(x, y)) in s.points.iter().enumerate() {
                    if !(x.is_finite() && y.is_finite()) {
                        continue;
                    }
                    let e = s.err.as_ref().map_or(0.0, |e| e[i]);
                    let (px, py) = (f.px(x), f.py(y));
                    if e > 0.0 {
                        let _ = write!(
                            out,
                            r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="{color}"/>"#,
                            f.py(y - e),
                            f.py(y + e)
                        );
                    }
                    let _ = write!(out, r#"<circle cx="{px:.2}" cy="{py:.2}" r="3" fill="{color}"/>"#);
                }
            }
        }
    }
    legend(&mut out, &names);
    out.push_str("</svg>\n");
    out
}

/// Cumulative view: layer `k` fills the band between the sums of layers
/// `0..k` and `0..=k`.
pub fn stacked_chart(title: &str, xlabel: &str, ylabel: &str, x: &[f64], layers: &[(String, Vec<f64>)]) -> String {
    let mut tops = vec![vec![0.0; x.len()]];
    for (_, vals) in layers {
        let prev = tops.last().unwrap();
        tops.push(prev.iter().zip(vals).map(|(a, b)| a + b).collect());
    }
    let f = Frame::new(x.iter().copied(), tops.iter().flatten().copied());
    let mut out = String::new();
    header(&mut out, title);
    let mut names = Vec::new();
    for (k, (name, _)) in layers.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        names.push((name.clone(), color));
        let upper = x.iter().zip(&tops[k + 1]).map(|(&a, &b)| format!("{:.2},{:.2}", f.px(a), f.py(b)));
        let lower = x.iter().zip(&tops[k]).rev().map(|(&a, &b)| format!("{:.2},{:.2}", f.px(a), f.py(b)));
        let pts: Vec<String> = upper.chain(lower).collect();
        let _ = write!(
            out,
            r#"<polygon points="{}" fill="{color}" fill-opacity="0.75" stroke="none"/>"#,
            pts.join(" ")
        );
    }
    axes(&mut out, &f, xlabel, ylabel);
    legend(&mut out, &names);
    out.push_str("</svg>\n");
    out
}

fn viridis_like(t: f64) -> String {
    // Piecewise-linear ramp through dark blue, teal and yellow.
    let stops = [(68.0, 1.0, 84.0), (33.0, 145.0, 140.0), (253.0, 231.0, 37.0)];
    let t = t.clamp(0.0, 1.0) * 2.0;
    let (a, b, u) = if t < 1.0 { (stops[0], stops[1], t) } else { (stops[1], stops[2], t - 1.0) };
    let mix = |p: f64, q: f64| (p + (q - p) * u).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

/// `z[i][j]` is the value at `(xs[j], ys[i])`.
pub fn heatmap(title: &str, xlabel: &str, ylabel: &str, xs: &[f64], ys: &[f64], z: &[Vec<f64>]) -> String {
    let f = Frame::new(xs.iter().copied(), ys.iter().copied());
    let f = Frame { y: range(ys.iter().copied()), ..f };
    let (lo, hi) = range(z.iter().flatten().copied());
    let span = if hi > lo { hi - lo } else { 1.0 };
    let cw = (W - LEFT - RIGHT) / xs.len().max(1) as f64;
    let ch = (H - TOP - BOTTOM) / ys.len().max(1) as f64;
    let mut out = String::new();
    header(&mut out, title);
    for (i, row) in z.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let color = if v.is_finite() { viridis_like((v - lo) / span) } else { "#ffffff".into() };
            let _ = write!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{color}"/>"#,
                LEFT + j as f64 * cw,
                H - BOTTOM - (i + 1) as f64 * ch,
                cw + 0.5,
                ch + 0.5
            );
        }
    }
    axes(&mut out, &f, xlabel, ylabel);
    legend(
        &mut out,
        &[
            (format!("min {}", tick_label(lo)), "#440154"),
            (format!("max {}", tick_label(hi)), "#fde725"),
        ],
    );
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_chart_has_one_polyline_per_line_series() {
        let s = vec![
            Series::line("a & b", vec![(0.0, 1.0), (1.0, 2.0)]),
            Series::line("c", vec![(0.0, 0.0), (1.0, f64::NAN)]),
            Series::markers("m", vec![(0.5, 1.5)], vec![0.1]),
        ];
        let svg = line_chart("t", "x", "y", &s);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(svg.contains("a &amp; b"));
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn stacked_layers_are_polygons() {
        let svg = stacked_chart("t", "x", "y", &[0.0, 1.0], &[("a".into(), vec![1.0, 1.0]), ("b".into(), vec![0.5, 2.0])]);
        assert_eq!(svg.matches("<polygon").count(), 2);
    }

    #[test]
    fn heatmap_cells() {
        let svg = heatmap("t", "x", "y", &[0.0, 1.0, 2.0], &[0.0, 1.0], &[vec![0.0, 1.0, 2.0], vec![3.0, 4.0, 5.0]]);
        // 6 cells, background and 2 legend swatches
        assert_eq!(svg.matches("<rect").count(), 9);
    }

    #[test]
    fn flat_and_empty_ranges() {
        assert_eq!(padded((1.0, 1.0), 0.05), (0.5, 1.5));
        assert_eq!(padded(range(std::iter::empty()), 0.05), (0.0, 1.0));
        assert_eq!(tick_label(-0.0001), "0");
        assert_eq!(tick_label(2.5), "2.5");
    }
}
