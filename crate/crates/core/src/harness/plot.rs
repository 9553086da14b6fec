//! Minimal self-contained SVG line plots.

use std::fmt::Write as _;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

#[derive(Debug, Clone)]
pub struct Axis {
    pub label: String,
    pub log: bool,
}

impl Axis {
    pub fn linear(label: &str) -> Self {
        Axis {
            label: label.into(),
            log: false,
        }
    }

    pub fn log(label: &str) -> Self {
        Axis {
            label: label.into(),
            log: true,
        }
    }

    fn map(&self, v: f64) -> Option<f64> {
        if self.log {
            (v > 0.0).then(|| v.log10())
        } else {
            v.is_finite().then_some(v)
        }
    }
}

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    /// x positions with no value, drawn as crosses along the top edge.
    pub missing: Vec<f64>,
}

impl Series {
    pub fn line(name: &str, points: Vec<(f64, f64)>) -> Self {
        Series {
            name: name.into(),
            points,
            missing: Vec::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Plot {
    pub title: String,
    pub x: Axis,
    pub y: Axis,
    pub series: Vec<Series>,
    /// Horizontal dashed line.
    pub threshold: Option<f64>,
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-9 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Tick positions in mapped coordinates.
fn ticks(lo: f64, hi: f64, log: bool) -> Vec<f64> {
    if log {
        return (lo.floor() as i64..=hi.ceil() as i64).map(|k| k as f64).collect();
    }
    let raw = (hi - lo) / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).floor() as i64;
    let last = (hi / step).ceil() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn tick_label(v: f64, log: bool) -> String {
    if log {
        format!("1e{}", v.round() as i64)
    } else if (v - v.round()).abs() < 1e-9 {
        format!("{}", v.round() as i64)
    } else {
        format!("{v:.2}")
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Plot {
    pub fn new(title: &str, x: Axis, y: Axis) -> Self {
        Plot {
            title: title.into(),
            x,
            y,
            series: Vec::new(),
            threshold: None,
        }
    }

    pub fn render(&self) -> String {
        let pts = || self.series.iter().flat_map(|s| s.points.iter());
        let xs = pts()
            .filter_map(|p| self.x.map(p.0))
            .chain(self.series.iter().flat_map(|s| s.missing.iter().filter_map(|&m| self.x.map(m))));
        let ys = pts()
            .filter_map(|p| self.y.map(p.1))
            .chain(self.threshold.and_then(|t| self.y.map(t)));
        let (x0, x1) = range(xs);
        let (y0, y1) = range(ys);
        let xt = ticks(x0, x1, self.x.log);
        let yt = ticks(y0, y1, self.y.log);
        let (x0, x1) = (xt[0].min(x0), xt[xt.len() - 1].max(x1));
        let (y0, y1) = (yt[0].min(y0), yt[yt.len() - 1].max(y1));
        let pw = W - LEFT - RIGHT;
        let ph = H - TOP - BOTTOM;
        let px = |v: f64| LEFT + (v - x0) / (x1 - x0) * pw;
        let py = |v: f64| TOP + (y1 - v) / (y1 - y0) * ph;

        let mut s = String::new();
        writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
        )
        .unwrap();
        writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
        writeln!(
            s,
            r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            LEFT + pw / 2.0,
            esc(&self.title)
        )
        .unwrap();
        for &t in &xt {
            let x = px(t);
            writeln!(
                s,
                r##"<line x1="{x:.1}" y1="{TOP:.1}" x2="{x:.1}" y2="{:.1}" stroke="#e0e0e0"/><text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"##,
                TOP + ph,
                TOP + ph + 16.0,
                tick_label(t, self.x.log)
            )
            .unwrap();
        }
        for &t in &yt {
            let y = py(t);
            writeln!(
                s,
                r##"<line x1="{LEFT:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#e0e0e0"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"##,
                LEFT + pw,
                LEFT - 6.0,
                y + 4.0,
                tick_label(t, self.y.log)
            )
            .unwrap();
        }
        writeln!(
            s,
            r#"<rect x="{LEFT:.1}" y="{TOP:.1}" width="{pw:.1}" height="{ph:.1}" fill="none" stroke="black"/>"#
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            H - 12.0,
            esc(&self.x.label)
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            esc(&self.y.label)
        )
        .unwrap();
        if let Some(y) = self.threshold.and_then(|t| self.y.map(t)) {
            writeln!(
                s,
                r#"<line x1="{LEFT:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="gray" stroke-dasharray="6 4"/>"#,
                py(y),
                LEFT + pw,
                py(y)
            )
            .unwrap();
        }
        for (i, series) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let mapped: Vec<(f64, f64)> = series
                .points
                .iter()
                .filter_map(|&(x, y)| Some((px(self.x.map(x)?), py(self.y.map(y)?))))
                .collect();
            if mapped.len() > 1 {
                let path: Vec<String> = mapped.iter().map(|(x, y)| format!("{x:.1},{y:.1}")).collect();
                writeln!(
                    s,
                    r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                    path.join(" ")
                )
                .unwrap();
            }
            for (x, y) in &mapped {
                writeln!(s, r#"<circle cx="{x:.1}" cy="{y:.1}" r="3" fill="{color}"/>"#).unwrap();
            }
            for x in series.missing.iter().filter_map(|&m| self.x.map(m)) {
                let (cx, cy) = (px(x), TOP + 8.0);
                writeln!(
                    s,
                    r#"<path d="M{:.1},{:.1}L{:.1},{:.1}M{:.1},{:.1}L{:.1},{:.1}" stroke="{color}" stroke-width="2"/>"#,
                    cx - 4.0,
                    cy - 4.0,
                    cx + 4.0,
                    cy + 4.0,
                    cx - 4.0,
                    cy + 4.0,
                    cx + 4.0,
                    cy - 4.0
                )
                .unwrap();
            }
            let ly = TOP + 14.0 + 18.0 * i as f64;
            let lx = W - RIGHT + 12.0;
            writeln!(
                s,
                r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text>"#,
                lx + 20.0,
                lx + 26.0,
                ly + 4.0,
                esc(&series.name)
            )
            .unwrap();
        }
        if self.series.iter().any(|s| !s.missing.is_empty()) {
            writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}">x: threshold not reached</text>"#,
                W - RIGHT + 12.0,
                H - BOTTOM
            )
            .unwrap();
        }
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_series_threshold_and_missing_marks() {
        let mut p = Plot::new("t <1>", Axis::linear("snr"), Axis::log("ber"));
        p.series.push(Series::line("a", vec![(1.0, 1e-2), (2.0, 1e-4), (3.0, 0.0)]));
        let mut b = Series::line("b", vec![(1.0, 1e-1)]);
        b.missing = vec![4.0];
        p.series.push(b);
        p.threshold = Some(2.24e-4);
        let svg = p.render();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg.contains("stroke-dasharray"));
        assert!(svg.contains("threshold not reached"));
        assert!(svg.contains("t &lt;1&gt;"));
        assert_eq!(svg, p.render());
    }

    #[test]
    fn empty_plot_still_renders() {
        let svg = Plot::new("empty", Axis::linear("x"), Axis::linear("y")).render();
        assert!(svg.contains("</svg>"));
    }

    #[test]
    fn linear_ticks_cover_range() {
        let t = ticks(0.3, 9.7, false);
        assert!(t[0] <= 0.3 && *t.last().unwrap() >= 9.7);
        assert_eq!(ticks(-5.2, -1.1, true), vec![-6.0, -5.0, -4.0, -3.0, -2.0, -1.0]);
    }
}
