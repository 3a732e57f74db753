//! Minimal static SVG charts. Output depends only on the input numbers, so
//! identical data give byte-identical files.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Join the points with a polyline instead of drawing markers.
    pub connected: bool,
}

pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Straight line `y = intercept + slope * x` over the x range.
    pub line: Option<(f64, f64)>,
}

const PALETTE: &[&str] = &[
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi > lo {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - 2.0 * MARGIN)
    }

    fn axes(&self, out: &mut String, x_label: &str, y_label: &str) {
        let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
        let _ = writeln!(
            out,
            r#"<path d="M{l:.2} {t:.2} L{l:.2} {b:.2} L{r:.2} {b:.2}" fill="none" stroke="black"/>"#
        );
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let xv = self.x.0 + f * (self.x.1 - self.x.0);
            let yv = self.y.0 + f * (self.y.1 - self.y.0);
            let (xp, yp) = (self.px(xv), self.py(yv));
            let _ = writeln!(
                out,
                r#"<text x="{xp:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="11">{}</text>"#,
                b + 16.0,
                tick(xv)
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="11">{}</text>"#,
                l - 6.0,
                yp + 4.0,
                tick(yv)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="13">{}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 16.0,
            escape(x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="16" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 16 {:.2})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(y_label)
        );
    }
}

fn tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

pub fn render(chart: &Chart) -> String {
    let all = || chart.series.iter().flat_map(|s| s.points.iter());
    let frame = Frame {
        x: range(all().map(|p| p.0)),
        y: range(all().map(|p| p.1)),
    };
    let mut out = String::new();
    header(&mut out, &chart.title);
    frame.axes(&mut out, &chart.x_label, &chart.y_label);

    for (i, series) in chart.series.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let finite = series
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite());
        if series.connected {
            let coords: Vec<String> = finite
                .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
                .collect();
            let _ = writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#,
                coords.join(" ")
            );
        } else {
            for &(x, y) in finite {
                let _ = writeln!(
                    out,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{colour}"/>"#,
                    frame.px(x),
                    frame.py(y)
                );
            }
        }
        if chart.series.len() > 1 {
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" fill="{colour}">{}</text>"#,
                WIDTH - MARGIN - 80.0,
                MARGIN + 14.0 * i as f64,
                escape(&series.label)
            );
        }
    }

    if let Some((intercept, slope)) = chart.line {
        let (x0, x1) = frame.x;
        let _ = writeln!(
            out,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#555555" stroke-dasharray="6 4"/>"##,
            frame.px(x0),
            frame.py(intercept + slope * x0),
            frame.px(x1),
            frame.py(intercept + slope * x1)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Geometry of a horizontal-axis boxplot drawn vertically.
pub struct BoxGeometry {
    pub title: String,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

pub fn render_boxplot(b: &BoxGeometry) -> String {
    let values = [b.q1, b.median, b.q3, b.whisker_low, b.whisker_high];
    let frame = Frame {
        x: (0.0, 1.0),
        y: range(values.iter().copied().chain(b.outliers.iter().copied())),
    };
    let mut out = String::new();
    header(&mut out, &b.title);
    frame.axes(&mut out, "", "value");
    let (cx, half) = (frame.px(0.5), 60.0);
    let _ = writeln!(
        out,
        r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        cx - half,
        frame.py(b.q3),
        2.0 * half,
        frame.py(b.q1) - frame.py(b.q3)
    );
    let hline = |out: &mut String, y: f64, w: f64| {
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black"/>"#,
            cx - w,
            frame.py(y),
            cx + w,
            frame.py(y)
        );
    };
    hline(&mut out, b.median, half);
    hline(&mut out, b.whisker_low, half / 2.0);
    hline(&mut out, b.whisker_high, half / 2.0);
    for (from, to) in [(b.q3, b.whisker_high), (b.q1, b.whisker_low)] {
        let _ = writeln!(
            out,
            r#"<line x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}" stroke="black"/>"#,
            frame.py(from),
            frame.py(to)
        );
    }
    for &o in &b.outliers {
        let _ = writeln!(
            out,
            r##"<text x="{cx:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="14" fill="#d62728">*</text>"##,
            frame.py(o) + 5.0
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_is_deterministic_and_well_formed() {
        let chart = Chart {
            title: "a < b".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            series: vec![Series {
                label: "s".into(),
                points: vec![(0.0, 1.0), (1.0, 3.0), (2.0, f64::NAN)],
                connected: false,
            }],
            line: Some((1.0, 2.0)),
        };
        let a = render(&chart);
        assert_eq!(a, render(&chart));
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert_eq!(a.matches("<circle").count(), 2);
        assert!(a.contains("a &lt; b"));
    }

    #[test]
    fn ticks_are_trimmed() {
        assert_eq!(tick(1.5), "1.5");
        assert_eq!(tick(2.0), "2");
        assert_eq!(tick(-0.0001), "0");
    }
}
