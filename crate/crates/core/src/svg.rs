//! Hand-written SVG scatter plots with byte-stable output.

use std::fmt::Write;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 70.0;
const PADDING: f64 = 0.05;
const TICKS: usize = 5;

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Data range widened by 5% on each side. A zero-width range is widened to
/// `value ± max(5% of |value|, 0.5)`.
fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    let span = hi - lo;
    if span == 0.0 {
        let pad = (lo.abs() * PADDING).max(0.5);
        return (lo - pad, hi + pad);
    }
    (lo - span * PADDING, hi + span * PADDING)
}

struct Axis {
    lo: f64,
    hi: f64,
    start: f64,
    end: f64,
}

impl Axis {
    fn map(&self, v: f64) -> f64 {
        self.start + (v - self.lo) / (self.hi - self.lo) * (self.end - self.start)
    }
}

/// Scatter plot of `(x, y)` points titled `"<x_label> vs <y_label> for <series>"`.
///
/// `comments` are embedded as an XML comment so plots made with different
/// settings never compare equal.
pub fn render_scatter(
    points: &[(f64, f64)],
    x_label: &str,
    y_label: &str,
    series: &str,
    comments: &[(String, String)],
) -> String {
    let (x_lo, x_hi) = padded_range(points.iter().map(|p| p.0));
    let (y_lo, y_hi) = padded_range(points.iter().map(|p| p.1));
    let x = Axis {
        lo: x_lo,
        hi: x_hi,
        start: MARGIN_LEFT,
        end: WIDTH - MARGIN_RIGHT,
    };
    let y = Axis {
        lo: y_lo,
        hi: y_hi,
        start: HEIGHT - MARGIN_BOTTOM,
        end: MARGIN_TOP,
    };
    let title = format!("{x_label} vs {y_label} for {series}");

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}">"#
    )
    .unwrap();
    if !comments.is_empty() {
        let body: Vec<String> = comments.iter().map(|(k, v)| format!("{k}={v}")).collect();
        writeln!(
            out,
            "<!-- {} -->",
            escape(&body.join("; ")).replace("--", "- -")
        )
        .unwrap();
    }
    writeln!(
        out,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="{:.2}" y="30" text-anchor="middle" font-family="sans-serif" font-size="18">{}</text>"#,
        WIDTH / 2.0,
        escape(&title)
    )
    .unwrap();

    // axes
    writeln!(
        out,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black"/>"#,
        x.start, y.start, x.end, y.start
    )
    .unwrap();
    writeln!(
        out,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black"/>"#,
        x.start, y.start, x.start, y.end
    )
    .unwrap();

    for i in 0..TICKS {
        let f = i as f64 / (TICKS - 1) as f64;
        let xv = x.lo + f * (x.hi - x.lo);
        let px = x.map(xv);
        writeln!(
            out,
            r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/>"#,
            y.start,
            y.start + 5.0
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="12">{xv:.3}</text>"#,
            y.start + 20.0
        )
        .unwrap();
        let yv = y.lo + f * (y.hi - y.lo);
        let py = y.map(yv);
        writeln!(
            out,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="black"/>"#,
            x.start - 5.0,
            x.start
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="12">{yv:.3}</text>"#,
            x.start - 8.0,
            py + 4.0
        )
        .unwrap();
    }

    writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
        (x.start + x.end) / 2.0,
        HEIGHT - 20.0,
        escape(x_label)
    )
    .unwrap();
    let mid_y = (y.start + y.end) / 2.0;
    writeln!(
        out,
        r#"<text x="20" y="{mid_y:.2}" text-anchor="middle" font-family="sans-serif" font-size="14" transform="rotate(-90 20 {mid_y:.2})">{}</text>"#,
        escape(y_label)
    )
    .unwrap();

    for &(px, py) in points {
        writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="steelblue"/>"#,
            x.map(px),
            y.map(py)
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}
