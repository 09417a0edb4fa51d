//! Minimal SVG plots drawn from the same rows that go into the CSVs.

use std::fmt::Write as _;

const W: f64 = 480.0;
const H: f64 = 360.0;
const MARGIN: f64 = 56.0;

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
    log_y: bool,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / span(self.x) * (W - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        let y = if self.log_y { y.max(1e-300).log10() } else { y };
        H - MARGIN - (y - self.y.0) / span(self.y) * (H - 2.0 * MARGIN)
    }
}

fn span((lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        hi - lo
    } else {
        1.0
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str, x_label: &str, y_label: &str) {
    writeln!(
        out,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"##
    )
    .unwrap();
    writeln!(out, r##"<rect width="{W}" height="{H}" fill="white"/>"##).unwrap();
    writeln!(out, r##"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"##, W / 2.0, escape(title)).unwrap();
    writeln!(out, r##"<text x="{}" y="{}" text-anchor="middle">{}</text>"##, W / 2.0, H - 12.0, escape(x_label)).unwrap();
    writeln!(
        out,
        r##"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"##,
        H / 2.0,
        escape(y_label)
    )
    .unwrap();
}

fn axes(out: &mut String, f: &Frame) {
    let (x0, x1, y0, y1) = (MARGIN, W - MARGIN, H - MARGIN, MARGIN);
    writeln!(out, r##"<path d="M{x0} {y1} V{y0} H{x1}" fill="none" stroke="black"/>"##).unwrap();
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = f.x.0 + t * span(f.x);
        let yv = f.y.0 + t * span(f.y);
        let px = x0 + t * (x1 - x0);
        let py = y0 - t * (y0 - y1);
        writeln!(out, r##"<text x="{px:.1}" y="{}" text-anchor="middle">{}</text>"##, y0 + 16.0, tick(xv)).unwrap();
        let label = if f.log_y { format!("1e{yv:.1}") } else { tick(yv) };
        writeln!(out, r##"<text x="{}" y="{:.1}" text-anchor="end">{label}</text>"##, x0 - 4.0, py + 4.0).unwrap();
    }
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.1e}")
    } else {
        format!("{:.3}", v).trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Polyline through `(x, y)`; `log_y` plots `log10 y`.
pub fn line_plot(title: &str, x_label: &str, y_label: &str, points: &[(f64, f64)], log_y: bool) -> String {
    let ys = points.iter().map(|p| if log_y { p.1.max(1e-300).log10() } else { p.1 });
    let f = Frame { x: bounds(points.iter().map(|p| p.0)), y: bounds(ys), log_y };
    let mut out = String::new();
    header(&mut out, title, x_label, y_label);
    axes(&mut out, &f);
    let path: Vec<String> = points
        .iter()
        .filter(|p| p.0.is_finite() && p.1.is_finite())
        .map(|&(x, y)| format!("{:.2},{:.2}", f.px(x), f.py(y)))
        .collect();
    writeln!(out, r##"<polyline points="{}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>"##, path.join(" ")).unwrap();
    out.push_str("</svg>\n");
    out
}

/// ROC curve on the unit square with the chance diagonal.
pub fn roc_plot(title: &str, points: &[(f64, f64)]) -> String {
    let f = Frame { x: (0.0, 1.0), y: (0.0, 1.0), log_y: false };
    let mut out = String::new();
    header(&mut out, title, "false positive rate", "true positive rate");
    axes(&mut out, &f);
    writeln!(
        out,
        r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="gray" stroke-dasharray="4 4"/>"##,
        f.px(0.0),
        f.py(0.0),
        f.px(1.0),
        f.py(1.0)
    )
    .unwrap();
    let path: Vec<String> = points.iter().map(|&(x, y)| format!("{:.2},{:.2}", f.px(x), f.py(y))).collect();
    writeln!(out, r##"<polyline points="{}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>"##, path.join(" ")).unwrap();
    out.push_str("</svg>\n");
    out
}

/// Two-class scatter: class 1 blue stars, class 0 red crosses.
pub fn scatter_plot(title: &str, points: &[(f64, f64, u8)], x_range: (f64, f64), y_range: (f64, f64)) -> String {
    let f = Frame { x: x_range, y: y_range, log_y: false };
    let mut out = String::new();
    header(&mut out, title, "θ₁", "θ₂");
    axes(&mut out, &f);
    for &(x, y, class) in points {
        let (px, py) = (f.px(x), f.py(y));
        if class == 1 {
            writeln!(out, r##"<text x="{px:.1}" y="{:.1}" text-anchor="middle" fill="#1f4fd8" font-size="9">*</text>"##, py + 3.0)
                .unwrap();
        } else {
            writeln!(
                out,
                r##"<path d="M{:.1} {:.1} l4 4 m0 -4 l-4 4" stroke="#d62728"/>"##,
                px - 2.0,
                py - 2.0
            )
            .unwrap();
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plots_are_closed_documents() {
        let line = line_plot("loss", "epoch", "loss", &[(0.0, 1.0), (1.0, 0.1), (2.0, 0.01)], true);
        let roc = roc_plot("roc", &[(0.0, 0.0), (0.2, 0.9), (1.0, 1.0)]);
        let sc = scatter_plot("data", &[(0.1, 0.2, 1), (1.0, 2.0, 0)], (0.0, 3.2), (0.0, 3.2));
        for svg in [&line, &roc, &sc] {
            assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        }
        assert!(sc.contains("fill=\"#1f4fd8\"") && sc.contains("stroke=\"#d62728\""));
        assert_eq!(line.matches("<polyline").count(), 1);
    }

    #[test]
    fn degenerate_ranges_do_not_produce_nan() {
        let svg = line_plot("flat", "x", "y", &[(0.0, 2.0), (0.0, 2.0)], false);
        assert!(!svg.contains("NaN"));
        assert_eq!(escape("a<b&c"), "a&lt;b&amp;c");
    }
}
