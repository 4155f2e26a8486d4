//! Deterministic CSV/JSON/SVG writers. Floats are printed with 17
//! significant digits so identical runs produce byte-identical artifacts.

use crate::error::Result;
use std::fmt::Write as _;
use std::path::Path;

pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Csv { buf: header.join(",") + "\n" }
    }

    pub fn row(&mut self, cells: &[String]) {
        self.buf.push_str(&cells.join(","));
        self.buf.push('\n');
    }

    pub fn row_f64(&mut self, cells: &[f64]) {
        let cells: Vec<String> = cells.iter().map(|&x| fmt_f64(x)).collect();
        self.row(&cells);
    }

    pub fn comment(&mut self, text: &str) {
        let _ = writeln!(self.buf, "# {text}");
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, &self.buf)?;
        Ok(())
    }

    pub fn contents(&self) -> &str {
        &self.buf
    }
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("json serialization");
    std::fs::write(path, text + "\n")?;
    Ok(())
}

/// Minimal SVG polyline chart; enough for energy-versus-scale plots.
pub fn line_chart_svg(title: &str, xs: &[f64], series: &[(&str, Vec<f64>)]) -> String {
    let w = 640.0;
    let h = 420.0;
    let pad = 60.0;
    let (xmin, xmax) = bounds(xs);
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for (_, ys) in series {
        let (a, b) = bounds(ys);
        ymin = ymin.min(a);
        ymax = ymax.max(b);
    }
    if !(ymax > ymin) {
        ymax = ymin + 1.0;
    }
    if !(xmax > xmin) {
        return format!("<svg xmlns=\"http://www.w3.org/2000/svg\"><text>{title}: empty</text></svg>");
    }
    let px = |x: f64| pad + (x - xmin) / (xmax - xmin) * (w - 2.0 * pad);
    let py = |y: f64| h - pad - (y - ymin) / (ymax - ymin) * (h - 2.0 * pad);
    let colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
         <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" font-size=\"15\" text-anchor=\"middle\">{title}</text>\n",
        w / 2.0
    );
    let _ = writeln!(
        svg,
        "<line x1=\"{pad}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n\
         <line x1=\"{pad}\" y1=\"{pad}\" x2=\"{pad}\" y2=\"{}\" stroke=\"black\"/>",
        h - pad,
        w - pad,
        h - pad,
        h - pad
    );
    let _ = writeln!(
        svg,
        "<text x=\"{pad}\" y=\"{}\" font-size=\"11\">{}</text>\n\
         <text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{}</text>",
        h - pad + 16.0,
        fmt_short(xmin),
        w - pad,
        h - pad + 16.0,
        fmt_short(xmax)
    );
    let _ = writeln!(
        svg,
        "<text x=\"6\" y=\"{}\" font-size=\"11\">{}</text>\n\
         <text x=\"6\" y=\"{}\" font-size=\"11\">{}</text>",
        h - pad,
        fmt_short(ymin),
        pad + 4.0,
        fmt_short(ymax)
    );
    for (si, (name, ys)) in series.iter().enumerate() {
        let color = colors[si % colors.len()];
        let pts: Vec<String> = xs
            .iter()
            .zip(ys.iter())
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|(&x, &y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            pts.join(" ")
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"{color}\">{name}</text>",
            w - pad - 120.0,
            pad + 18.0 * si as f64
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &x in v {
        if x.is_finite() {
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    (lo, hi)
}

fn fmt_short(x: f64) -> String {
    format!("{x:.4e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_roundtrips() {
        for &x in &[1.0, -0.1, std::f64::consts::PI, 1e-300, 123456.789012345678] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(x, back, "format {s} must round-trip");
        }
        assert_eq!(fmt_f64(f64::NAN), "nan");
    }

    #[test]
    fn csv_layout() {
        let mut c = Csv::new(&["a", "b"]);
        c.row_f64(&[1.0, 2.0]);
        c.comment("trailer");
        let text = c.contents();
        assert!(text.starts_with("a,b\n"));
        assert!(text.contains("# trailer"));
    }

    #[test]
    fn svg_generates() {
        let xs = [1.0, 2.0, 3.0];
        let svg = line_chart_svg("t", &xs, &[("y", vec![1.0, 4.0, 9.0])]);
        assert!(svg.contains("<svg") && svg.contains("polyline"));
    }
}
