//! Minimal static SVG renderers for decay curves and heatmaps.

use std::fmt::Write;

use super::Heatmap;

const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD: f64 = 56.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

fn header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        W / 2.0,
        escape(title)
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Axis {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite() && (!log || *v > 0.0)) {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            hi = lo + 1.0;
        }
        Axis { lo, hi, log }
    }

    fn frac(&self, v: f64) -> Option<f64> {
        if self.log && !(v > 0.0) {
            return None;
        }
        let v = if self.log { v.log10() } else { v };
        Some((v - self.lo) / (self.hi - self.lo))
    }

    fn label(&self, f: f64) -> String {
        let v = self.lo + f * (self.hi - self.lo);
        if self.log {
            format!("1e{v:.1}")
        } else {
            format!("{v:.3}")
        }
    }
}

/// Curves `(label, points)` on shared axes, optionally logarithmic.
pub fn line_plot(title: &str, series: &[(&str, &[(f64, f64)])], log_x: bool, log_y: bool) -> String {
    let xa = Axis::fit(series.iter().flat_map(|(_, p)| p.iter().map(|q| q.0)), log_x);
    let ya = Axis::fit(series.iter().flat_map(|(_, p)| p.iter().map(|q| q.1)), log_y);
    let px = |f: f64| PAD + f * (W - 2.0 * PAD);
    let py = |f: f64| H - PAD - f * (H - 2.0 * PAD);
    let mut out = header(title);
    let _ = writeln!(
        out,
        "<rect x=\"{PAD}\" y=\"{PAD}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444\"/>",
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
            px(f),
            H - PAD + 16.0,
            xa.label(f)
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
            PAD - 4.0,
            py(f) + 4.0,
            ya.label(f)
        );
    }
    for (k, (label, pts)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let path: Vec<String> =
            pts.iter().filter_map(|&(x, y)| Some(format!("{:.2},{:.2}", px(xa.frac(x)?), py(ya.frac(y)?)))).collect();
        let _ = writeln!(
            out,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
            path.join(" ")
        );
        let ly = PAD + 16.0 + 16.0 * k as f64;
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{ly:.2}\" fill=\"{color}\" text-anchor=\"end\">{}</text>",
            W - PAD - 8.0,
            escape(label)
        );
    }
    out += "</svg>\n";
    out
}

fn color(f: f64) -> String {
    // blue - white - red, symmetric around zero
    let f = f.clamp(-1.0, 1.0);
    let (r, g, b) = if f >= 0.0 {
        (255.0, 255.0 * (1.0 - f), 255.0 * (1.0 - f))
    } else {
        (255.0 * (1.0 + f), 255.0 * (1.0 + f), 255.0)
    };
    format!("#{:02x}{:02x}{:02x}", r.round() as u8, g.round() as u8, b.round() as u8)
}

/// `u(t, x)` with `t` along the horizontal axis and `x` vertical.
pub fn heatmap(title: &str, h: &Heatmap) -> String {
    let scale =
        h.frames.iter().flat_map(|f| f.values.iter()).fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let nt = h.frames.len().max(1) as f64;
    let nx = h.x.len().max(1) as f64;
    let cw = (W - 2.0 * PAD) / nt;
    let ch = (H - 2.0 * PAD) / nx;
    let mut out = header(title);
    for (i, f) in h.frames.iter().enumerate() {
        for (j, v) in f.values.iter().enumerate() {
            let _ = writeln!(
                out,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>",
                PAD + i as f64 * cw,
                H - PAD - (j + 1) as f64 * ch,
                cw + 0.05,
                ch + 0.05,
                color(v / scale)
            );
        }
    }
    let (t0, t1) = (h.frames.first().map_or(0.0, |f| f.t), h.frames.last().map_or(0.0, |f| f.t));
    let _ = writeln!(out, "<text x=\"{PAD}\" y=\"{}\">t = {t0:.3}</text>", H - PAD + 16.0);
    let _ = writeln!(out, "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">t = {t1:.3}</text>", W - PAD, H - PAD + 16.0);
    let _ = writeln!(out, "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">x = pi</text>", PAD - 4.0, PAD + 10.0);
    let _ = writeln!(out, "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">x = 0</text>", PAD - 4.0, H - PAD);
    out += "</svg>\n";
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_plot_skips_nonpositive() {
        let pts = [(1.0, 1.0), (10.0, 0.0), (100.0, 0.01)];
        let s = line_plot("a < b", &[("curve", &pts)], true, true);
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert!(s.contains("a &lt; b"));
        let poly = s.lines().find(|l| l.starts_with("<polyline")).unwrap();
        assert_eq!(poly.matches(',').count(), 2);
    }

    #[test]
    fn colour_scale() {
        assert_eq!(color(0.0), "#ffffff");
        assert_eq!(color(1.0), "#ff0000");
        assert_eq!(color(-1.0), "#0000ff");
    }
}
