//! Minimal self-contained SVG renderings: line plots for traces and
//! heatmaps for 2-D grids.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD_L: f64 = 70.0;
const PAD_R: f64 = 20.0;
const PAD_T: f64 = 36.0;
const PAD_B: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-300 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn frame(out: &mut String, title: &str, xlabel: &str, ylabel: &str, x: (f64, f64), y: (f64, f64)) {
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
    let (x0, y0, x1, y1) = (PAD_L, H - PAD_B, W - PAD_R, PAD_T);
    let _ = writeln!(out, r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#, x1 - x0, y0 - y1);
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let (px, py) = (x0 + f * (x1 - x0), y0 - f * (y0 - y1));
        let _ = writeln!(out, r#"<text x="{px:.1}" y="{:.1}" text-anchor="middle">{:.4e}</text>"#, y0 + 16.0, x.0 + f * (x.1 - x.0));
        let _ = writeln!(out, r#"<text x="{:.1}" y="{py:.1}" text-anchor="end">{:.3e}</text>"#, x0 - 4.0, y.0 + f * (y.1 - y.0));
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, H - 10.0, escape(xlabel));
    let _ = writeln!(
        out,
        r#"<text x="14" y="{0}" text-anchor="middle" transform="rotate(-90 14 {0})">{1}</text>"#,
        (y0 + y1) / 2.0,
        escape(ylabel)
    );
}

/// Line plot of named series `(name, x, y)`.
pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, series: &[(&str, &[f64], &[f64])]) -> String {
    let xr = range(series.iter().flat_map(|s| s.1.iter().copied()));
    let yr = range(series.iter().flat_map(|s| s.2.iter().copied()));
    let mut out = String::new();
    frame(&mut out, title, xlabel, ylabel, xr, yr);
    let sx = |v: f64| PAD_L + (v - xr.0) / (xr.1 - xr.0) * (W - PAD_L - PAD_R);
    let sy = |v: f64| H - PAD_B - (v - yr.0) / (yr.1 - yr.0) * (H - PAD_B - PAD_T);
    for (k, (name, xs, ys)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<String> = xs.iter().zip(ys.iter()).filter(|(_, y)| y.is_finite()).map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y))).collect();
        let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        let _ = writeln!(out, r#"<text x="{}" y="{}" fill="{color}">{}</text>"#, PAD_L + 8.0, PAD_T + 16.0 * (k as f64 + 1.0), escape(name));
    }
    out.push_str("</svg>\n");
    out
}

fn viridis(f: f64) -> String {
    // Piecewise-linear approximation through five viridis stops.
    const STOPS: [(f64, f64, f64); 5] = [(68.0, 1.0, 84.0), (59.0, 82.0, 139.0), (33.0, 145.0, 140.0), (94.0, 201.0, 98.0), (253.0, 231.0, 37.0)];
    let f = f.clamp(0.0, 1.0) * 4.0;
    let i = (f.floor() as usize).min(3);
    let t = f - i as f64;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    let c = |p: f64, q: f64| (p + (q - p) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", c(a.0, b.0), c(a.1, b.1), c(a.2, b.2))
}

/// Heatmap of `values[i][j]` with rows along `y` and columns along `x`.
pub fn heatmap(title: &str, xlabel: &str, ylabel: &str, x: &[f64], y: &[f64], values: &[f64]) -> String {
    let xr = range(x.iter().copied());
    let yr = range(y.iter().copied());
    let zr = range(values.iter().copied());
    let mut out = String::new();
    frame(&mut out, title, xlabel, ylabel, xr, yr);
    let (nx, ny) = (x.len().max(1), y.len().max(1));
    let cw = (W - PAD_L - PAD_R) / nx as f64;
    let ch = (H - PAD_B - PAD_T) / ny as f64;
    for i in 0..y.len() {
        for j in 0..x.len() {
            let z = values[i * x.len() + j];
            let f = (z - zr.0) / (zr.1 - zr.0);
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                PAD_L + j as f64 * cw,
                H - PAD_B - (i as f64 + 1.0) * ch,
                cw + 0.3,
                ch + 0.3,
                viridis(f)
            );
        }
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">range {:.3e} .. {:.3e}</text>"#, W - PAD_R, PAD_T - 6.0, zr.0, zr.1);
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_well_formed_documents() {
        let s = line_plot("t", "x", "y", &[("a", &[0.0, 1.0], &[0.0, 2.0])]);
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert!(s.contains("polyline"));
        let h = heatmap("h", "x", "y", &[0.0, 1.0], &[0.0, 1.0, 2.0], &[0.0; 6]);
        assert_eq!(h.matches("<rect").count(), 2 + 6);
    }
}
