//! SVG rendering of planar upper sets, clipped to a viewport around their vertices.

use crate::lattice::UpperSet;
use crate::rat::to_f64;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlotError {
    #[error("plots need a two-dimensional workspace, got dimension {0}")]
    DimensionUnsupported(usize),
}

const SIZE: f64 = 480.0;
const LEGEND: f64 = 180.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

type Pt = (f64, f64);

/// Sutherland-Hodgman against `n·p <= b`.
fn clip(poly: &[Pt], n: Pt, b: f64) -> Vec<Pt> {
    let inside = |p: &Pt| n.0 * p.0 + n.1 * p.1 <= b + 1e-12;
    let mut out = Vec::new();
    for i in 0..poly.len() {
        let cur = poly[i];
        let prev = poly[(i + poly.len() - 1) % poly.len()];
        let (ci, pi) = (inside(&cur), inside(&prev));
        if ci != pi {
            let fp = n.0 * prev.0 + n.1 * prev.1 - b;
            let fc = n.0 * cur.0 + n.1 * cur.1 - b;
            let s = fp / (fp - fc);
            out.push((prev.0 + s * (cur.0 - prev.0), prev.1 + s * (cur.1 - prev.1)));
        }
        if ci {
            out.push(cur);
        }
    }
    out
}

fn viewport(sets: &[(String, UpperSet)]) -> (f64, f64, f64) {
    let mut xs = vec![0.0];
    let mut ys = vec![0.0];
    for (_, s) in sets {
        for v in s.vertices() {
            xs.push(to_f64(&v.0[0]));
            ys.push(to_f64(&v.0[1]));
        }
    }
    let fold = |v: &[f64], f: fn(f64, f64) -> f64| v.iter().copied().fold(v[0], f);
    let (x0, x1) = (fold(&xs, f64::min).floor() - 1.0, fold(&xs, f64::max).ceil() + 1.0);
    let (y0, y1) = (fold(&ys, f64::min).floor() - 1.0, fold(&ys, f64::max).ceil() + 1.0);
    let span = (x1 - x0).max(y1 - y0).max(4.0);
    let cx = ((x0 + x1) / 2.0).round();
    let cy = ((y0 + y1) / 2.0).round();
    (cx - span / 2.0, cy - span / 2.0, span)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Deterministic SVG 1.1 document; empty sets only appear in the legend.
pub fn plot_svg(dim: usize, sets: &[(String, UpperSet)]) -> Result<String, PlotError> {
    if dim != 2 {
        return Err(PlotError::DimensionUnsupported(dim));
    }
    let (x0, y0, span) = viewport(sets);
    let sx = |x: f64| (x - x0) / span * SIZE;
    let sy = |y: f64| SIZE - (y - y0) / span * SIZE;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        SIZE + LEGEND,
        SIZE,
        SIZE + LEGEND,
        SIZE
    );
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="white" stroke="black"/>"#);
    if (y0..=y0 + span).contains(&0.0) {
        let _ = writeln!(svg, r##"<line x1="0" y1="{:.2}" x2="{SIZE}" y2="{:.2}" stroke="#999" stroke-dasharray="4 4"/>"##, sy(0.0), sy(0.0));
    }
    if (x0..=x0 + span).contains(&0.0) {
        let _ = writeln!(svg, r##"<line x1="{:.2}" y1="0" x2="{:.2}" y2="{SIZE}" stroke="#999" stroke-dasharray="4 4"/>"##, sx(0.0), sx(0.0));
    }
    let _ = writeln!(
        svg,
        r#"<text x="4" y="{}" font-size="11" font-family="monospace">[{}, {}] x [{}, {}]</text>"#,
        SIZE - 4.0,
        x0,
        x0 + span,
        y0,
        y0 + span
    );
    for (i, (name, s)) in sets.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if !s.is_empty() {
            let mut poly: Vec<Pt> = vec![(x0, y0), (x0 + span, y0), (x0 + span, y0 + span), (x0, y0 + span)];
            for (n, b) in s.constraints() {
                poly = clip(&poly, (to_f64(&n.0[0]), to_f64(&n.0[1])), to_f64(&b));
            }
            if poly.len() >= 3 {
                let pts: Vec<String> = poly.iter().map(|p| format!("{:.2},{:.2}", sx(p.0), sy(p.1))).collect();
                let _ = writeln!(
                    svg,
                    r#"<polygon points="{}" fill="{color}" fill-opacity="0.3" stroke="{color}" stroke-width="1.5"/>"#,
                    pts.join(" ")
                );
            } else if poly.len() == 2 {
                let _ = writeln!(
                    svg,
                    r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="2"/>"#,
                    sx(poly[0].0),
                    sy(poly[0].1),
                    sx(poly[1].0),
                    sy(poly[1].1)
                );
            }
        }
        let ly = 20.0 + 22.0 * i as f64;
        let label = if s.is_empty() { format!("{name} (empty)") } else { name.clone() };
        let _ = writeln!(
            svg,
            r#"<rect x="{}" y="{}" width="14" height="14" fill="{color}" fill-opacity="{}" stroke="{color}"/>"#,
            SIZE + 12.0,
            ly - 11.0,
            if s.is_empty() { "0" } else { "0.3" }
        );
        let _ = writeln!(svg, r#"<text x="{}" y="{ly}" font-size="13" font-family="sans-serif">{}</text>"#, SIZE + 32.0, escape(&label));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
