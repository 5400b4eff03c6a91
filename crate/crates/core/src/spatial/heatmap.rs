//! SVG rendering of a colocalization matrix as a clustermap-style heatmap.

use std::fmt::Write as _;

use super::ColocMatrix;
use crate::error::{Error, Result};

pub type Rgb = (u8, u8, u8);

/// Color of -1.
pub const NEGATIVE_COLOR: Rgb = (33, 102, 172);
/// Color of 0.
pub const MIDPOINT_COLOR: Rgb = (247, 247, 247);
/// Color of +1.
pub const POSITIVE_COLOR: Rgb = (178, 24, 43);
/// Fill for undefined entries.
pub const UNDEFINED_COLOR: Rgb = (160, 160, 160);

const CELL: usize = 28;
const CHAR_W: usize = 7;

fn lerp(a: Rgb, b: Rgb, t: f64) -> Rgb {
    let mix = |x: u8, y: u8| (x as f64 + (y as f64 - x as f64) * t).round() as u8;
    (mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

/// Diverging blue–white–red scale over [-1, 1]; values outside are clipped.
pub fn diverging_color(v: f64) -> Rgb {
    let v = v.clamp(-1.0, 1.0);
    if v < 0.0 {
        lerp(MIDPOINT_COLOR, NEGATIVE_COLOR, -v)
    } else {
        lerp(MIDPOINT_COLOR, POSITIVE_COLOR, v)
    }
}

pub fn hex(c: Rgb) -> String {
    format!("#{:02x}{:02x}{:02x}", c.0, c.1, c.2)
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
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

/// Renders `m` with rows and columns permuted by `order`.
///
/// Every matrix entry becomes one `<rect class="cell">`; the color legend is
/// drawn with a gradient-filled path so that the rectangles are exactly the
/// cells.
pub fn render_heatmap(m: &ColocMatrix, order: &[usize]) -> Result<String> {
    let c = m.len();
    let mut seen = vec![false; c];
    if order.len() != c || order.iter().any(|&i| i >= c || std::mem::replace(&mut seen[i], true)) {
        return Err(Error::invalid("heatmap order must be a permutation of the cell types"));
    }
    let label_w = m.cell_types.iter().map(|s| s.chars().count()).max().unwrap_or(0) * CHAR_W + 12;
    let left = label_w;
    let top = label_w + 24;
    let grid = c * CELL;
    let legend_x = left + grid + 24;
    let width = legend_x + 70;
    let height = (top + grid + 16).max(top + 200);

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, "<title>Moran's R colocalization: {}</title>", escape(&m.label));
    let _ = writeln!(
        s,
        r#"<defs><linearGradient id="scale" x1="0" y1="1" x2="0" y2="0"><stop offset="0" stop-color="{}"/><stop offset="0.5" stop-color="{}"/><stop offset="1" stop-color="{}"/></linearGradient></defs>"#,
        hex(NEGATIVE_COLOR),
        hex(MIDPOINT_COLOR),
        hex(POSITIVE_COLOR)
    );
    let _ = writeln!(s, r#"<text x="{left}" y="14" font-size="13">{}</text>"#, escape(&m.label));

    for (row, &a) in order.iter().enumerate() {
        let y = top + row * CELL;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end" dominant-baseline="middle">{}</text>"#,
            left - 4,
            y + CELL / 2,
            escape(&m.cell_types[a])
        );
        for (col, &b) in order.iter().enumerate() {
            let x = left + col * CELL;
            let (fill, value) = match m.get(a, b) {
                Some(v) => (hex(diverging_color(v)), format!("{v:.4}")),
                None => (hex(UNDEFINED_COLOR), "undefined".to_string()),
            };
            let _ = writeln!(
                s,
                r#"<rect class="cell" x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{fill}"><title>{} / {}: {value}</title></rect>"#,
                escape(&m.cell_types[a]),
                escape(&m.cell_types[b])
            );
        }
    }
    for (col, &b) in order.iter().enumerate() {
        let x = left + col * CELL + CELL / 2;
        let y = top - 4;
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{y}" transform="rotate(-90 {x} {y})" dominant-baseline="middle">{}</text>"#,
            escape(&m.cell_types[b])
        );
    }

    let bar_h = 160;
    let _ = writeln!(
        s,
        r#"<path class="legend" d="M{legend_x} {top} h14 v{bar_h} h-14 Z" fill="url(#scale)" stroke="dimgray" stroke-width="0.5"/>"#
    );
    for (label, frac) in [("1", 0.0), ("0", 0.5), ("-1", 1.0)] {
        let y = top as f64 + frac * bar_h as f64;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{y}" dominant-baseline="middle">{label}</text>"#,
            legend_x + 20
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{legend_x}" y="{}">Moran's R</text>"#,
        top + bar_h + 16
    );
    s.push_str("</svg>\n");
    Ok(s)
}
