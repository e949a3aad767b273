//! Deterministic SVG scatter plots of planar patterns.
//!
//! Points are snapped to the pixel grid of a fixed canvas and drawn once per
//! (pixel, shade), so the file size stays bounded however large a cluster
//! gets. Shades cycle through a fixed grayscale palette by cluster tag.

use std::collections::HashSet;
use std::fmt::Write;

use crate::measure::{Location, PointPattern, Rect};

pub const CANVAS: u32 = 800;
const PAD: f64 = 20.0;
const PALETTE: [&str; 6] = ["#111111", "#3a3a3a", "#5e5e5e", "#808080", "#a0a0a0", "#bdbdbd"];

fn shade(tag: Option<u64>) -> usize {
    tag.map_or(0, |t| (t % PALETTE.len() as u64) as usize)
}

/// Render the planar points of `pattern` that fall in `window`.
pub fn render_svg(pattern: &PointPattern, window: &Rect) -> String {
    let side = CANVAS as f64 - 2.0 * PAD;
    let sx = side / window.width();
    let sy = side / window.height();
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS}" height="{CANVAS}" viewBox="0 0 {CANVAS} {CANVAS}">"#
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{CANVAS}" height="{CANVAS}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<rect x="{PAD}" y="{PAD}" width="{side}" height="{side}" fill="none" stroke="black" stroke-width="1"/>"#
    );
    let mut drawn = HashSet::new();
    for p in pattern.points() {
        let Location::Planar(pt) = p.location else { continue };
        if !window.contains(pt) {
            continue;
        }
        let px = (PAD + (pt.x - window.x0()) * sx).floor() as i64;
        let py = (PAD + (window.y1() - pt.y) * sy).floor() as i64;
        let s = shade(p.cluster);
        if drawn.insert((px, py, s)) {
            let _ = writeln!(out, r#"<circle cx="{px}.5" cy="{py}.5" r="1.6" fill="{}"/>"#, PALETTE[s]);
        }
    }
    out.push_str("</svg>\n");
    out
}
