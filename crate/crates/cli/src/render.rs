//! CSV and SVG emitters for reconstructed curves, plus atomic file output.

use anyhow::{Context, Result};
use mincyc_core::geometry::CurveData;
use mincyc_core::plane::PlaneField;
use std::fmt::Write as _;
use std::path::Path;

/// Writes through a temporary sibling and renames, so readers never observe
/// a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, path).with_context(|| format!("renaming onto {}", path.display()))?;
    Ok(())
}

/// Columns: t, x, y, h, r, is_cusp, is_vertex; one row per grid node, cusp
/// and vertex parameters marked on their nearest node.
pub fn curve_csv(field: &PlaneField, curve: &CurveData) -> String {
    let step = field.grid().step();
    let cusp_flags = curve.flag_nodes(&curve.cusps, step);
    let vertex_flags = curve.flag_nodes(&curve.vertices, step);
    let mut out = String::from("t,x,y,h,r,is_cusp,is_vertex\n");
    for j in 0..curve.points.len() {
        let t = (j as f64 + 0.5) * step;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            t,
            curve.points[j][0],
            curve.points[j][1],
            curve.h[j],
            curve.r[j],
            cusp_flags[j] as u8,
            vertex_flags[j] as u8,
        );
    }
    out
}

pub struct SvgStyle {
    pub size: u32,
    pub stroke_width: f64,
}

impl Default for SvgStyle {
    fn default() -> Self {
        Self { size: 800, stroke_width: 1.5 }
    }
}

/// Polyline path with the view box auto-fit at a 5% margin; cusps drawn as
/// filled dots of 1% of the viewport.
pub fn curve_svg(field: &PlaneField, curve: &CurveData, style: &SvgStyle) -> String {
    let pts = &curve.points;
    let (mut lo, mut hi) = ([f64::MAX; 2], [f64::MIN; 2]);
    for p in pts {
        for i in 0..2 {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-9);
    let margin = 0.05 * span;
    let view = [
        lo[0] - margin,
        lo[1] - margin,
        (hi[0] - lo[0]) + 2.0 * margin,
        (hi[1] - lo[1]) + 2.0 * margin,
    ];
    // flip y so the mathematical orientation reads upward
    let flip = |p: &[f64; 2]| [p[0], view[1] + view[3] - (p[1] - view[1])];

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{s}" height="{s}" viewBox="{x} {y} {w} {h}">"#,
        s = style.size,
        x = view[0],
        y = view[1],
        w = view[2],
        h = view[3],
    );
    let stroke = style.stroke_width * view[2] / style.size as f64;
    let mut path = String::new();
    for (i, p) in pts.iter().enumerate() {
        let q = flip(p);
        let _ = write!(path, "{}{} {}", if i == 0 { "M" } else { "L" }, q[0], q[1]);
    }
    if curve.turns == 1 && curve.turn_displacements.is_empty() {
        path.push('Z');
    }
    let _ = writeln!(
        out,
        r#"  <path d="{path}" fill="none" stroke="black" stroke-width="{stroke}"/>"#
    );
    let dot = 0.01 * view[2].max(view[3]);
    let step = field.grid().step();
    let n = pts.len();
    for c in &curve.cusps {
        let j = ((c / step - 0.5).round() as isize).rem_euclid(n as isize) as usize;
        let q = flip(&pts[j]);
        let _ = writeln!(out, r#"  <circle cx="{}" cy="{}" r="{dot}" fill="black"/>"#, q[0], q[1]);
    }
    out.push_str("</svg>\n");
    out
}
