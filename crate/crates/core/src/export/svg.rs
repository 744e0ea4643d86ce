//! Slice plot: the interference rectangle and one polyline per admissible run.

use std::io::Write;

use super::{format_g12, Counting};
use crate::constraints::AxisBox;
use crate::error::Result;
use crate::sweep::WorkspaceSlice;

/// SVG 1.1 with `viewBox` equal to the box's x-y rectangle (SVG's y axis,
/// which points down, carries the machine's y).
pub fn write_slice_svg<W: Write>(slice: &WorkspaceSlice, bounds: &AxisBox, destination: W) -> Result<usize> {
    let mut out = Counting::new(std::io::BufWriter::new(destination));
    let (x, y, w, h) = (bounds.x_min, bounds.y_min, bounds.width(), bounds.depth());
    let stroke = format_g12(2e-3 * w.max(h));
    let (x, y, w, h) = (format_g12(x), format_g12(y), format_g12(w), format_g12(h));
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="{x} {y} {w} {h}">"#
    )?;
    writeln!(out, "<title>z = {}</title>", format_g12(slice.z))?;
    writeln!(
        out,
        r##"<rect x="{x}" y="{y}" width="{w}" height="{h}" fill="none" stroke="#000000" stroke-width="{stroke}"/>"##
    )?;
    for arc in &slice.arcs {
        for interval in &arc.intervals {
            let points: Vec<String> =
                interval.points.iter().map(|p| format!("{},{}", format_g12(p.x), format_g12(p.y))).collect();
            writeln!(
                out,
                r##"<polyline data-alpha="{}" points="{}" fill="none" stroke="#1f77b4" stroke-width="{stroke}"/>"##,
                format_g12(arc.alpha),
                points.join(" ")
            )?;
        }
    }
    writeln!(out, "</svg>")?;
    out.flush()?;
    Ok(out.bytes)
}
