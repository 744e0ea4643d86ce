//! ASCII PLY writer.
//!
//! Layout, byte for byte:
//!
//! ```text
//! ply
//! format ascii 1.0
//! element vertex <N>
//! property double x
//! property double y
//! property double z
//! element face <M>
//! property list uchar int vertex_indices
//! end_header
//! <x> <y> <z>            (N lines, shortest round-trip decimal)
//! 3 <i> <j> <k>          (M lines)
//! ```
//!
//! Every line ends with `\n`. Coordinates are written as doubles so a reader
//! recovers the exact vertex values.

use std::io::Write;

use super::{Counting, MeshSurface};
use crate::error::{Error, Result};

pub fn write_ply<W: Write>(mesh: &MeshSurface, destination: W) -> Result<usize> {
    if mesh.vertices.is_empty() || mesh.triangles.is_empty() {
        return Err(Error::Precondition("mesh is empty".to_string()));
    }
    mesh.check()?;
    let mut out = Counting::new(std::io::BufWriter::new(destination));
    writeln!(out, "ply")?;
    writeln!(out, "format ascii 1.0")?;
    writeln!(out, "element vertex {}", mesh.vertices.len())?;
    for axis in ["x", "y", "z"] {
        writeln!(out, "property double {axis}")?;
    }
    writeln!(out, "element face {}", mesh.triangles.len())?;
    writeln!(out, "property list uchar int vertex_indices")?;
    writeln!(out, "end_header")?;
    for v in &mesh.vertices {
        writeln!(out, "{:?} {:?} {:?}", v[0], v[1], v[2])?;
    }
    for t in &mesh.triangles {
        writeln!(out, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    out.flush()?;
    Ok(out.bytes)
}
