//! Point-cloud CSV.

use std::io::Write;

use super::{format_g12, Counting};
use crate::error::{Error, Result};
use crate::sweep::PointCloud;

pub const CSV_HEADER: &str = "x,y,z,alpha,rho1,rho2,rho3";

/// Writes the header and one row per point, 12 significant digits, `\n`
/// line endings. Returns the number of bytes written.
pub fn write_point_cloud<W: Write>(cloud: &PointCloud, destination: W) -> Result<usize> {
    if cloud.is_empty() {
        return Err(Error::Precondition("point cloud is empty".to_string()));
    }
    let mut out = Counting::new(std::io::BufWriter::new(destination));
    writeln!(out, "{CSV_HEADER}")?;
    for r in &cloud.rows {
        let fields = [r.x, r.y, r.z, r.alpha, r.rho1, r.rho2, r.rho3].map(format_g12);
        writeln!(out, "{}", fields.join(","))?;
    }
    out.flush()?;
    Ok(out.bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::reference_geometry;
    use crate::sweep::{PointRow, SweepParams};

    fn cloud(rows: Vec<PointRow>) -> PointCloud {
        let g = reference_geometry();
        PointCloud { geometry_hash: String::new(), params: SweepParams::defaults(&g), rows }
    }

    #[test]
    fn single_row_gives_two_lines() {
        let c = cloud(vec![PointRow { x: 0.0, y: 0.0, z: 1.0, alpha: 0.0, rho1: 0.5, rho2: 0.5, rho3: 0.5 }]);
        let mut buf = Vec::new();
        let n = write_point_cloud(&c, &mut buf).unwrap();
        assert_eq!(n, buf.len());
        assert_eq!(String::from_utf8(buf).unwrap(), "x,y,z,alpha,rho1,rho2,rho3\n0,0,1,0,0.5,0.5,0.5\n");
    }

    #[test]
    fn empty_cloud_rejected() {
        assert!(matches!(write_point_cloud(&cloud(Vec::new()), Vec::new()), Err(Error::Precondition(_))));
    }
}
