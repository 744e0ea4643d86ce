//! Area and volume estimates from rasterized oracle membership.

use super::oracle::MembershipGrid;
use super::{Classification, SliceSet, WorkspaceSlice};
use crate::constraints::interference_box;
use crate::error::{Error, Result};
use crate::geometry::MachineGeometry;

const MIN_RESOLUTION: usize = 16;

fn check_resolution(resolution: usize) -> Result<()> {
    if resolution < MIN_RESOLUTION {
        return Err(Error::Precondition(format!("resolution must be >= {MIN_RESOLUTION}, got {resolution}")));
    }
    Ok(())
}

fn area_on_grid(grid: &MembershipGrid, geom: &MachineGeometry, slice: &WorkspaceSlice, d_pu: f64) -> f64 {
    if slice.classification == Classification::Empty {
        return 0.0;
    }
    let inside = grid.mask(geom, slice.z, d_pu).into_iter().filter(|&m| m).count();
    inside as f64 * grid.cell_area()
}

/// Slice area: membership counted on a `resolution^2` cell-centered grid over
/// the interference box's x-y rectangle.
pub fn estimate_slice_area(slice: &WorkspaceSlice, geom: &MachineGeometry, resolution: usize, d_pu: f64) -> Result<f64> {
    check_resolution(resolution)?;
    if slice.classification == Classification::Empty {
        return Ok(0.0);
    }
    let grid = MembershipGrid::new(geom, interference_box(geom, d_pu)?, resolution);
    Ok(area_on_grid(&grid, geom, slice, d_pu))
}

/// Areas of every slice of a set, sharing one root grid.
pub fn slice_areas(set: &SliceSet, geom: &MachineGeometry, resolution: usize) -> Result<Vec<f64>> {
    check_resolution(resolution)?;
    let grid = MembershipGrid::new(geom, set.bounds, resolution);
    Ok(set.slices.iter().map(|s| area_on_grid(&grid, geom, s, set.params.d_pu)).collect())
}

/// Trapezoidal integral of the slice areas over z.
pub fn estimate_volume(set: &SliceSet, geom: &MachineGeometry, resolution: usize) -> Result<f64> {
    if set.slices.len() < 2 {
        return Err(Error::Precondition(format!("need >= 2 slices, got {}", set.slices.len())));
    }
    let areas = slice_areas(set, geom, resolution)?;
    Ok(set
        .slices
        .windows(2)
        .zip(areas.windows(2))
        .map(|(s, a)| 0.5 * (a[0] + a[1]) * (s[1].z - s[0].z))
        .sum())
}
