//! Brute-force workspace membership, composed directly from the predicates.

use nalgebra::Vector3;

use crate::constraints::{is_admissible, AxisBox};
use crate::geometry::MachineGeometry;
use crate::kinematics::{inverse_kinematics_at, solve_alpha, Pose};

fn admitted_at(geom: &MachineGeometry, x: f64, y: f64, z: f64, alpha: f64, d_pu: f64) -> bool {
    let p = Vector3::new(x, y, z);
    is_admissible(geom, &p, alpha, d_pu)
        && inverse_kinematics_at(geom, &Pose::new(x, y, z, alpha)).is_ok_and(|s| s.all_in_stroke())
}

/// True when some sign-consistent tilt of `(x, y)` passes every constraint at
/// height `z` with the sliders inside their strokes.
pub fn oracle_membership(geom: &MachineGeometry, x: f64, y: f64, z: f64, d_pu: f64) -> bool {
    solve_alpha(geom, x, y).into_iter().any(|alpha| admitted_at(geom, x, y, z, alpha, d_pu))
}

/// Cell-centered `n x n` grid over a box's x-y rectangle with the tilt roots
/// of every cell solved once; the roots do not depend on z.
#[derive(Debug, Clone)]
pub struct MembershipGrid {
    pub bounds: AxisBox,
    pub resolution: usize,
    roots: Vec<Vec<f64>>,
}

impl MembershipGrid {
    pub fn new(geom: &MachineGeometry, bounds: AxisBox, resolution: usize) -> Self {
        use rayon::prelude::*;
        let roots = (0..resolution * resolution)
            .into_par_iter()
            .map(|k| {
                let (x, y) = Self::center_of(&bounds, resolution, k % resolution, k / resolution);
                solve_alpha(geom, x, y)
            })
            .collect();
        Self { bounds, resolution, roots }
    }

    fn center_of(bounds: &AxisBox, n: usize, i: usize, j: usize) -> (f64, f64) {
        let x = bounds.x_min + bounds.width() * (i as f64 + 0.5) / n as f64;
        let y = bounds.y_min + bounds.depth() * (j as f64 + 0.5) / n as f64;
        (x, y)
    }

    /// Center of cell `(i, j)`; `i` indexes x.
    pub fn center(&self, i: usize, j: usize) -> (f64, f64) {
        Self::center_of(&self.bounds, self.resolution, i, j)
    }

    pub fn cell_area(&self) -> f64 {
        self.bounds.width() * self.bounds.depth() / (self.resolution * self.resolution) as f64
    }

    /// Row-major (j * n + i) membership mask at height `z`.
    pub fn mask(&self, geom: &MachineGeometry, z: f64, d_pu: f64) -> Vec<bool> {
        use rayon::prelude::*;
        let n = self.resolution;
        (0..n * n)
            .into_par_iter()
            .map(|k| {
                let (x, y) = self.center(k % n, k / n);
                self.roots[k].iter().any(|&alpha| admitted_at(geom, x, y, z, alpha, d_pu))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::reference_geometry;
    use crate::constraints::interference_box;
    use crate::sweep::{slice_at, SweepParams};

    #[test]
    fn emitted_rows_pass_and_mirrored_rows_fail() {
        let g = reference_geometry();
        let p = SweepParams { alpha_steps: 15, arc_samples: 48, ..SweepParams::defaults(&g) };
        let s = slice_at(&g, 1.2, &p).unwrap();
        let mut checked = 0;
        for pt in s.points() {
            assert!(oracle_membership(&g, pt.x, pt.y, pt.z, 0.0));
            if pt.alpha != 0.0 {
                // the same position with the other tilt sign is a different
                // point; the flipped position keeps alpha and breaks the rule
                let p = Vector3::new(pt.x, -pt.y, pt.z);
                assert!(!is_admissible(&g, &p, pt.alpha, 0.0));
            }
            checked += 1;
        }
        assert!(checked > 50);
        let b = interference_box(&g, 0.0).unwrap();
        assert!(!oracle_membership(&g, b.x_max + 0.01, 0.0, 1.2, 0.0));
    }

    #[test]
    fn grid_mask_matches_pointwise_oracle() {
        let g = reference_geometry();
        let b = interference_box(&g, 0.0).unwrap();
        let grid = MembershipGrid::new(&g, b, 24);
        let mask = grid.mask(&g, 1.2, 0.0);
        for j in 0..24 {
            for i in 0..24 {
                let (x, y) = grid.center(i, j);
                assert_eq!(mask[j * 24 + i], oracle_membership(&g, x, y, 1.2, 0.0));
            }
        }
        assert!(mask.iter().any(|&m| m));
    }
}
