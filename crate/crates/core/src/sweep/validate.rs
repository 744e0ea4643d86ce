//! Agreement between sweep-derived membership and the brute-force oracle.
//!
//! A grid point `(x, y, z)` belongs to the sweep when, for one of its
//! sign-consistent tilt roots, its ellipse parameter falls inside an
//! admissible interval of the slice at that z, with interval edges
//! interpolated linearly between the two grid tilts bracketing the root.

use rayon::prelude::*;
use serde::Serialize;

use super::{alpha_grid, oracle_membership, sweep, SliceArc, SweepParams, WorkspaceSlice};
use crate::error::{Error, Result};
use crate::geometry::MachineGeometry;
use crate::kinematics::{coupling_ellipse, solve_alpha};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidationParams {
    pub nx: usize,
    pub ny: usize,
    /// Number of heights; the sweep is run with this many z steps so every
    /// grid height has its own slice.
    pub nz: usize,
    pub sweep: SweepParams,
}

impl ValidationParams {
    /// 64 x 64 x 32 grid with the default sweep.
    pub fn defaults(geom: &MachineGeometry) -> Self {
        Self { nx: 64, ny: 64, nz: 32, sweep: SweepParams::defaults(geom) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidationReport {
    pub grid_points: usize,
    /// Points with an oracle flip within `boundary_band`; not compared.
    pub near_boundary: usize,
    pub compared: usize,
    pub agreements: usize,
    /// Sweep says inside, oracle says outside.
    pub sweep_only: usize,
    /// Oracle says inside, sweep says outside.
    pub oracle_only: usize,
    pub oracle_inside: usize,
    pub agreement: f64,
    /// Largest probe radius at which a disagreeing point still saw no oracle
    /// flip (an upper bound on its distance to the boundary); 0 if none.
    pub worst_disagreement_distance: f64,
}

fn interval_edges(arc: &SliceArc) -> Vec<(f64, f64)> {
    arc.intervals.iter().map(|i| (i.theta_start, i.theta_end)).collect()
}

/// Sweep membership of `(x, y)` in `slice` through the tilt `alpha`.
fn member_via(slice: &WorkspaceSlice, alphas: &[f64], geom: &MachineGeometry, x: f64, y: f64, alpha: f64) -> bool {
    let Ok(ellipse) = coupling_ellipse(geom, alpha) else {
        return false;
    };
    let theta = ellipse.parameter_of(x, y);
    let n = alphas.len();
    let k = alphas.partition_point(|&a| a <= alpha);
    let edges = if k == 0 {
        interval_edges(&slice.arcs[0])
    } else if k >= n {
        interval_edges(&slice.arcs[n - 1])
    } else {
        let (a0, a1) = (alphas[k - 1], alphas[k]);
        let f = (alpha - a0) / (a1 - a0);
        let (e0, e1) = (interval_edges(&slice.arcs[k - 1]), interval_edges(&slice.arcs[k]));
        if e0.len() == e1.len() {
            e0.iter()
                .zip(&e1)
                .map(|(p, q)| (p.0 + f * (q.0 - p.0), p.1 + f * (q.1 - p.1)))
                .collect()
        } else if f < 0.5 {
            e0
        } else {
            e1
        }
    };
    edges.iter().any(|&(lo, hi)| theta >= lo && theta <= hi)
}

fn sweep_member(slice: &WorkspaceSlice, alphas: &[f64], geom: &MachineGeometry, x: f64, y: f64) -> bool {
    solve_alpha(geom, x, y).into_iter().any(|a| member_via(slice, alphas, geom, x, y, a))
}

const DIRECTIONS: usize = 8;

fn flips_within(geom: &MachineGeometry, x: f64, y: f64, z: f64, d_pu: f64, center: bool, r: f64) -> bool {
    let planar = (0..DIRECTIONS).any(|k| {
        let t = std::f64::consts::TAU * k as f64 / DIRECTIONS as f64;
        oracle_membership(geom, x + r * t.cos(), y + r * t.sin(), z, d_pu) != center
    });
    planar
        || oracle_membership(geom, x, y, z - r, d_pu) != center
        || oracle_membership(geom, x, y, z + r, d_pu) != center
}

/// Compares sweep membership with the oracle on an `nx x ny x nz` grid of
/// cell centers (x, y) and sweep heights (z) over the interference box.
pub fn validate_against_oracle(geom: &MachineGeometry, params: &ValidationParams) -> Result<ValidationReport> {
    if params.nx == 0 || params.ny == 0 || params.nz < 2 {
        return Err(Error::Validation(format!(
            "validation grid must be nonempty with nz >= 2, got {}x{}x{}",
            params.nx, params.ny, params.nz
        )));
    }
    let sweep_params = SweepParams { z_steps: params.nz, ..params.sweep };
    let (_, set) = sweep(geom, &sweep_params)?;
    let alphas = alpha_grid(geom, sweep_params.alpha_steps);
    let (b, band, d_pu) = (set.bounds, sweep_params.boundary_band, sweep_params.d_pu);
    let max_radius = b.width().hypot(b.depth()).hypot(b.height());

    struct Outcome {
        near: bool,
        sweep: bool,
        oracle: bool,
        distance: f64,
    }
    let (nx, ny) = (params.nx, params.ny);
    let outcomes: Vec<Outcome> = set
        .slices
        .iter()
        .flat_map(|slice| (0..nx * ny).map(move |k| (slice, k)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(slice, k)| {
            let x = b.x_min + b.width() * ((k % nx) as f64 + 0.5) / nx as f64;
            let y = b.y_min + b.depth() * ((k / nx) as f64 + 0.5) / ny as f64;
            let z = slice.z;
            let oracle = oracle_membership(geom, x, y, z, d_pu);
            let near = flips_within(geom, x, y, z, d_pu, oracle, band);
            let sweep = !near && sweep_member(slice, &alphas, geom, x, y);
            let mut distance = 0.0;
            if !near && sweep != oracle {
                let mut r = band;
                while r < max_radius && !flips_within(geom, x, y, z, d_pu, oracle, r) {
                    r *= 2.0;
                }
                distance = r;
            }
            Outcome { near, sweep, oracle, distance }
        })
        .collect();

    let grid_points = outcomes.len();
    let compared: Vec<&Outcome> = outcomes.iter().filter(|o| !o.near).collect();
    let agreements = compared.iter().filter(|o| o.sweep == o.oracle).count();
    let sweep_only = compared.iter().filter(|o| o.sweep && !o.oracle).count();
    let oracle_only = compared.iter().filter(|o| !o.sweep && o.oracle).count();
    let oracle_inside = compared.iter().filter(|o| o.oracle).count();
    let worst = compared.iter().map(|o| o.distance).fold(0.0, f64::max);
    Ok(ValidationReport {
        grid_points,
        near_boundary: grid_points - compared.len(),
        compared: compared.len(),
        agreements,
        sweep_only,
        oracle_only,
        oracle_inside,
        agreement: if compared.is_empty() { 1.0 } else { agreements as f64 / compared.len() as f64 },
        worst_disagreement_distance: worst,
    })
}
