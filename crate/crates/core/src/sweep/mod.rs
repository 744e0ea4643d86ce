//! Slice-and-sweep workspace construction.
//!
//! At fixed height `z` and tilt `alpha`, P is confined to the admissible half
//! of the coupling ellipse. Sampling that half-arc and keeping the samples
//! that pass every constraint gives the per-tilt arcs of a slice; the union
//! over the tilt grid is the planar slice, and stacking slices over the
//! interference box's z range gives the workspace.

mod oracle;
mod raster;
mod validate;

pub use oracle::{oracle_membership, MembershipGrid};
pub use raster::{estimate_slice_area, estimate_volume, slice_areas};
pub use validate::{validate_against_oracle, ValidationParams, ValidationReport};

use rayon::prelude::*;
use serde::Serialize;

use crate::config::geometry_hash;
use crate::constraints::{interference_box, is_admissible, AxisBox};
use crate::error::{Error, Result};
use crate::geometry::{MachineGeometry, Rod};
use crate::kinematics::{coupling_ellipse, inverse_kinematics_at, CouplingEllipse, Pose};
use crate::tolerances::ALPHA_EDGE_REL;

/// Discretization and tool parameters of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepParams {
    pub alpha_steps: usize,
    pub arc_samples: usize,
    pub z_steps: usize,
    /// Distance from P to the tool center point along the platform axis.
    pub d_pu: f64,
    /// Tolerance band for oracle comparisons [m].
    pub boundary_band: f64,
}

impl SweepParams {
    /// 181 tilts, 512 arc samples, 101 heights, no tool, band `1e-4 L1`.
    pub fn defaults(geom: &MachineGeometry) -> Self {
        Self { alpha_steps: 181, arc_samples: 512, z_steps: 101, d_pu: 0.0, boundary_band: 1e-4 * geom.scale() }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, n) in [("alpha_steps", self.alpha_steps), ("arc_samples", self.arc_samples), ("z_steps", self.z_steps)] {
            if n < 2 {
                return Err(Error::Validation(format!("{name} must be >= 2, got {n}")));
            }
        }
        if !(self.d_pu >= 0.0 && self.d_pu.is_finite()) {
            return Err(Error::Validation(format!("d_pu must be finite and >= 0, got {}", self.d_pu)));
        }
        if !(self.boundary_band > 0.0 && self.boundary_band.is_finite()) {
            return Err(Error::Validation(format!("boundary_band must be > 0, got {}", self.boundary_band)));
        }
        Ok(())
    }
}

/// How a horizontal plane relates to the end caps of the rods' swept reach.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    /// No stroke end binds: the slice is a rigid translate of any other
    /// Constant slice.
    Constant,
    /// Some slider hits the bottom of its stroke.
    LowerTransition,
    /// Some slider hits the top of its stroke (and none the bottom).
    UpperTransition,
    /// Some rod cannot reach the plane at any slider position and tilt.
    Empty,
}

/// One sample of an admissible arc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub alpha: f64,
    /// Ellipse parameter of the sample, in (0, pi).
    pub theta: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
}

/// A maximal run of consecutive admissible samples on one arc.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArcInterval {
    /// Indices of the first and last samples of the run.
    pub first: usize,
    pub last: usize,
    /// Boundary parameters of the run, located by bisection between the
    /// outermost admissible samples and their rejected neighbors (or the
    /// ends of the half-arc).
    pub theta_start: f64,
    pub theta_end: f64,
    pub points: Vec<SamplePoint>,
}

/// Admissible part of the coupling half-ellipse at one tilt.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceArc {
    pub alpha: f64,
    /// `None` when leg I cannot close at this tilt.
    pub ellipse: Option<CouplingEllipse>,
    pub intervals: Vec<ArcInterval>,
}

impl SliceArc {
    pub fn point_count(&self) -> usize {
        self.intervals.iter().map(|i| i.points.len()).sum()
    }

    /// `(first, last)` index pairs of the admissible runs.
    pub fn index_ranges(&self) -> Vec<(usize, usize)> {
        self.intervals.iter().map(|i| (i.first, i.last)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorkspaceSlice {
    pub z: f64,
    pub classification: Classification,
    /// One entry per tilt of the grid, in grid order.
    pub arcs: Vec<SliceArc>,
}

impl WorkspaceSlice {
    pub fn point_count(&self) -> usize {
        self.arcs.iter().map(SliceArc::point_count).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.point_count() == 0
    }

    pub fn points(&self) -> impl Iterator<Item = &SamplePoint> {
        self.arcs.iter().flat_map(|a| a.intervals.iter().flat_map(|i| i.points.iter()))
    }
}

/// All slices of a sweep, ordered by increasing z.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceSet {
    pub params: SweepParams,
    pub bounds: AxisBox,
    pub slices: Vec<WorkspaceSlice>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointRow {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub alpha: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
}

/// Workspace samples with the inputs that produced them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointCloud {
    pub geometry_hash: String,
    pub params: SweepParams,
    /// Sorted by (z, alpha, arc parameter).
    pub rows: Vec<PointRow>,
}

impl PointCloud {
    pub fn from_slices(geom: &MachineGeometry, slices: &SliceSet) -> Self {
        let rows = slices
            .slices
            .iter()
            .flat_map(|s| s.points())
            .map(|p| PointRow { x: p.x, y: p.y, z: p.z, alpha: p.alpha, rho1: p.rho1, rho2: p.rho2, rho3: p.rho3 })
            .collect();
        Self { geometry_hash: geometry_hash(geom), params: slices.params, rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Tilt grid: `n` values spread evenly over `(-alpha_1, alpha_1)` pulled in by
/// `ALPHA_EDGE_REL * alpha_1`; exactly antisymmetric, and contains 0 when `n`
/// is odd.
pub fn alpha_grid(geom: &MachineGeometry, n: usize) -> Vec<f64> {
    let a = geom.max_tilt() * (1.0 - ALPHA_EDGE_REL);
    let m = (n - 1) as f64;
    (0..n)
        .map(|k| {
            let j = 2 * k as i64 - (n as i64 - 1);
            a * j as f64 / m
        })
        .collect()
}

/// Ellipse parameters of the arc samples: cell centers of `(0, pi)`.
pub fn theta_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| std::f64::consts::PI * (k as f64 + 0.5) / n as f64).collect()
}

/// Heights of the sweep: `n` values covering the box's z range, endpoints
/// pulled in by `1e-9 L1` so they fall inside the open box.
pub fn z_grid(geom: &MachineGeometry, bounds: &AxisBox, n: usize) -> Vec<f64> {
    let eps = 1e-9 * geom.scale();
    let (lo, hi) = (bounds.z_min + eps, bounds.z_max - eps);
    (0..n)
        .map(|k| if k == n - 1 { hi } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 })
        .collect()
}

/// Vertical extent of the platform-side offset over the tilt range: the
/// virtual guideway of a rod sits within `±R sin(alpha_1)` of the slider.
fn guide_swing(geom: &MachineGeometry, rod: Rod) -> f64 {
    let r = match rod {
        Rod::R11 | Rod::R12 => geom.platform_y1,
        Rod::R21 | Rod::R31 => geom.platform_y2,
    };
    r * geom.max_tilt().sin()
}

/// Classifies a plane by intersecting it with every rod's reach envelope and
/// with the end-cap hemispheres traced at the stroke ends.
pub fn classify_z(geom: &MachineGeometry, z: f64) -> Classification {
    let mut lower = false;
    let mut upper = false;
    for rod in Rod::ALL {
        let leg = rod.leg();
        let (stroke, l, w) = (geom.stroke(leg), geom.rod_length(leg), guide_swing(geom, rod));
        // lower hemisphere around a slider at rho covers z in [rho - w, rho + w + L]
        if z < stroke.min - w || z > stroke.max + w + l {
            return Classification::Empty;
        }
        let cap = |rho: f64| z >= rho - w && z <= rho + w + l;
        lower |= cap(stroke.max);
        upper |= cap(stroke.min);
    }
    if lower {
        Classification::LowerTransition
    } else if upper {
        Classification::UpperTransition
    } else {
        Classification::Constant
    }
}

/// Closed form of the Constant band: `[max(rho_min + L + w), min(rho_max - w)]`
/// over the four rods, `w` the guideway swing. `None` when empty.
pub fn constant_interval(geom: &MachineGeometry) -> Option<(f64, f64)> {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for rod in Rod::ALL {
        let leg = rod.leg();
        let (stroke, l, w) = (geom.stroke(leg), geom.rod_length(leg), guide_swing(geom, rod));
        lo = lo.max(stroke.min + l + w);
        hi = hi.min(stroke.max - w);
    }
    (lo < hi).then_some((lo, hi))
}

fn admissible_sample(
    geom: &MachineGeometry,
    ellipse: &CouplingEllipse,
    theta: f64,
    z: f64,
    d_pu: f64,
) -> Option<SamplePoint> {
    let (x, y) = ellipse.admissible_point_at(theta);
    let alpha = ellipse.alpha;
    let p = nalgebra::Vector3::new(x, y, z);
    if !is_admissible(geom, &p, alpha, d_pu) {
        return None;
    }
    let sol = inverse_kinematics_at(geom, &Pose::new(x, y, z, alpha)).ok()?;
    if !sol.all_in_stroke() {
        return None;
    }
    let a = sol.actuators;
    Some(SamplePoint { x, y, z, alpha, theta, rho1: a.rho1, rho2: a.rho2, rho3: a.rho3 })
}

fn arc_at(geom: &MachineGeometry, alpha: f64, thetas: &[f64], z: f64, d_pu: f64) -> SliceArc {
    let Ok(ellipse) = coupling_ellipse(geom, alpha) else {
        return SliceArc { alpha, ellipse: None, intervals: Vec::new() };
    };
    let mut intervals: Vec<ArcInterval> = Vec::new();
    let mut open: Option<ArcInterval> = None;
    for (k, &theta) in thetas.iter().enumerate() {
        match admissible_sample(geom, &ellipse, theta, z, d_pu) {
            Some(pt) => match open.as_mut() {
                Some(run) => {
                    run.last = k;
                    run.theta_end = theta;
                    run.points.push(pt);
                }
                None => {
                    open = Some(ArcInterval { first: k, last: k, theta_start: theta, theta_end: theta, points: vec![pt] })
                }
            },
            None => intervals.extend(open.take()),
        }
    }
    intervals.extend(open);
    let accepted = |theta: f64| admissible_sample(geom, &ellipse, theta, z, d_pu).is_some();
    for run in &mut intervals {
        let before = if run.first == 0 { 0.0 } else { thetas[run.first - 1] };
        let after = thetas.get(run.last + 1).copied().unwrap_or(std::f64::consts::PI);
        run.theta_start = refine_edge(&accepted, thetas[run.first], before);
        run.theta_end = refine_edge(&accepted, thetas[run.last], after);
    }
    SliceArc { alpha, ellipse: Some(ellipse), intervals }
}

/// Parameter tolerance of refined interval edges [rad].
const EDGE_TOL: f64 = 1e-10;

/// Bisects between an accepted parameter and a rejected one, returning the
/// last accepted parameter found.
fn refine_edge(accepted: &impl Fn(f64) -> bool, mut inside: f64, mut outside: f64) -> f64 {
    while (outside - inside).abs() > EDGE_TOL {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        if accepted(mid) {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}

/// Slice of the workspace in the plane `z`, evaluated from scratch.
pub fn slice_at(geom: &MachineGeometry, z: f64, params: &SweepParams) -> Result<WorkspaceSlice> {
    params.validate()?;
    let alphas = alpha_grid(geom, params.alpha_steps);
    let thetas = theta_grid(params.arc_samples);
    let arcs = alphas.par_iter().map(|&alpha| arc_at(geom, alpha, &thetas, z, params.d_pu)).collect();
    Ok(WorkspaceSlice { z, classification: classify_z(geom, z), arcs })
}

/// Translates a slice to height `z`: positions and sliders move rigidly.
fn translated(slice: &WorkspaceSlice, z: f64) -> WorkspaceSlice {
    let dz = z - slice.z;
    let mut out = slice.clone();
    out.z = z;
    for arc in &mut out.arcs {
        for interval in &mut arc.intervals {
            for p in &mut interval.points {
                p.z = z;
                p.rho1 += dz;
                p.rho2 += dz;
                p.rho3 += dz;
            }
        }
    }
    out
}

/// Margin keeping reused slices away from the Constant band's edges, where a
/// rounding-level change of `z` could flip a stroke comparison.
const CONSTANT_MARGIN_REL: f64 = 1e-9;

/// Full sweep over the interference box's z range. Slices strictly inside
/// the Constant band are translated copies of one computed slice; all
/// others are evaluated from scratch.
pub fn sweep(geom: &MachineGeometry, params: &SweepParams) -> Result<(PointCloud, SliceSet)> {
    params.validate()?;
    let bounds = interference_box(geom, params.d_pu)?;
    let zs = z_grid(geom, &bounds, params.z_steps);
    let margin = CONSTANT_MARGIN_REL * geom.scale();
    let band = constant_interval(geom).map(|(lo, hi)| (lo + margin, hi - margin));
    let reusable = |z: f64| {
        classify_z(geom, z) == Classification::Constant && band.is_some_and(|(lo, hi)| z > lo && z < hi)
    };
    let template = match zs.iter().copied().find(|&z| reusable(z)) {
        Some(z) => Some(slice_at(geom, z, params)?),
        None => None,
    };
    let slices: Vec<WorkspaceSlice> = zs
        .par_iter()
        .map(|&z| match &template {
            Some(t) if reusable(z) => Ok(translated(t, z)),
            _ => slice_at(geom, z, params),
        })
        .collect::<Result<_>>()?;
    let set = SliceSet { params: *params, bounds, slices };
    let cloud = PointCloud::from_slices(geom, &set);
    Ok((cloud, set))
}
