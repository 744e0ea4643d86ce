//! Membership predicates for every workspace-limiting constraint.
//!
//! For a fixed tilt, the virtual slider point `A'_ij(rho)` of each rod runs
//! along a vertical line, so "P lies on the sphere of radius L around
//! `A'_ij(rho)`" is a quadratic in `rho`. The root on the lower hemisphere
//! (platform below the slider, the singularity-free side) is the slider
//! position inverse kinematics would use; every rod predicate is evaluated
//! there in closed form.

use nalgebra::Vector3;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{base_joint_frame, platform_joint_frame, JointMount, MachineGeometry, Rod};
use crate::kinematics::{
    coupling_residual, inverse_kinematics_at, joint_angles_from_rod, tilt_sign_consistent, tool_point, Pose,
};
use crate::tolerances::{COUPLING_REL, ROD_RESIDUAL_REL};

/// Axis-aligned bounds on P; membership uses strict inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisBox {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub z_min: f64,
    pub z_max: f64,
}

impl AxisBox {
    pub fn contains(&self, p: &Vector3<f64>) -> bool {
        p.x > self.x_min
            && p.x < self.x_max
            && p.y > self.y_min
            && p.y < self.y_max
            && p.z > self.z_min
            && p.z < self.z_max
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn depth(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn height(&self) -> f64 {
        self.z_max - self.z_min
    }
}

/// Platform-to-tool distance for a tool of length `tool` mounted below the
/// platform's tool-side extent `l_p1`.
pub fn d_pu_for_tool(geom: &MachineGeometry, tool: f64) -> f64 {
    geom.l_p1 + tool
}

/// Collision-free box: slider-leg clearance bounds x, leg reach at zero tilt
/// bounds y, the hood and the tilting table bound z.
// negated comparisons also reject NaN
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn interference_box(geom: &MachineGeometry, d_pu: f64) -> Result<AxisBox> {
    if !(d_pu >= 0.0) {
        return Err(Error::Precondition(format!("d_pu must be >= 0, got {d_pu}")));
    }
    let b = AxisBox {
        x_min: geom.slider_x2 - geom.platform_x2,
        x_max: geom.slider_x1 - geom.platform_x1,
        y_min: geom.slider_y2 - geom.platform_y2 - geom.rod_lengths[2],
        y_max: geom.rod_lengths[1] + geom.platform_y2 - geom.slider_y2,
        z_min: geom.l_p2 + geom.z_hood,
        z_max: geom.z_tilting_table - d_pu,
    };
    for (axis, lo, hi) in [("x", b.x_min, b.x_max), ("y", b.y_min, b.y_max), ("z", b.z_min, b.z_max)] {
        if !(lo < hi) {
            return Err(Error::EmptyBox(format!("{axis}: min {lo} >= max {hi}")));
        }
    }
    Ok(b)
}

/// Slider coordinate putting `p` on the lower hemisphere of rod `rod`, if the
/// horizontal distance to the guideway allows it. Not stroke-checked.
pub fn lower_sphere_root(geom: &MachineGeometry, p: &Vector3<f64>, rod: Rod, alpha: f64) -> Option<f64> {
    let g = geom.virtual_guide(rod, alpha);
    let l = geom.rod_length(rod.leg());
    let h2 = (p.x - g.x).powi(2) + (p.y - g.y).powi(2);
    let w2 = l * l - h2;
    if w2 < 0.0 {
        return None;
    }
    Some(p.z - g.z - w2.sqrt())
}

fn in_stroke_root(geom: &MachineGeometry, p: &Vector3<f64>, rod: Rod, alpha: f64) -> Option<f64> {
    let rho = lower_sphere_root(geom, p, rod, alpha)?;
    geom.stroke(rod.leg()).contains(rho).then_some(rho)
}

/// Rod reach within stroke on the singularity-free side: some slider position
/// in the stroke puts `p` on the lower hemisphere swept along the guideway.
pub fn in_rod_reach(geom: &MachineGeometry, p: &Vector3<f64>, rod: Rod, alpha: f64) -> bool {
    in_stroke_root(geom, p, rod, alpha).is_some()
}

fn joint_accepts(mount: &JointMount, local: &Vector3<f64>) -> bool {
    match joint_angles_from_rod(local) {
        Ok((delta, beta)) => mount.accepts(delta, beta),
        Err(_) => false,
    }
}

/// Unit rod direction from the slider joint to the platform joint.
fn rod_direction(geom: &MachineGeometry, p: &Vector3<f64>, rod: Rod, alpha: f64, rho: f64) -> Vector3<f64> {
    let a = geom.virtual_slider_point(rod, rho, alpha);
    let v = p - a;
    v / v.norm()
}

/// Base-joint limits at the in-stroke lower-hemisphere slider position.
pub fn in_base_joint_limits(geom: &MachineGeometry, p: &Vector3<f64>, rod: Rod, alpha: f64) -> bool {
    let Some(rho) = in_stroke_root(geom, p, rod, alpha) else {
        return false;
    };
    let v = rod_direction(geom, p, rod, alpha, rho);
    let frame = base_joint_frame(geom, rod, rho, alpha);
    joint_accepts(geom.base_joint(rod), &frame.to_local_direction(&v))
}

/// Platform-joint limits at the same slider position. The platform joint's
/// frame has all three axes reversed and it sees the rod from the other end,
/// so the two sign flips cancel in the local direction.
pub fn in_platform_joint_limits(geom: &MachineGeometry, p: &Vector3<f64>, rod: Rod, alpha: f64) -> bool {
    let Some(rho) = in_stroke_root(geom, p, rod, alpha) else {
        return false;
    };
    let v = rod_direction(geom, p, rod, alpha, rho);
    let frame = platform_joint_frame(geom, rod, &Pose::new(p.x, p.y, p.z, alpha));
    let mirrored = -frame.rotation;
    let local = mirrored.transpose() * (-v);
    joint_accepts(geom.platform_joint(rod), &local)
}

/// The half of the closure cylinder leg I can reach: y < 0 for a positive
/// tilt, y > 0 for a negative one, y = 0 at zero tilt.
pub fn closure_half_ok(geom: &MachineGeometry, alpha: f64, y_p: f64) -> bool {
    tilt_sign_consistent(geom, alpha, y_p)
}

/// Every constraint evaluated at one candidate `(P, alpha)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstraintReport {
    pub in_box: bool,
    pub in_rod_reach: [bool; 4],
    pub in_base_joint: [bool; 4],
    pub in_platform_joint: [bool; 4],
    pub closure_half_ok: bool,
    /// `|coupling residual| < COUPLING_REL * L1^4`.
    pub on_coupling: bool,
    /// Tool point does not pass the tilting table.
    pub tool_clear: bool,
    /// Inverse kinematics at this tilt closes every rod, and the common leg-I
    /// slider sits below P on both leg-I hemispheres.
    pub branch_ok: bool,
    pub admissible: bool,
}

impl ConstraintReport {
    /// Names of the failing constraints, for diagnostics.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.in_box {
            out.push("interference_box".to_string());
        }
        for rod in Rod::ALL {
            let k = rod.index();
            if !self.in_rod_reach[k] {
                out.push(format!("rod_reach[{}]", rod.label()));
            }
            if !self.in_base_joint[k] {
                out.push(format!("base_joint[{}]", rod.label()));
            }
            if !self.in_platform_joint[k] {
                out.push(format!("platform_joint[{}]", rod.label()));
            }
        }
        if !self.closure_half_ok {
            out.push("closure_half".to_string());
        }
        if !self.on_coupling {
            out.push("coupling".to_string());
        }
        if !self.tool_clear {
            out.push("tool_clear".to_string());
        }
        if !self.branch_ok {
            out.push("ik_branch".to_string());
        }
        out
    }
}

/// True when IK at the given tilt closes all four rods on the lower
/// hemispheres, i.e. every rod predicate above talks about the same sliders
/// the machine would actually use.
fn branch_consistent(geom: &MachineGeometry, pose: &Pose) -> bool {
    let Ok(sol) = inverse_kinematics_at(geom, pose) else {
        return false;
    };
    if !sol.branch_ok() {
        return false;
    }
    let p = pose.position();
    for rod in Rod::ALL {
        let rho = sol.actuators.get(rod.leg());
        let l = geom.rod_length(rod.leg());
        let Some(lower) = lower_sphere_root(geom, &p, rod, pose.alpha) else {
            return false;
        };
        if (lower - rho).abs() > ROD_RESIDUAL_REL.sqrt() * l {
            return false;
        }
    }
    true
}

/// Conjunction of every constraint for rods 11, 12, 21 and 31.
pub fn admissible(geom: &MachineGeometry, p: &Vector3<f64>, alpha: f64, d_pu: f64) -> ConstraintReport {
    let in_box = interference_box(geom, d_pu).map(|b| b.contains(p)).unwrap_or(false);
    let mut reach = [false; 4];
    let mut base = [false; 4];
    let mut platform = [false; 4];
    for rod in Rod::ALL {
        let k = rod.index();
        reach[k] = in_rod_reach(geom, p, rod, alpha);
        base[k] = in_base_joint_limits(geom, p, rod, alpha);
        platform[k] = in_platform_joint_limits(geom, p, rod, alpha);
    }
    let half = closure_half_ok(geom, alpha, p.y);
    let l4 = geom.scale().powi(4);
    let on_coupling = coupling_residual(geom, p.x, p.y, alpha).abs() < COUPLING_REL * l4;
    let pose = Pose::new(p.x, p.y, p.z, alpha);
    let tool_clear = tool_point(&pose, d_pu).z <= geom.z_tilting_table;
    let branch_ok = branch_consistent(geom, &pose);
    let admissible = in_box
        && reach.iter().all(|&b| b)
        && base.iter().all(|&b| b)
        && platform.iter().all(|&b| b)
        && half
        && on_coupling
        && tool_clear
        && branch_ok;
    ConstraintReport {
        in_box,
        in_rod_reach: reach,
        in_base_joint: base,
        in_platform_joint: platform,
        closure_half_ok: half,
        on_coupling,
        tool_clear,
        branch_ok,
        admissible,
    }
}

/// Same verdict as `admissible(..).admissible`, evaluated with
/// short-circuiting; the sweep's inner loop.
pub fn is_admissible(geom: &MachineGeometry, p: &Vector3<f64>, alpha: f64, d_pu: f64) -> bool {
    let Ok(b) = interference_box(geom, d_pu) else {
        return false;
    };
    if !b.contains(p) || !closure_half_ok(geom, alpha, p.y) {
        return false;
    }
    if coupling_residual(geom, p.x, p.y, alpha).abs() >= COUPLING_REL * geom.scale().powi(4) {
        return false;
    }
    let pose = Pose::new(p.x, p.y, p.z, alpha);
    if tool_point(&pose, d_pu).z > geom.z_tilting_table || !branch_consistent(geom, &pose) {
        return false;
    }
    Rod::ALL.iter().all(|&rod| {
        in_rod_reach(geom, p, rod, alpha)
            && in_base_joint_limits(geom, p, rod, alpha)
            && in_platform_joint_limits(geom, p, rod, alpha)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::reference_geometry;
    use crate::geometry::{JointLimitProfile, Stroke};
    use crate::kinematics::{coupling_ellipse, inverse_kinematics};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn generous(mut g: MachineGeometry) -> MachineGeometry {
        for m in g.base_joints.iter_mut().chain(g.platform_joints.iter_mut()) {
            m.profile = JointLimitProfile::unlimited();
        }
        g
    }

    fn random_point(rng: &mut ChaCha8Rng, g: &MachineGeometry) -> (Vector3<f64>, f64) {
        let b = interference_box(g, 0.0).unwrap();
        let p = Vector3::new(
            rng.gen_range(b.x_min - 0.1..b.x_max + 0.1),
            rng.gen_range(b.y_min - 0.1..b.y_max + 0.1),
            rng.gen_range(0.0..2.4),
        );
        (p, rng.gen_range(-0.9..0.9))
    }

    #[test]
    fn box_bounds_closed_form() {
        let g = reference_geometry();
        let b = interference_box(&g, 0.0).unwrap();
        assert_eq!(b.x_max, 0.80 - 0.10);
        assert_eq!(b.x_min, 0.10 - 0.20);
        assert_eq!(b.y_max, 0.70 + 0.15 - 0.20);
        assert_eq!(b.y_min, 0.20 - 0.15 - 0.70);
        assert_eq!(b.z_min, 0.15 + 0.50);
        assert_eq!(b.z_max, 2.00);
        let b2 = interference_box(&g, 0.3).unwrap();
        assert_eq!(b2.z_max, 2.00 - 0.3);
        assert_eq!(b2.x_min, b.x_min);
    }

    #[test]
    fn box_empties_for_long_tool() {
        let g = reference_geometry();
        let d = g.z_tilting_table - g.l_p2 - g.z_hood;
        assert!(matches!(interference_box(&g, d), Err(Error::EmptyBox(_))));
        assert!(matches!(interference_box(&g, -1.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn box_is_strict() {
        let g = reference_geometry();
        let b = interference_box(&g, 0.0).unwrap();
        assert!(!b.contains(&Vector3::new(b.x_max, 0.0, 1.0)));
        assert!(b.contains(&Vector3::new(b.x_max - 1e-12, 0.0, 1.0)));
    }

    #[test]
    fn reach_directly_below_guideway() {
        let g = reference_geometry();
        let alpha = 0.2;
        let rho_mid = 0.5 * (g.strokes[1].min + g.strokes[1].max);
        let a = g.virtual_slider_point(Rod::R21, rho_mid, alpha);
        let p = a + Vector3::new(0.0, 0.0, g.rod_lengths[1]);
        assert!(in_rod_reach(&g, &p, Rod::R21, alpha));
        let q = a + Vector3::new(g.rod_lengths[1] + 1e-9, 0.0, 0.0);
        assert!(!in_rod_reach(&g, &q, Rod::R21, alpha));
    }

    #[test]
    fn generous_limits_never_bind() {
        let mut g = reference_geometry();
        for m in g.base_joints.iter_mut().chain(g.platform_joints.iter_mut()) {
            *m = JointMount::identity(JointLimitProfile::unlimited());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5000 {
            let (p, alpha) = random_point(&mut rng, &g);
            for rod in Rod::ALL {
                let reach = in_rod_reach(&g, &p, rod, alpha);
                // the pole of the joint frame is the only place limits could fail
                if reach {
                    let rho = lower_sphere_root(&g, &p, rod, alpha).unwrap();
                    let v = rod_direction(&g, &p, rod, alpha, rho);
                    let pole = v.x.hypot(v.z) < 1e-9;
                    if !pole {
                        assert!(in_base_joint_limits(&g, &p, rod, alpha));
                    }
                } else {
                    assert!(!in_base_joint_limits(&g, &p, rod, alpha));
                    assert!(!in_platform_joint_limits(&g, &p, rod, alpha));
                }
            }
        }
    }

    #[test]
    fn zero_range_joint_rejects_generic_points() {
        let mut g = reference_geometry();
        let zero = JointLimitProfile::new(vec![(0.0, 0.0)]).unwrap();
        g.base_joints[2].profile = zero.clone();
        g.platform_joints[2].profile = zero;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut reached = 0;
        for _ in 0..2000 {
            let (p, alpha) = random_point(&mut rng, &g);
            if in_rod_reach(&g, &p, Rod::R21, alpha) {
                reached += 1;
                assert!(!in_base_joint_limits(&g, &p, Rod::R21, alpha));
                assert!(!in_platform_joint_limits(&g, &p, Rod::R21, alpha));
            }
        }
        assert!(reached > 100);
    }

    #[test]
    fn closure_half_examples() {
        let g = reference_geometry();
        assert!(closure_half_ok(&g, 0.1, -0.05));
        assert!(!closure_half_ok(&g, 0.1, 0.05));
        assert!(closure_half_ok(&g, -0.1, 0.05));
        assert!(closure_half_ok(&g, 0.0, 0.0));
        assert!(!closure_half_ok(&g, 0.0, 0.05));
    }

    fn forward_pose(g: &MachineGeometry, alpha: f64, t: f64, rho1: f64) -> Vector3<f64> {
        let e = coupling_ellipse(g, alpha).unwrap();
        let (x, y) = e.admissible_point_at(t);
        let (s, c) = alpha.sin_cos();
        let z = rho1 - y * (g.platform_y1 * c - g.slider_y1) / (g.platform_y1 * s);
        Vector3::new(x, y, z)
    }

    #[test]
    fn forward_generated_pose_is_admissible() {
        let g = generous(reference_geometry());
        let alpha = 0.25;
        let p = forward_pose(&g, alpha, 2.7, 1.0);
        let r = admissible(&g, &p, alpha, 0.0);
        assert!(r.admissible, "{:?}", r.failures());

        // outside the box everything else is still reported
        let mut far = p;
        far.x = 5.0;
        let r = admissible(&g, &far, alpha, 0.0);
        assert!(!r.in_box && !r.admissible);
    }

    #[test]
    fn out_of_stroke_slider_fails_reach() {
        let g = generous(reference_geometry());
        let alpha = 0.25;
        let p = forward_pose(&g, alpha, 2.7, g.strokes[0].min - 0.05);
        let r = admissible(&g, &p, alpha, 0.0);
        assert!(!r.in_rod_reach[0]);
        assert!(!r.admissible);
        let sol = inverse_kinematics(&g, p.x, p.y, p.z).unwrap();
        assert!(!sol.in_stroke[0]);
    }

    #[test]
    fn stroke_and_profile_monotonicity() {
        let g = reference_geometry();
        let mut wide = g.clone();
        for s in wide.strokes.iter_mut() {
            *s = Stroke { min: s.min - 0.1, max: s.max + 0.1 };
        }
        let mut loose = g.clone();
        for m in loose.base_joints.iter_mut().chain(loose.platform_joints.iter_mut()) {
            m.profile = m.profile.scaled(1.5).unwrap();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let (p, alpha) = random_point(&mut rng, &g);
            for rod in Rod::ALL {
                if in_rod_reach(&g, &p, rod, alpha) {
                    assert!(in_rod_reach(&wide, &p, rod, alpha));
                }
                if in_base_joint_limits(&g, &p, rod, alpha) {
                    assert!(in_base_joint_limits(&wide, &p, rod, alpha));
                    assert!(in_base_joint_limits(&loose, &p, rod, alpha));
                }
                if in_platform_joint_limits(&g, &p, rod, alpha) {
                    assert!(in_platform_joint_limits(&wide, &p, rod, alpha));
                    assert!(in_platform_joint_limits(&loose, &p, rod, alpha));
                }
            }
        }
    }

    proptest! {
        #[test]
        fn mirror_symmetry(x in -0.2..0.8f64, y in -0.8..0.8f64, z in 0.3..2.1f64, a in -0.9..0.9f64) {
            let g = reference_geometry();
            let p = Vector3::new(x, y, z);
            let q = Vector3::new(x, -y, z);
            for rod in Rod::ALL {
                let m = rod.mirror();
                prop_assert_eq!(in_rod_reach(&g, &p, rod, a), in_rod_reach(&g, &q, m, -a));
                prop_assert_eq!(in_base_joint_limits(&g, &p, rod, a), in_base_joint_limits(&g, &q, m, -a));
                prop_assert_eq!(
                    in_platform_joint_limits(&g, &p, rod, a),
                    in_platform_joint_limits(&g, &q, m, -a)
                );
            }
            let verdict = admissible(&g, &p, a, 0.1).admissible;
            prop_assert_eq!(verdict, admissible(&g, &q, -a, 0.1).admissible);
            prop_assert_eq!(verdict, is_admissible(&g, &p, a, 0.1));
        }
    }
}
