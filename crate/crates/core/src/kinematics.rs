//! Constraint residuals, the leg-I coupling ellipse, inverse kinematics and
//! joint-angle helpers.

use nalgebra::Vector3;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Leg, MachineGeometry, Rod};
use crate::roots;
use crate::tolerances::{
    DISCRIMINANT_REL, POLE_COS, ROD_RESIDUAL_REL, ROOT_GRID, UNIT_NORM, ZERO_TILT_ALPHA, ZERO_TILT_Y_REL,
};

/// Platform reference point and parasitic tilt about x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub alpha: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, z: f64, alpha: f64) -> Self {
        Self { x, y, z, alpha }
    }

    pub fn position(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }
}

/// Slider coordinates of the three legs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ActuatorState {
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
}

impl ActuatorState {
    pub fn get(&self, leg: Leg) -> f64 {
        match leg {
            Leg::I => self.rho1,
            Leg::II => self.rho2,
            Leg::III => self.rho3,
        }
    }
}

/// Locus of platform positions reachable at one tilt (leg-I closure).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingEllipse {
    /// Center abscissa, `d1 - D1`.
    pub x_center: f64,
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
}

impl CouplingEllipse {
    /// Point at parameter `t` on the full ellipse.
    pub fn point_at(&self, t: f64) -> (f64, f64) {
        let (s, c) = t.sin_cos();
        (self.x_center + self.a * c, self.b * s)
    }

    /// Point at `t` in (0, pi) on the half the closure rule admits:
    /// y < 0 for alpha > 0, y > 0 for alpha < 0, y = 0 for alpha = 0.
    pub fn admissible_point_at(&self, t: f64) -> (f64, f64) {
        let (s, c) = t.sin_cos();
        let y = if self.alpha > 0.0 {
            -self.b * s
        } else if self.alpha < 0.0 {
            self.b * s
        } else {
            0.0
        };
        (self.x_center + self.a * c, y)
    }

    /// Inverse of [`Self::admissible_point_at`] for a point known to lie on the
    /// admissible half; returns the parameter in [0, pi].
    pub fn parameter_of(&self, x: f64, y: f64) -> f64 {
        if self.a <= 0.0 {
            return 0.0;
        }
        if self.b > 0.0 {
            let c = (x - self.x_center) / self.a;
            let s = y.abs() / self.b;
            s.atan2(c)
        } else {
            ((x - self.x_center) / self.a).clamp(-1.0, 1.0).acos()
        }
    }
}

fn leg_one_q(geom: &MachineGeometry, cos_alpha: f64) -> f64 {
    let (r_big, r) = (geom.platform_y1, geom.slider_y1);
    r_big * r_big + r * r - 2.0 * r_big * r * cos_alpha
}

/// Left-hand side of the closure equation of `rod`: `|B - A|^2 - L^2`.
pub fn rod_residual(geom: &MachineGeometry, pose: &Pose, rho: f64, rod: Rod) -> f64 {
    let (s, c) = pose.alpha.sin_cos();
    let (x, y, z) = (pose.x, pose.y, pose.z);
    match rod {
        Rod::R11 => {
            let (big_r, r, l) = (geom.platform_y1, geom.slider_y1, geom.rod_lengths[0]);
            (x + geom.platform_x1 - geom.slider_x1).powi(2)
                + (y + big_r * c - r).powi(2)
                + (z + big_r * s - rho).powi(2)
                - l * l
        }
        Rod::R12 => {
            let (big_r, r, l) = (geom.platform_y1, geom.slider_y1, geom.rod_lengths[0]);
            (x + geom.platform_x1 - geom.slider_x1).powi(2)
                + (y - big_r * c + r).powi(2)
                + (z - big_r * s - rho).powi(2)
                - l * l
        }
        Rod::R21 => {
            let (big_r, r4, l) = (geom.platform_y2, geom.slider_y2, geom.rod_lengths[1]);
            (x + geom.platform_x2 - geom.slider_x2).powi(2)
                + (y - big_r * c + r4).powi(2)
                + (z - big_r * s - rho).powi(2)
                - l * l
        }
        Rod::R31 => {
            let (big_r, r4, l) = (geom.platform_y2, geom.slider_y2, geom.rod_lengths[2]);
            (x + geom.platform_x2 - geom.slider_x2).powi(2)
                + (y + big_r * c - r4).powi(2)
                + (z + big_r * s - rho).powi(2)
                - l * l
        }
    }
}

/// Leg-I coupling between position and tilt, independent of z; zero iff
/// `(x_p, y_p, alpha)` lets both leg-I rods close with a common slider.
pub fn coupling_residual(geom: &MachineGeometry, x_p: f64, y_p: f64, alpha: f64) -> f64 {
    let (s, c) = alpha.sin_cos();
    let big_r = geom.platform_y1;
    let l = geom.rod_lengths[0];
    let u = x_p + geom.platform_x1 - geom.slider_x1;
    let q = leg_one_q(geom, c);
    let rs2 = big_r * big_r * s * s;
    rs2 * u * u + q * y_p * y_p - rs2 * (l * l - q)
}

pub fn coupling_ellipse(geom: &MachineGeometry, alpha: f64) -> Result<CouplingEllipse> {
    let (s, c) = alpha.sin_cos();
    let l = geom.rod_lengths[0];
    let q = leg_one_q(geom, c);
    let a2 = l * l - q;
    if a2 < 0.0 {
        return Err(Error::ImaginaryAxis { alpha });
    }
    let big_r = geom.platform_y1;
    let b2 = big_r * big_r * s * s * a2 / q;
    Ok(CouplingEllipse {
        x_center: geom.slider_x1 - geom.platform_x1,
        a: a2.sqrt(),
        b: b2.sqrt().min(a2.sqrt()),
        alpha,
    })
}

/// `alpha_1 = arccos(r1 / R1)`; admissible tilts lie in `(-alpha_1, alpha_1)`.
pub fn max_tilt(geom: &MachineGeometry) -> f64 {
    geom.max_tilt()
}

/// Coupling equation multiplied by `(1 + T)^3`, `T = tan^2(alpha / 2)`:
/// a cubic in T with the same sign as the residual.
#[derive(Debug, Clone, Copy)]
struct CouplingCubic {
    c: [f64; 4],
}

impl CouplingCubic {
    fn new(geom: &MachineGeometry, x_p: f64, y_p: f64) -> Self {
        let (big_r, r, l) = (geom.platform_y1, geom.slider_y1, geom.rod_lengths[0]);
        let u = x_p + geom.platform_x1 - geom.slider_x1;
        let qa = (big_r - r).powi(2);
        let qb = (big_r + r).powi(2);
        let k0 = u * u - l * l + qa;
        let k1 = u * u - l * l + qb;
        let y2 = y_p * y_p;
        let r2 = 4.0 * big_r * big_r;
        Self {
            c: [
                y2 * qa,
                r2 * k0 + y2 * (2.0 * qa + qb),
                r2 * k1 + y2 * (qa + 2.0 * qb),
                y2 * qb,
            ],
        }
    }

    fn eval_t(&self, t: f64) -> f64 {
        let tt = t * t;
        ((self.c[3] * tt + self.c[2]) * tt + self.c[1]) * tt + self.c[0]
    }

    fn slope_t(&self, t: f64) -> f64 {
        let tt = t * t;
        2.0 * t * ((3.0 * self.c[3] * tt + 2.0 * self.c[2]) * tt + self.c[1])
    }
}

/// Every tilt in `(-alpha_1, alpha_1)` that puts `(x_p, y_p)` on its coupling
/// ellipse, ignoring the half-cylinder sign rule. Sorted ascending.
pub fn coupling_roots(geom: &MachineGeometry, x_p: f64, y_p: f64) -> Vec<f64> {
    let alpha1 = geom.max_tilt();
    if y_p.abs() < ZERO_TILT_Y_REL * geom.scale() {
        let a0 = match coupling_ellipse(geom, 0.0) {
            Ok(e) => e.a,
            Err(_) => return Vec::new(),
        };
        let u = x_p + geom.platform_x1 - geom.slider_x1;
        return if u.abs() < a0 { vec![0.0] } else { Vec::new() };
    }
    let t1 = (0.5 * alpha1).tan();
    let cubic = CouplingCubic::new(geom, x_p, y_p);
    let positive = roots::isolate_roots(
        |t| cubic.eval_t(t),
        |t| cubic.slope_t(t),
        0.0,
        t1,
        ROOT_GRID,
        0.0,
    );
    let mut out: Vec<f64> = positive
        .into_iter()
        .map(|t| 2.0 * t.atan())
        .filter(|a| *a > 0.0 && *a < alpha1)
        .flat_map(|a| [a, -a])
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Tilt roots compatible with the half-cylinder rule: alpha > 0 iff y_p < 0,
/// alpha = 0 iff y_p = 0.
pub fn solve_alpha(geom: &MachineGeometry, x_p: f64, y_p: f64) -> Vec<f64> {
    coupling_roots(geom, x_p, y_p)
        .into_iter()
        .filter(|&a| tilt_sign_consistent(geom, a, y_p))
        .collect()
}

/// The half-cylinder sign rule with the zero tolerances used throughout.
pub fn tilt_sign_consistent(geom: &MachineGeometry, alpha: f64, y_p: f64) -> bool {
    let y_zero = y_p.abs() < ZERO_TILT_Y_REL * geom.scale();
    let a_zero = alpha.abs() < ZERO_TILT_ALPHA;
    match (a_zero, y_zero) {
        (true, true) => true,
        (false, false) => (alpha > 0.0) == (y_p < 0.0),
        _ => false,
    }
}

/// Inverse kinematics result. Stroke limits are reported, not enforced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IkSolution {
    pub alpha: f64,
    pub actuators: ActuatorState,
    pub in_stroke: [bool; 3],
    /// `rho1 - z`, `rho2 - z + R2 sin(alpha)`, `rho3 - z - R2 sin(alpha)`;
    /// all negative on the branch used for the workspace.
    pub branch_margins: [f64; 3],
}

impl IkSolution {
    pub fn all_in_stroke(&self) -> bool {
        self.in_stroke.iter().all(|&b| b)
    }

    pub fn branch_ok(&self) -> bool {
        self.branch_margins.iter().all(|&m| m < 0.0)
    }
}

fn clamped_sqrt(d: f64, length: f64, what: &str) -> Result<f64> {
    if d >= 0.0 {
        Ok(d.sqrt())
    } else if d > -DISCRIMINANT_REL * length * length {
        Ok(0.0)
    } else {
        Err(Error::NoSolution(format!("{what} cannot close (discriminant {d:.3e})")))
    }
}

/// Inverse kinematics for a pose whose tilt is already known.
pub fn inverse_kinematics_at(geom: &MachineGeometry, pose: &Pose) -> Result<IkSolution> {
    let (s, c) = pose.alpha.sin_cos();
    let (x, y, z) = (pose.x, pose.y, pose.z);
    let [l1, l2, l3] = geom.rod_lengths;

    let u1 = x + geom.platform_x1 - geom.slider_x1;
    let (big_r1, r1) = (geom.platform_y1, geom.slider_y1);
    let d1 = l1 * l1 - u1 * u1 - (y + big_r1 * c - r1).powi(2);
    let w1 = clamped_sqrt(d1, l1, "rod 11")?;
    let minus = z + big_r1 * s - w1;
    let plus = z + big_r1 * s + w1;
    // both roots close rod 11; rod 12 picks the one on the coupling surface.
    // When both close it (zero tilt on y = 0) the lower-hemisphere root wins.
    let res_minus = rod_residual(geom, pose, minus, Rod::R12).abs();
    let res_plus = rod_residual(geom, pose, plus, Rod::R12).abs();
    let closes = res_minus <= ROD_RESIDUAL_REL * l1 * l1;
    let rho1 = if !closes && res_plus < res_minus { plus } else { minus };

    let u2 = x + geom.platform_x2 - geom.slider_x2;
    let (big_r2, r4) = (geom.platform_y2, geom.slider_y2);
    let d2 = l2 * l2 - u2 * u2 - (y - big_r2 * c + r4).powi(2);
    let rho2 = z - big_r2 * s - clamped_sqrt(d2, l2, "rod 21")?;
    let d3 = l3 * l3 - u2 * u2 - (y + big_r2 * c - r4).powi(2);
    let rho3 = z + big_r2 * s - clamped_sqrt(d3, l3, "rod 31")?;

    let actuators = ActuatorState { rho1, rho2, rho3 };
    let in_stroke = [
        geom.stroke(Leg::I).contains(rho1),
        geom.stroke(Leg::II).contains(rho2),
        geom.stroke(Leg::III).contains(rho3),
    ];
    Ok(IkSolution {
        alpha: pose.alpha,
        actuators,
        in_stroke,
        branch_margins: [rho1 - z, rho2 - z + big_r2 * s, rho3 - z - big_r2 * s],
    })
}

/// Full inverse kinematics: tilt from the coupling, then the three sliders on
/// the branch where every rod points down from its slider.
pub fn inverse_kinematics(geom: &MachineGeometry, x_p: f64, y_p: f64, z_p: f64) -> Result<IkSolution> {
    let roots = solve_alpha(geom, x_p, y_p);
    match roots.as_slice() {
        [] => Err(Error::NoSolution(format!(
            "({x_p}, {y_p}) lies on no admissible coupling ellipse"
        ))),
        [alpha] => inverse_kinematics_at(geom, &Pose::new(x_p, y_p, z_p, *alpha)),
        _ => Err(Error::Ambiguous { roots }),
    }
}

/// Rod end in a joint frame after rotating by `delta` about y then `beta`
/// about the new x.
pub fn spherical_joint_point(length: f64, delta: f64, beta: f64) -> Vector3<f64> {
    let (sd, cd) = delta.sin_cos();
    let (sb, cb) = beta.sin_cos();
    Vector3::new(length * sd * cb, -length * sb, length * cd * cb)
}

/// `(delta, beta)` of a unit rod direction expressed in a joint frame.
pub fn joint_angles_from_rod(v: &Vector3<f64>) -> Result<(f64, f64)> {
    let norm = v.norm();
    if (norm - 1.0).abs() > UNIT_NORM {
        return Err(Error::Precondition(format!("rod direction has norm {norm}, expected 1")));
    }
    let beta = -v.y.clamp(-1.0, 1.0).asin();
    if v.x.hypot(v.z) < POLE_COS {
        return Err(Error::DegenerateDirection);
    }
    Ok((v.x.atan2(v.z), beta))
}

/// Tool center point at distance `d_pu` from P along the platform axis.
pub fn tool_point(pose: &Pose, d_pu: f64) -> Vector3<f64> {
    let (s, c) = pose.alpha.sin_cos();
    Vector3::new(pose.x, pose.y - d_pu * s, pose.z + d_pu * c)
}
