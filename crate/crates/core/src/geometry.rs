//! Machine geometry, joint-limit profiles and rigid frames.
//!
//! Conventions: the fixed frame has its z axis pointing downward, slider
//! coordinates `rho` are the z coordinates of the slider joint centers, and
//! the platform frame origin `P` stays parallel to the fixed frame except for
//! the parasitic tilt `alpha` about x.

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kinematics::Pose;

/// The three legs of the parallel module.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Leg {
    I,
    II,
    III,
}

impl Leg {
    pub const ALL: [Leg; 3] = [Leg::I, Leg::II, Leg::III];

    pub fn index(self) -> usize {
        match self {
            Leg::I => 0,
            Leg::II => 1,
            Leg::III => 2,
        }
    }
}

/// The rods that bound the workspace. The second rods of the parallelogram
/// legs II and III impose the same limits as their partners and are not
/// modeled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Rod {
    R11,
    R12,
    R21,
    R31,
}

impl Rod {
    pub const ALL: [Rod; 4] = [Rod::R11, Rod::R12, Rod::R21, Rod::R31];

    pub fn leg(self) -> Leg {
        match self {
            Rod::R11 | Rod::R12 => Leg::I,
            Rod::R21 => Leg::II,
            Rod::R31 => Leg::III,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Rod::R11 => 0,
            Rod::R12 => 1,
            Rod::R21 => 2,
            Rod::R31 => 3,
        }
    }

    /// Two-digit label used in configuration keys.
    pub fn label(self) -> &'static str {
        match self {
            Rod::R11 => "11",
            Rod::R12 => "12",
            Rod::R21 => "21",
            Rod::R31 => "31",
        }
    }

    pub fn from_label(label: &str) -> Option<Rod> {
        Rod::ALL.into_iter().find(|r| r.label() == label)
    }

    /// The rod that maps onto this one under the reflection y -> -y.
    pub fn mirror(self) -> Rod {
        match self {
            Rod::R11 => Rod::R12,
            Rod::R12 => Rod::R11,
            Rod::R21 => Rod::R31,
            Rod::R31 => Rod::R21,
        }
    }
}

/// Actuator stroke `[min, max]` of one slider.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stroke {
    pub min: f64,
    pub max: f64,
}

impl Stroke {
    pub fn contains(&self, rho: f64) -> bool {
        rho >= self.min && rho <= self.max
    }

    pub fn len(&self) -> f64 {
        self.max - self.min
    }
}

/// Piecewise-linear maximum of |beta| as a function of delta, as supplied by
/// joint manufacturers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointLimitProfile {
    samples: Vec<(f64, f64)>,
    delta2: f64,
}

impl JointLimitProfile {
    /// Builds a profile from `(delta, beta_max)` pairs with strictly increasing
    /// delta and non-negative beta_max.
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Validation("joint profile is empty".into()));
        }
        for &(d, b) in &samples {
            if !d.is_finite() || !b.is_finite() {
                return Err(Error::Validation("joint profile has a non-finite sample".into()));
            }
            if b < 0.0 {
                return Err(Error::Validation(format!(
                    "joint profile beta_max < 0 at delta = {d}"
                )));
            }
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Validation(
                "joint profile delta values must be strictly increasing".into(),
            ));
        }
        let delta2 = samples.iter().map(|s| s.0.abs()).fold(0.0, f64::max);
        Ok(Self { samples, delta2 })
    }

    /// A profile that never binds: |delta| and |beta| up to pi/2.
    pub fn unlimited() -> Self {
        use std::f64::consts::FRAC_PI_2;
        Self::new(vec![(-FRAC_PI_2, FRAC_PI_2), (FRAC_PI_2, FRAC_PI_2)])
            .expect("static profile is valid")
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    /// Largest |delta| over the samples.
    pub fn delta2(&self) -> f64 {
        self.delta2
    }

    /// Range of delta covered by the samples.
    pub fn delta_span(&self) -> (f64, f64) {
        (self.samples[0].0, self.samples[self.samples.len() - 1].0)
    }

    /// Linear interpolation of beta_max; exact at the samples.
    pub fn beta_max_at(&self, delta: f64) -> Result<f64> {
        let (lo, hi) = self.delta_span();
        if !(delta >= lo && delta <= hi) {
            return Err(Error::OutOfRange { delta, min: lo, max: hi });
        }
        let i = self.samples.partition_point(|s| s.0 <= delta);
        // samples[i - 1].0 <= delta < samples[i].0, or delta is the last sample
        let (d0, b0) = self.samples[i - 1];
        if d0 == delta || i == self.samples.len() {
            return Ok(b0);
        }
        let (d1, b1) = self.samples[i];
        Ok(b0 + (b1 - b0) * (delta - d0) / (d1 - d0))
    }

    /// Same samples with every beta_max multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.samples.iter().map(|&(d, b)| (d, b * factor)).collect())
    }
}

/// Placement of a passive spherical joint: rotation about y by `psi`, then
/// about the new x by `theta`, then about the new z by `phi`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointMount {
    pub psi: f64,
    pub theta: f64,
    pub phi: f64,
    pub profile: JointLimitProfile,
}

impl JointMount {
    pub fn identity(profile: JointLimitProfile) -> Self {
        Self { psi: 0.0, theta: 0.0, phi: 0.0, profile }
    }

    /// Expanded `Rot(y, psi) Rot(x, theta) Rot(z, phi)`.
    pub fn rotation(&self) -> Matrix3<f64> {
        let (sp, cp) = self.psi.sin_cos();
        let (st, ct) = self.theta.sin_cos();
        let (sf, cf) = self.phi.sin_cos();
        Matrix3::new(
            cp * cf + sp * st * sf,
            sp * st * cf - cp * sf,
            sp * ct,
            ct * sf,
            ct * cf,
            -st,
            cp * sf * st - sp * cf,
            cp * st * cf + sp * sf,
            cp * ct,
        )
    }

    /// Admissible delta interval: the profile span clipped so the rod stays
    /// on the singularity-free side of the guideway.
    pub fn delta_window(&self) -> (f64, f64) {
        use std::f64::consts::FRAC_PI_2;
        let d2 = self.profile.delta2();
        let (lo, hi) = self.profile.delta_span();
        let lo = lo.max(-d2).max(-FRAC_PI_2 - self.psi);
        let hi = hi.min(d2).min(FRAC_PI_2 - self.psi);
        (lo, hi)
    }

    /// True when local joint angles `(delta, beta)` respect the mount's limits.
    pub fn accepts(&self, delta: f64, beta: f64) -> bool {
        let (lo, hi) = self.delta_window();
        if !(delta >= lo && delta <= hi) {
            return false;
        }
        match self.profile.beta_max_at(delta) {
            Ok(beta_max) => beta.abs() <= beta_max,
            Err(_) => false,
        }
    }
}

/// Rotation plus translation; the constant bottom row of the homogeneous
/// matrix is not stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl RigidTransform {
    /// Maps a point expressed in this frame into the parent frame.
    pub fn apply(&self, local: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * local + self.translation
    }

    /// Expresses a parent-frame direction in this frame.
    pub fn to_local_direction(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.rotation.transpose() * v
    }

    /// max |R^T R - I| entry.
    pub fn orthonormality_error(&self) -> f64 {
        (self.rotation.transpose() * self.rotation - Matrix3::identity()).amax()
    }
}

/// All machine dimensions. Field docs give the configuration key.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MachineGeometry {
    /// `D1`: x offset of the leg-I platform attachments from P.
    pub platform_x1: f64,
    /// `d1`: x of the leg-I guideway.
    pub slider_x1: f64,
    /// `D2`: x offset of the leg-II/III platform attachments from P.
    pub platform_x2: f64,
    /// `d2`: x of the leg-II/III guideways.
    pub slider_x2: f64,
    /// `R1`: half-spacing of the leg-I platform attachments.
    pub platform_y1: f64,
    /// `r1`: half-spacing of the leg-I slider attachments.
    pub slider_y1: f64,
    /// `R2`: y offset of the leg-II/III platform attachments.
    pub platform_y2: f64,
    /// `r4`: y offset of the leg-II/III slider attachments.
    pub slider_y2: f64,
    /// `L1`, `L2`, `L3`.
    pub rod_lengths: [f64; 3],
    /// `rhoN_min`, `rhoN_max`.
    pub strokes: [Stroke; 3],
    /// `base_joint.<ij>.*`, indexed by [`Rod::index`].
    pub base_joints: [JointMount; 4],
    /// `platform_joint.<ij>.*`, indexed by [`Rod::index`].
    pub platform_joints: [JointMount; 4],
    /// `z_hood`.
    pub z_hood: f64,
    /// `z_tilting_table`.
    pub z_tilting_table: f64,
    /// `l_p1`: platform to tool mount.
    pub l_p1: f64,
    /// `l_p2`: platform to hood side.
    pub l_p2: f64,
}

impl MachineGeometry {
    pub fn rod_length(&self, leg: Leg) -> f64 {
        self.rod_lengths[leg.index()]
    }

    pub fn stroke(&self, leg: Leg) -> Stroke {
        self.strokes[leg.index()]
    }

    pub fn base_joint(&self, rod: Rod) -> &JointMount {
        &self.base_joints[rod.index()]
    }

    pub fn platform_joint(&self, rod: Rod) -> &JointMount {
        &self.platform_joints[rod.index()]
    }

    /// Leg-I rod length; the reference length scale for tolerances.
    pub fn scale(&self) -> f64 {
        self.rod_lengths[0]
    }

    /// Largest admissible tilt magnitude, `arccos(r1 / R1)`.
    pub fn max_tilt(&self) -> f64 {
        (self.slider_y1 / self.platform_y1).acos()
    }

    /// `B_ij - P` at tilt `alpha`.
    pub fn platform_offset(&self, rod: Rod, alpha: f64) -> Vector3<f64> {
        let (s, c) = alpha.sin_cos();
        match rod {
            Rod::R11 => Vector3::new(self.platform_x1, self.platform_y1 * c, self.platform_y1 * s),
            Rod::R12 => Vector3::new(self.platform_x1, -self.platform_y1 * c, -self.platform_y1 * s),
            Rod::R21 => Vector3::new(self.platform_x2, -self.platform_y2 * c, -self.platform_y2 * s),
            Rod::R31 => Vector3::new(self.platform_x2, self.platform_y2 * c, self.platform_y2 * s),
        }
    }

    /// Slider joint center `A_ij` at slider coordinate `rho`.
    pub fn slider_point(&self, rod: Rod, rho: f64) -> Vector3<f64> {
        match rod {
            Rod::R11 => Vector3::new(self.slider_x1, self.slider_y1, rho),
            Rod::R12 => Vector3::new(self.slider_x1, -self.slider_y1, rho),
            Rod::R21 => Vector3::new(self.slider_x2, -self.slider_y2, rho),
            Rod::R31 => Vector3::new(self.slider_x2, self.slider_y2, rho),
        }
    }

    /// `A'_ij = A_ij + (P - B_ij)`: the slider joint seen from P.
    pub fn virtual_slider_point(&self, rod: Rod, rho: f64, alpha: f64) -> Vector3<f64> {
        self.slider_point(rod, rho) - self.platform_offset(rod, alpha)
    }

    /// `A'_ij(rho) = guide + (0, 0, rho)`; returns `guide`.
    pub fn virtual_guide(&self, rod: Rod, alpha: f64) -> Vector3<f64> {
        self.virtual_slider_point(rod, 0.0, alpha)
    }

    /// Checks every geometry invariant; the error names the first violation.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("D1", self.platform_x1),
            ("d1", self.slider_x1),
            ("D2", self.platform_x2),
            ("d2", self.slider_x2),
            ("R1", self.platform_y1),
            ("r1", self.slider_y1),
            ("R2", self.platform_y2),
            ("r4", self.slider_y2),
            ("L1", self.rod_lengths[0]),
            ("L2", self.rod_lengths[1]),
            ("L3", self.rod_lengths[2]),
            ("l_p1", self.l_p1),
            ("l_p2", self.l_p2),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Validation(format!("{name} must be finite and > 0, got {value}")));
            }
        }
        let finite = [
            ("z_hood", self.z_hood),
            ("z_tilting_table", self.z_tilting_table),
        ];
        for (name, value) in finite {
            if !value.is_finite() {
                return Err(Error::Validation(format!("{name} must be finite")));
            }
        }
        for (i, s) in self.strokes.iter().enumerate() {
            if !(s.min.is_finite() && s.max.is_finite()) {
                return Err(Error::Validation(format!("rho{} stroke must be finite", i + 1)));
            }
            if s.min >= s.max {
                return Err(Error::Validation(format!(
                    "rho{n}_min >= rho{n}_max: empty stroke [{}, {}]",
                    s.min,
                    s.max,
                    n = i + 1
                )));
            }
        }
        for (side, mounts) in [("base_joint", &self.base_joints), ("platform_joint", &self.platform_joints)] {
            for rod in Rod::ALL {
                let m = &mounts[rod.index()];
                if !(m.psi.is_finite() && m.theta.is_finite() && m.phi.is_finite()) {
                    return Err(Error::Validation(format!(
                        "{side}.{} mount angles must be finite",
                        rod.label()
                    )));
                }
            }
        }
        let (big_r1, r1) = (self.platform_y1, self.slider_y1);
        if r1 >= big_r1 {
            return Err(Error::Validation(format!(
                "r1 >= R1 forbids tilt: cos(alpha) > r1/R1 is unsatisfiable (r1 = {r1}, R1 = {big_r1})"
            )));
        }
        if self.rod_lengths[0] <= big_r1 - r1 {
            return Err(Error::Validation("L1 <= R1 - r1: leg I cannot close at alpha = 0".into()));
        }
        let dy = self.platform_y2 - self.slider_y2;
        for (name, len) in [("L2", self.rod_lengths[1]), ("L3", self.rod_lengths[2])] {
            if len * len <= dy * dy {
                return Err(Error::Validation(format!(
                    "{name}^2 <= (R2 - r4)^2: leg cannot close at alpha = 0"
                )));
            }
        }
        if self.z_hood >= self.z_tilting_table {
            return Err(Error::Validation("z_hood >= z_tilting_table".into()));
        }
        if self.z_hood + self.l_p2 >= self.z_tilting_table - self.l_p1 {
            return Err(Error::Validation(
                "z_hood + l_p2 >= z_tilting_table - l_p1: no z travel for a zero-length tool".into(),
            ));
        }
        if self.slider_x2 - self.platform_x2 >= self.slider_x1 - self.platform_x1 {
            return Err(Error::Validation(
                "d2 - D2 >= d1 - D1: interference box is empty along x".into(),
            ));
        }
        if self.slider_y2 - self.platform_y2 - self.rod_lengths[2]
            >= self.rod_lengths[1] + self.platform_y2 - self.slider_y2
        {
            return Err(Error::Validation("interference box is empty along y".into()));
        }
        Ok(())
    }
}

/// `T_{ij,0}`: frame of the base joint of `rod`, centered at `A'_ij(rho, alpha)`.
pub fn base_joint_frame(geom: &MachineGeometry, rod: Rod, rho: f64, alpha: f64) -> RigidTransform {
    RigidTransform {
        rotation: geom.base_joint(rod).rotation(),
        translation: geom.virtual_slider_point(rod, rho, alpha),
    }
}

/// Frame of the platform joint of `rod`. The joint rides on the platform, so
/// its mount rotation is composed with the platform tilt about x; the origin
/// is P.
pub fn platform_joint_frame(geom: &MachineGeometry, rod: Rod, pose: &Pose) -> RigidTransform {
    let (s, c) = pose.alpha.sin_cos();
    let tilt = Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c);
    RigidTransform {
        rotation: tilt * geom.platform_joint(rod).rotation(),
        translation: pose.position(),
    }
}

/// Slider-side and platform-side joint centers `(A_ij, B_ij)`.
pub fn attachment_points(
    geom: &MachineGeometry,
    pose: &Pose,
    rho: f64,
    rod: Rod,
) -> (Vector3<f64>, Vector3<f64>) {
    let a = geom.slider_point(rod, rho);
    let b = pose.position() + geom.platform_offset(rod, pose.alpha);
    (a, b)
}
