//! Numerical thresholds shared across modules.
//!
//! Length-like tolerances are relative to the leg-I rod length `L1`; the
//! coupling residual has units of length^4 and is compared against `L1^4`.

/// Coupling residual accepted as "on the ellipse", times `L1^4`.
pub const COUPLING_REL: f64 = 1e-10;

/// Residual a refined tilt root must reach, times `L1^4`.
pub const ROOT_RESIDUAL_REL: f64 = 1e-12;

/// Rod closure residual accepted after inverse kinematics, times `L_i^2`.
pub const ROD_RESIDUAL_REL: f64 = 1e-10;

/// |y_p| below this (times `L1`) is treated as the zero-tilt branch.
pub const ZERO_TILT_Y_REL: f64 = 1e-12;

/// |alpha| below this (radians) is treated as zero in the half-cylinder rule.
pub const ZERO_TILT_ALPHA: f64 = 1e-12;

/// Grid size used to bracket tilt roots.
pub const ROOT_GRID: usize = 256;

/// Tilt grid endpoints are pulled in by this fraction of `alpha_1`.
pub const ALPHA_EDGE_REL: f64 = 1e-6;

/// Negative discriminants above `-DISCRIMINANT_REL * L_i^2` are clamped to 0.
pub const DISCRIMINANT_REL: f64 = 1e-12;

/// Unit-vector norm tolerance for joint-angle extraction.
pub const UNIT_NORM: f64 = 1e-9;

/// `cos(beta)` below this makes delta undefined.
pub const POLE_COS: f64 = 1e-12;
