//! Constant-orientation workspace of a three-leg parallel module with a
//! parasitic tilt: geometry, kinematics, constraint predicates, the
//! slice-and-sweep workspace builder and result export.

pub mod config;
pub mod constraints;
pub mod error;
pub mod export;
pub mod geometry;
pub mod kinematics;
pub mod roots;
pub mod sweep;
pub mod tolerances;

pub use config::{load_machine_config, load_machine_config_file, reference_geometry};
pub use error::{Error, Result};
pub use geometry::{JointLimitProfile, JointMount, Leg, MachineGeometry, RigidTransform, Rod, Stroke};
pub use kinematics::{ActuatorState, CouplingEllipse, IkSolution, Pose};
