use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed configuration line.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A geometry invariant does not hold. The message names the invariant.
    #[error("invalid geometry: {0}")]
    Validation(String),

    #[error("delta = {delta} outside joint profile range [{min}, {max}]")]
    OutOfRange { delta: f64, min: f64, max: f64 },

    /// Leg I cannot close at this tilt; the coupling ellipse has no real axes.
    #[error("leg I cannot close at alpha = {alpha}: coupling ellipse axis is imaginary")]
    ImaginaryAxis { alpha: f64 },

    #[error("no inverse kinematic solution: {0}")]
    NoSolution(String),

    #[error("inverse kinematics is ambiguous: {} sign-consistent tilt roots {roots:?}", roots.len())]
    Ambiguous { roots: Vec<f64> },

    #[error("rod direction is at the joint pole (cos beta < 1e-12); delta is undefined")]
    DegenerateDirection,

    #[error("empty interference box: {0}")]
    EmptyBox(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("slice topology: {0}")]
    Topology(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
