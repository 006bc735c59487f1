use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("query at t={t} outside the flow domain: {reason}")]
    OutOfDomain { t: f64, reason: String },

    #[error("grid flow has only been advanced to t={available}, requested t={requested}")]
    NotAdvanced { requested: f64, available: f64 },

    #[error("CFL bound violated: dt={dt} exceeds {limit}")]
    Cfl { dt: f64, limit: f64 },

    #[error("non-positive density {rho} at node ({i}, {j})")]
    NonPositiveDensity { rho: f64, i: usize, j: usize },

    #[error("non-finite value detected in {0}")]
    NotFinite(&'static str),

    #[error("boundary self-intersects (component {component}, segments {a} and {b})")]
    SelfIntersection { component: usize, a: usize, b: usize },

    #[error("degenerate boundary element {0}")]
    DegenerateElement(usize),

    #[error("target point is inside the volume")]
    TargetInside,

    #[error("boundary distance {distance} does not exceed epsilon {epsilon}")]
    TooClose { distance: f64, epsilon: f64 },

    /// A node reached the singularity floor around `x0`.
    #[error("volume attained the target point at t={t} (|x - x0| = {radius})")]
    AttainedTarget { t: f64, radius: f64 },

    #[error("degenerate threshold: {0}")]
    Degenerate(String),

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}
