use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter `{name}` = {value} is out of range: {expected}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("point is antipodal to the chart pole (<p, pole> = {inner})")]
    AntipodalPoint { inner: f64 },

    #[error("point is not on the unit sphere (|<p,p> - 1| = {deviation:e})")]
    NotOnSphere { deviation: f64 },

    #[error("tangent vectors are attached to different base points")]
    BaseMismatch,

    #[error("vector is not tangent at its base point (<v,p> = {inner:e})")]
    NotTangent { inner: f64 },

    #[error("sampled field derivative requested at s = {s} within two steps of the grid boundary")]
    DomainBoundary { s: f64 },

    #[error("sampled field needs at least 5 points and a positive step (got {len} points, step {step})")]
    InvalidGrid { len: usize, step: f64 },

    #[error("chart metric is singular or ill-conditioned (condition number {condition:e})")]
    SingularMetric { condition: f64 },

    #[error("curve is degenerate at s = {s} (speed {speed:e})")]
    DegenerateCurve { s: f64, speed: f64 },

    #[error("curve is not unit speed at s = {s} (g-speed {speed})")]
    NotUnitSpeed { s: f64, speed: f64 },

    #[error("curve is not Legendre (max |eta(T)| = {max_eta:e})")]
    NotLegendre { max_eta: f64 },

    #[error("invalid Legendre frame: {reason}")]
    InvalidFrame { reason: String },

    #[error("geodesic direction must satisfy c1^2 + c2^2 = 1 (got {norm_sq})")]
    InvalidDirection { norm_sq: f64 },

    #[error("linear system is ill-conditioned: {reason}")]
    IllConditioned { reason: String },

    #[error("Gram solution is inconsistent with orthogonal coefficient vectors: {reason}")]
    InconsistentSolution { reason: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
