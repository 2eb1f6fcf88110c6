use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("zero-length plane normal")]
    ZeroNormal,

    #[error("unknown metric `{0}`")]
    UnknownMetric(String),

    #[error("unknown container `{0}`")]
    UnknownContainer(String),

    #[error("unknown benchmark suite `{0}`")]
    UnknownSuite(String),

    #[error("shell {shell} needs at least {min} {what}, got {got}")]
    TooFewElements {
        shell: usize,
        what: &'static str,
        min: usize,
        got: usize,
    },

    #[error("edge ({0}, {1}) is shared by {2} faces, expected exactly 2")]
    NonManifold(usize, usize, usize),

    #[error("face {face} is not planar (deviation {deviation:e})")]
    NonPlanarFace { face: usize, deviation: f64 },

    #[error("face {face} is degenerate: {reason}")]
    DegenerateFace { face: usize, reason: String },

    #[error("face {0} is not convex")]
    NonConvexFace(usize),

    #[error("container interior is empty or faces cannot be oriented (face {0})")]
    EmptyInterior(usize),

    #[error("non-finite coordinate in {0}")]
    NonFinite(&'static str),

    #[error("index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("rejection sampling exhausted after {attempts} attempts ({accepted} accepted)")]
    SamplingExhausted { attempts: usize, accepted: usize },

    #[error("no feasible configuration found at D = {radius} (energy {energy:e})")]
    InfeasibleResult { radius: f64, energy: f64 },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
