use thiserror::Error;

use crate::recursion::VolumeKey;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unstable: 2g-2+n must be positive (got g={g}, n={n})")]
    Unstable { g: u32, n: usize },

    #[error("variable index {index} out of range for {nvars} variables")]
    VariableOutOfRange { index: usize, nvars: usize },

    #[error("polynomials live in different variable spaces ({0} vs {1})")]
    NvarsMismatch(usize, usize),

    #[error("parity violation: {0}")]
    Parity(String),

    #[error("inconsistent right-hand side: {0}")]
    Inconsistent(String),

    #[error("missing dependency {0} in volume table")]
    MissingDependency(VolumeKey),

    #[error("invariant violated for {key}: {what}")]
    Invariant { key: VolumeKey, what: String },

    #[error("intersection index has total {got}, top degree is {want}")]
    NotTopDegree { got: u32, want: u32 },

    #[error("top-degree coefficient {0} is not pi-free")]
    NotPiFree(String),

    #[error("series truncated at exponent {0}: principal part not determined")]
    Truncated(i32),

    #[error("exact division failed: {0}")]
    NotDivisible(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("parameter within {distance:e} of a kernel pole at {pole}")]
    PoleProximity { pole: f64, distance: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("cache error: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
