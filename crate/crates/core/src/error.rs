use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{{{p},{q}}} is not hyperbolic: need p, q >= 3 and 1/p + 1/q < 1/2")]
    InvalidTessellation { p: u32, q: u32 },

    #[error("ring elements belong to different contexts (n = {left} vs n = {right})")]
    ContextMismatch { left: u64, right: u64 },

    #[error("modular elements use different moduli ({left} vs {right})")]
    ModulusMismatch { left: u64, right: u64 },

    #[error("exact division left a nonzero remainder while building the minimal polynomial of index {n}")]
    InexactDivision { n: u64 },

    #[error("group enumeration exceeded the cap of {cap} elements ({discovered} discovered after {layers} BFS layers)")]
    ResourceCap { cap: usize, discovered: usize, layers: usize },

    #[error("operator dimension {dim} exceeds the dense eigensolver cap {cap}; use KPM or a windowed solve")]
    DenseCap { dim: usize, cap: usize },

    #[error("spectral bound estimate failed: {0}")]
    BoundEstimate(String),

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("point is not on the upper hyperboloid sheet (residual {residual:e})")]
    OffSheet { residual: f64 },

    #[error("point {re} + {im}i lies outside the open unit disk")]
    OutsideDisk { re: f64, im: f64 },

    #[error("curves are sampled on different energy grids")]
    GridMismatch,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed cache file: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
