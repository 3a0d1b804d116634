use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("{what} index {index} outside [{min}, {max}]")]
    OutOfRange {
        what: &'static str,
        index: i64,
        min: i64,
        max: i64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("soliton parameters outside every branch: {0}")]
    Branch(String),

    #[error("quadrature failed to converge on [{a}, {b}] (estimate {estimate}, error {error})")]
    Quadrature {
        a: f64,
        b: f64,
        estimate: f64,
        error: f64,
    },

    #[error("profile amplitude {amplitude:e} at the boundary exceeds {limit:e}; enlarge the domain")]
    InsufficientDecay { amplitude: f64, limit: f64 },

    #[error("blow-up guard tripped at t = {time}: sup|u| = {linf:e} > {limit:e}")]
    BlowUp { time: f64, linf: f64, limit: f64 },

    #[error("Picard iteration diverging: difference grew at iterates {0} and {1}")]
    Divergence(usize, usize),

    #[error("need at least {needed} snapshots, got {got}")]
    InsufficientSnapshots { needed: usize, got: usize },

    #[error("snapshot times are not uniformly spaced")]
    NonUniformSnapshots,

    #[error("trajectory is not compactly supported in time (edge/peak ratio {0:e})")]
    NotCompact(f64),

    #[error("content beyond the target Nyquist frequency (relative {0:e})")]
    Unresolved(f64),

    #[error("snapshot format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
