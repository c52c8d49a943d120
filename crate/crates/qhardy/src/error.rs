use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scale {0}: scales must be positive and at least 0.01x the grid spacing")]
    InvalidScale(f64),
    #[error("kernel of {taps} taps is too long for dimension {dim}")]
    KernelTooLong { taps: usize, dim: usize },
    #[error("field dimensions {0}x{1} and {2}x{3} do not match")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("quaternion argument must be nonzero")]
    ZeroArgument,
    #[error("hysteresis thresholds require low <= high (got {low} > {high})")]
    BadThresholds { low: f64, high: f64 },
    #[error("pixel values must lie in [0, 255] (found {0})")]
    PixelOutOfRange(f64),
    #[error("invalid noise parameters: {0}")]
    BadNoiseSpec(String),
    #[error("{path}: {reason}")]
    Image { path: String, reason: String },
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
