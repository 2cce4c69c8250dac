use thiserror::Error;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Core(#[from] grcim_core::Error),

    #[error("invalid sweep: {0}")]
    InvalidSpec(String),

    #[error("SNR grids do not align: {0}")]
    Alignment(String),

    #[error("a comparison needs at least two sweeps, got {0}")]
    TooFewSpecs(usize),

    #[error("malformed input: {0}")]
    Format(String),

    #[error("cannot build worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
