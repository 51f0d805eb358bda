use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid size {0} must be a power of two and at least 16")]
    InvalidGridSize(usize),
    #[error("box length {0} must be positive and finite")]
    InvalidBoxLength(f64),
    #[error("dimension mismatch: expected {expected} samples, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("fractional power {0} outside (-1, 1]")]
    FractionalPowerOutOfRange(f64),
    #[error("negative fractional power {gamma} applied to a field with nonzero mean {mean}")]
    NonzeroMeanNegativePower { gamma: f64, mean: f64 },
    #[error("cutoff sharpness {0} outside (0, 50]")]
    InvalidSharpness(f64),
    #[error("cutoff profile violates the partition of unity by {0:e}")]
    PartitionOfUnity(f64),
    #[error("only p = 2 Besov norms are supported, got p = {0}")]
    UnsupportedIntegrability(f64),
    #[error("Chemin-Lerner norm: {0}")]
    TimeSamples(&'static str),
    #[error("vacuum: min(1 + a) = {min_density} is below {threshold}")]
    Vacuum { min_density: f64, threshold: f64 },
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParams(&'static str),
    #[error("negative wavenumber magnitude {0}")]
    NegativeWavenumber(f64),
    #[error("cubic root finder did not converge at r = {0}")]
    RootFinder(f64),
    #[error("sigma {0} outside (0, 1]")]
    SigmaOutOfRange(f64),
    #[error("gamma {gamma} outside (-sigma, 0] for sigma = {sigma}")]
    GammaOutOfRange { gamma: f64, sigma: f64 },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("time step {dt} exceeds the explicit stability bound {bound}")]
    TimeStepTooLarge { dt: f64, bound: f64 },
    #[error("decay fit: {0}")]
    Fit(&'static str),
    #[error("initial data: {0}")]
    InitialData(&'static str),
}
