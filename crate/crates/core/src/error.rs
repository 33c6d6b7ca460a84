use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("momentum {p} is not on the 2π/L grid for L = {sites}")]
    MomentumGrid { p: f64, sites: usize },
    #[error("frequency {p0} is not a Matsubara frequency for β = {beta}")]
    MatsubaraGrid { p0: f64, beta: f64 },
    #[error("sector dimension {dim} exceeds the cap {cap}; reduce L or restrict the sector selection")]
    DimensionCap { dim: usize, cap: usize },
    #[error("operator `{0}` mixes particle-number sectors")]
    NotNumberConserving(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("ground state is {0}-fold degenerate")]
    DegenerateGround(usize),
    #[error("exponent overflow in complex-time evaluation (real part {0:.3e})")]
    Overflow(f64),
    #[error("divergent zero-temperature limit: {0}")]
    Divergent(String),
    #[error("|λ/J| = {0} lies outside the gapless regime")]
    OutOfPhase(f64),
    #[error("eigensolver failed: {0}")]
    Eigen(String),
    #[error("integrator failed: {0}")]
    Integrator(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
