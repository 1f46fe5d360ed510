use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("length mismatch: offer has {offer} customers, profile has {profile}")]
    LengthMismatch { offer: usize, profile: usize },

    #[error("bundle price {bundle_price} is not positive for n = {n}; the big-bundle construction is vacuous")]
    VacuousBundle { n: usize, bundle_price: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
