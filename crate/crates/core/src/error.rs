use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("photon-pair count must be at least 1, got {0}")]
    InvalidPhotonNumber(u32),

    #[error("{name} = {value} is outside its domain {domain}")]
    OutOfDomain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("operands live on different Fock sectors ({left} vs {right} photons)")]
    BasisMismatch { left: u32, right: u32 },

    #[error("{what} requires the two-photon (n = 1) sector, got n = {n}")]
    WrongSector { what: &'static str, n: u32 },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("state is not normalized (squared norm {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error("density operator is invalid: {0}")]
    InvalidDensity(String),

    #[error("measurement is invalid: {0}")]
    InvalidMeasurement(String),

    #[error("white noise given both in the probe and as an argument")]
    DoubleNoise,

    #[error("divergent Fisher-information term for outcome {outcome} at phi = {phi}")]
    DivergentTerm { outcome: String, phi: f64 },

    #[error("closed form has a vanishing denominator at phi = {phi}")]
    DenominatorUnderflow { phi: f64 },

    #[error("scale of outcome {0} is unidentifiable: theory curve is constant")]
    Unidentifiable(String),

    #[error("target {target} is outside the attainable range [{lo}, {hi}]")]
    TargetOutOfRange { target: f64, lo: f64, hi: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("replayed output differs from the recorded run: {0}")]
    ReplayMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, domain: &'static str) -> Self {
        Error::OutOfDomain {
            name,
            value,
            domain,
        }
    }

    /// Process exit code: 2 for domain errors, 3 for numerical failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidPhotonNumber(_)
            | Error::OutOfDomain { .. }
            | Error::BasisMismatch { .. }
            | Error::WrongSector { .. }
            | Error::DoubleNoise
            | Error::TargetOutOfRange { .. }
            | Error::Config(_) => 2,
            Error::NotHermitian { .. }
            | Error::NotNormalized { .. }
            | Error::InvalidDensity(_)
            | Error::InvalidMeasurement(_)
            | Error::DivergentTerm { .. }
            | Error::DenominatorUnderflow { .. }
            | Error::Unidentifiable(_)
            | Error::Numerical(_) => 3,
            Error::Io(_) | Error::Json(_) | Error::ReplayMismatch(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
