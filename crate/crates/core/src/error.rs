use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),

    #[error("Fermi level is degenerate at filling {filling}: gap {gap:e}")]
    DegenerateFermiLevel { filling: usize, gap: f64 },

    #[error("evolved orbitals lost rank: smallest |R_kk| = {0:e}")]
    RankDeficient(f64),

    #[error("found {found} characteristic roots, expected {expected}")]
    RootCountMismatch { found: usize, expected: usize },

    #[error("Floquet eigenvector normalization underflow at E = {0}")]
    NormalizationUnderflow(f64),

    #[error("sector dimension {dim} exceeds the limit of {limit}")]
    SectorTooLarge { dim: usize, limit: usize },

    #[error("Floquet operator is not unitary: max |U^dag U - I| = {0:e}")]
    NonNormalUnitary(f64),

    #[error("K = {k} is out of range for a sector of size {size}")]
    KOutOfRange { k: usize, size: usize },

    #[error("fit window [{start}, {end}] holds {len} points, need at least {min}")]
    WindowTooShort {
        start: usize,
        end: usize,
        len: usize,
        min: usize,
    },

    #[error("fewer than two prominent entropy minima found")]
    NoRevivalDetected,

    #[error("eigendecomposition failed to converge")]
    EigenSolver,
}

impl Error {
    /// Stable variant name, used by the command line front end on stderr.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::NegativeTime(_) => "NegativeTime",
            Error::DegenerateFermiLevel { .. } => "DegenerateFermiLevel",
            Error::RankDeficient(_) => "RankDeficient",
            Error::RootCountMismatch { .. } => "RootCountMismatch",
            Error::NormalizationUnderflow(_) => "NormalizationUnderflow",
            Error::SectorTooLarge { .. } => "SectorTooLarge",
            Error::NonNormalUnitary(_) => "NonNormalUnitary",
            Error::KOutOfRange { .. } => "KOutOfRange",
            Error::WindowTooShort { .. } => "WindowTooShort",
            Error::NoRevivalDetected => "NoRevivalDetected",
            Error::EigenSolver => "EigenSolver",
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
