use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeberiError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("phase undefined: both TLS amplitudes must be nonzero")]
    PhaseUndefined,
    #[error("grid error: {0}")]
    Grid(String),
    #[error("truncation error: {what} leaves mass {mass:.3e} outside (limit {limit:.1e})")]
    Truncation { what: String, mass: f64, limit: f64 },
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("assembly error: {0}")]
    Assembly(String),
    #[error("interaction windows overlap: {0}")]
    Overlap(String),
    #[error("numerical error: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, FeberiError>;

impl FeberiError {
    /// True for failures caused by bad inputs (as opposed to numerical breakdown).
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            FeberiError::Domain(_)
                | FeberiError::PhaseUndefined
                | FeberiError::Grid(_)
                | FeberiError::Overlap(_)
        )
    }
}
