use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the engine. Input errors map to CLI exit code 2,
/// everything else to exit code 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("evaluation at a critical point: {0}")]
    Critical(String),
    #[error("step collapse at s = {s:.6e}: closest approach {closest_distance:.3e} (|Z|-distance) to transition point {closest_point}")]
    StepCollapse {
        s: f64,
        closest_point: Complex64,
        closest_distance: f64,
    },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub fn is_input(&self) -> bool {
        matches!(self, Error::Input(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
