use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A Ricci entry did not follow a quadratic law in the calibration parameters.
    #[error("non-polynomial parameter dependence: held-out residual {residual:e} at (a, b) = ({a}, {b}) for {what}")]
    NonPolynomial {
        what: String,
        residual: f64,
        a: f64,
        b: f64,
    },
}

pub type Result<T, E = GeometryError> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(GeometryError::InvalidArgument(msg.into()))
}
