use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical and symbolic routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A complex spectral parameter lies on the cut `[-2, 2]`.
    #[error("spectral parameter {0} lies on the branch cut [-2, 2]")]
    BranchCut(Complex64),

    /// A spectral parameter is too close to the support for reliable quadrature.
    #[error("spectral parameter {lambda} is too close to the real axis (|Im| = {im:.3e}) for quadrature")]
    Conditioning { lambda: Complex64, im: f64 },

    /// The input function cannot supply the derivatives an operation needs.
    #[error("input provides derivatives up to order {available}, but order {required} is required")]
    Capability { required: usize, available: usize },

    /// The input function could not be evaluated at a required node.
    #[error("input function is not evaluable at x = {0}")]
    Input(f64),

    /// An iterative method failed to converge.
    #[error("{method} did not converge after {iterations} iterations ({detail})")]
    NoConvergence {
        method: &'static str,
        iterations: usize,
        detail: String,
    },

    /// Text could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
