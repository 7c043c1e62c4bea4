//! Asymptotic expansions in `1/n²` for linear eigenvalue statistics of the
//! Gaussian Unitary Ensemble GUE(n, 1/n), with the numerical oracles used
//! to check them.

pub mod chebyshev;
pub mod covariance;
pub mod ddouble;
pub mod eigen;
pub mod error;
pub mod functions;
pub mod hermite;
pub mod montecarlo;
pub mod precise;
pub mod quadrature;
pub mod stats;
pub mod symbolic;
pub mod transfer;
pub mod validation;

pub use chebyshev::GridFunction;
pub use error::{Error, Result};
pub use functions::{parse_complex, parse_input, SmoothInput};
pub use hermite::{DensityBundle, HermiteEvaluator, KernelField};
pub use num_complex::Complex64;
pub use quadrature::LineQuadConfig;
pub use covariance::CovConfig;
pub use montecarlo::{GueSampler, McStats};
pub use stats::SlopeFit;
pub use symbolic::SemicircleExpr;
pub use transfer::{Precision, TransferConfig};
pub use validation::{CriterionResult, SuiteConfig};
