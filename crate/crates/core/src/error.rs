use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong between parameter validation and the curve solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("forcing offset c = {c} does not keep g = c + cos(2*pi*v) positive (need c > 1)")]
    PositivityViolation { c: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("|q| = {q:.3e} exceeded the cap {cap}; t is too close to the edge of (gamma_min, gamma_max)")]
    BoundaryBlowup { q: f64, cap: f64 },

    #[error(
        "usable parameter window has width {width:.3e}, below the grid resolution {resolution:.3e}; \
         log g is (nearly) cohomologous to a constant"
    )]
    GammaDegenerate { width: f64, resolution: f64 },

    #[error("curve point at t = {t} did not converge; no dimension report is available")]
    Unconverged { t: f64 },
}

/// Coarse error classes; the CLI maps each class to its own exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Numeric,
    Resource,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::PositivityViolation { .. }
            | Error::InvalidParameter(_)
            | Error::GammaDegenerate { .. } => ErrorClass::Config,
            Error::NonConvergence { .. } | Error::BoundaryBlowup { .. } | Error::Unconverged { .. } => {
                ErrorClass::Numeric
            }
            Error::ResourceLimit(_) => ErrorClass::Resource,
        }
    }
}

pub(crate) fn check_partition(a: f64) -> Result<()> {
    if a > 0.0 && a < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("partition parameter a = {a} must lie in (0, 1)")))
    }
}
