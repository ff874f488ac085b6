//! The multiplicative forcing `g(u, v)` of the fibre maps.
//!
//! Only the family `g(u, v) = c + cos(2 pi v)` is supported for real work.
//! [`Forcing::Constant`] exists so that tests can compare against closed-form
//! fixed points; with it `log g` is a coboundary and every dimension quantity
//! degenerates.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Forcing {
    /// `g(u, v) = c + cos(2 pi v)`, positive iff `c > 1`.
    Cosine { c: f64 },
    /// Test hook: `g` identically equal to a positive constant.
    Constant { g: f64 },
}

impl Forcing {
    pub fn cosine(c: f64) -> Result<Self> {
        let f = Forcing::Cosine { c };
        f.validate()?;
        Ok(f)
    }

    pub fn constant(g: f64) -> Result<Self> {
        let f = Forcing::Constant { g };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Forcing::Cosine { c } if c > 1.0 && c.is_finite() => Ok(()),
            Forcing::Cosine { c } => Err(Error::PositivityViolation { c }),
            Forcing::Constant { g } if g > 0.0 && g.is_finite() => Ok(()),
            Forcing::Constant { g } => {
                Err(Error::InvalidParameter(format!("constant forcing g = {g} must be positive")))
            }
        }
    }

    #[inline]
    pub fn eval(&self, v: f64) -> f64 {
        match *self {
            Forcing::Cosine { c } => c + (TAU * v).cos(),
            Forcing::Constant { g } => g,
        }
    }

    #[inline]
    pub fn log_eval(&self, v: f64) -> f64 {
        self.eval(v).ln()
    }

    /// `sup g`, used for the fibre cap.
    pub fn sup(&self) -> f64 {
        match *self {
            Forcing::Cosine { c } => c + 1.0,
            Forcing::Constant { g } => g,
        }
    }

    pub fn inf(&self) -> f64 {
        match *self {
            Forcing::Cosine { c } => c - 1.0,
            Forcing::Constant { g } => g,
        }
    }

    /// Lipschitz constant of `v -> log g(v)` on `[0, 1]`.
    ///
    /// For the cosine family the maximum of `2 pi |sin x| / (c + cos x)` is
    /// attained at `cos x = -1/c` and equals `2 pi / sqrt(c^2 - 1)`.
    pub fn log_lipschitz(&self) -> f64 {
        match *self {
            Forcing::Cosine { c } => TAU / (c * c - 1.0).sqrt(),
            Forcing::Constant { .. } => 0.0,
        }
    }

    /// Lebesgue average of `log g`, in closed form.
    pub fn log_mean_closed_form(&self) -> f64 {
        match *self {
            Forcing::Cosine { c } => ((c + (c * c - 1.0).sqrt()) / 2.0).ln(),
            Forcing::Constant { g } => g.ln(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonpositive_forcing() {
        assert_eq!(Forcing::cosine(1.0), Err(Error::PositivityViolation { c: 1.0 }));
        assert!(Forcing::cosine(0.5).is_err());
        assert!(Forcing::cosine(f64::NAN).is_err());
        assert!(Forcing::constant(0.0).is_err());
        assert!(Forcing::cosine(1.001).is_ok());
    }

    #[test]
    fn lipschitz_constant_bounds_sampled_slopes() {
        let f = Forcing::cosine(1.001).unwrap();
        let lip = f.log_lipschitz();
        let n = 200_000;
        let mut max_slope: f64 = 0.0;
        for i in 0..n {
            let v0 = i as f64 / n as f64;
            let v1 = (i + 1) as f64 / n as f64;
            max_slope = max_slope.max(((f.log_eval(v1) - f.log_eval(v0)) / (v1 - v0)).abs());
        }
        assert!(max_slope <= lip);
        assert!(max_slope > 0.99 * lip);
    }
}
