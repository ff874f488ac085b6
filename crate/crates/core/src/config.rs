//! Run configuration shared by the CLI subcommands.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{check_partition, Error, Result};
use crate::fibre::PullbackSettings;
use crate::forcing::Forcing;
use crate::solver::{Model, SolverSettings};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub a: f64,
    pub c: f64,
    /// Curve range; `None` means `gamma_c - 0.6` and `gamma_c + 1.2`.
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub steps: usize,
    /// Share of the `(gamma_min, gamma_max)` width trimmed from each end
    /// before tracing.
    pub margin_fraction: f64,
    /// Longest period scanned for the extremal averages.
    pub max_period: usize,
    pub seed: u64,
    pub samples: usize,
    pub n: usize,
    pub solver: SolverSettings,
    pub pullback: PullbackSettings,
    #[serde(skip_serializing)]
    pub output: Option<PathBuf>,
    #[serde(skip_serializing)]
    pub svg: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            a: 0.45,
            c: 1.001,
            t_min: None,
            t_max: None,
            steps: 80,
            margin_fraction: 0.01,
            max_period: 12,
            seed: 0,
            samples: 1000,
            n: 5000,
            solver: SolverSettings::default(),
            pullback: PullbackSettings::default(),
            output: None,
            svg: None,
        }
    }
}

impl RunConfig {
    /// Read a JSON config file. Missing fields take their defaults.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidParameter(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::InvalidParameter(format!("invalid config {}: {e}", path.display())))
    }

    pub fn forcing(&self) -> Result<Forcing> {
        Forcing::cosine(self.c)
    }

    pub fn model(&self) -> Result<Model> {
        Model::new(self.a, self.forcing()?)
    }

    pub fn validate(&self) -> Result<()> {
        check_partition(self.a)?;
        self.forcing()?;
        if self.steps < 2 {
            return Err(Error::InvalidParameter(format!("steps must be at least 2, got {}", self.steps)));
        }
        if let (Some(lo), Some(hi)) = (self.t_min, self.t_max) {
            if !(lo < hi) {
                return Err(Error::InvalidParameter(format!("need t_min < t_max, got {lo} and {hi}")));
            }
        }
        if [self.t_min, self.t_max].iter().flatten().any(|t| !t.is_finite()) {
            return Err(Error::InvalidParameter("t range must be finite".into()));
        }
        if !(0.0..0.5).contains(&self.margin_fraction) {
            return Err(Error::InvalidParameter(format!("margin_fraction must lie in [0, 0.5), got {}", self.margin_fraction)));
        }
        if self.samples == 0 || self.n == 0 || self.max_period == 0 {
            return Err(Error::InvalidParameter("samples, n and max_period must be at least 1".into()));
        }
        self.solver.validate()?;
        self.pullback.validate()
    }

    /// Curve range, filling unset ends relative to `gamma_c`.
    pub fn t_range(&self, gamma_c: f64) -> (f64, f64) {
        (self.t_min.unwrap_or(gamma_c - 0.6), self.t_max.unwrap_or(gamma_c + 1.2))
    }

    /// `steps` equally spaced points on `[lo, hi]`.
    pub fn grid(&self, gamma_c: f64) -> Vec<f64> {
        let (lo, hi) = self.t_range(gamma_c);
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| if i + 1 == self.steps { hi } else { lo + (hi - lo) * i as f64 / last })
            .collect()
    }

    /// Config echo for output headers. Output paths are left out.
    pub fn echo(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_through_json() {
        let cfg = RunConfig { seed: 7, t_min: Some(-1.0), ..RunConfig::default() };
        let back: RunConfig = serde_json::from_str(&cfg.echo()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn partial_files_keep_defaults() {
        let cfg: RunConfig = serde_json::from_str(r#"{"c": 2.0, "solver": {"win_tol": 1e-8}}"#).unwrap();
        assert_eq!(cfg.c, 2.0);
        assert_eq!(cfg.solver.win_tol, 1e-8);
        assert_eq!(cfg.solver.newton_tol, SolverSettings::default().newton_tol);
        assert!(serde_json::from_str::<RunConfig>(r#"{"cc": 2.0}"#).is_err());
    }

    #[test]
    fn validation() {
        assert!(RunConfig::default().validate().is_ok());
        for bad in [
            RunConfig { a: 1.0, ..RunConfig::default() },
            RunConfig { c: 1.0, ..RunConfig::default() },
            RunConfig { steps: 1, ..RunConfig::default() },
            RunConfig { t_min: Some(0.5), t_max: Some(0.1), ..RunConfig::default() },
            RunConfig { samples: 0, ..RunConfig::default() },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn grid_spans_the_range() {
        let cfg = RunConfig { t_min: Some(-1.2), t_max: Some(0.55), steps: 80, ..RunConfig::default() };
        let g = cfg.grid(0.0);
        assert_eq!(g.len(), 80);
        assert_eq!((g[0], g[79]), (-1.2, 0.55));
    }
}
