//! Monte-Carlo classification of Lebesgue-typical points at one value of `t`.
//!
//! Each sample gets a backward orbit, the pullback classification of its
//! invariant graph value and the backward Birkhoff average `Gamma^(n)` of
//! `log g`. Points with `Gamma > t` should carry a positive graph and points
//! with `Gamma < t` a zero one.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fibre::{birkhoff_on_orbit, pullback_on_orbit, sample_with_backward_orbit, Classification, FibreParams, PullbackSettings};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroSetRecord {
    pub u: f64,
    pub v: f64,
    #[serde(rename = "Gamma_n")]
    pub gamma_n: f64,
    pub value: f64,
    pub classification: Classification,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroSetSummary {
    pub t: f64,
    pub samples: usize,
    pub n: usize,
    pub seed: u64,
    pub zero: usize,
    pub positive: usize,
    pub undetermined: usize,
    /// `zero / samples`; undetermined points count in the denominator only.
    pub fraction_zero: f64,
    #[serde(skip)]
    pub records: Vec<ZeroSetRecord>,
}

impl ZeroSetSummary {
    /// Fraction of points whose classification agrees with the sign of
    /// `Gamma^(n) - t`, among those with `|Gamma^(n) - t| > margin`.
    pub fn trichotomy_agreement(&self, margin: f64) -> Option<f64> {
        let decided: Vec<bool> = self
            .records
            .iter()
            .filter(|r| (r.gamma_n - self.t).abs() > margin)
            .map(|r| match r.classification {
                Classification::Zero => r.gamma_n < self.t,
                Classification::Positive => r.gamma_n > self.t,
                Classification::Undetermined => false,
            })
            .collect();
        (!decided.is_empty()).then(|| decided.iter().filter(|&&ok| ok).count() as f64 / decided.len() as f64)
    }
}

/// Classify `samples` Lebesgue-random points with `n` pullback steps.
///
/// Sampling is deterministic in `seed` (ChaCha8).
pub fn zeroset_scan(
    params: &FibreParams,
    samples: usize,
    n: usize,
    seed: u64,
    settings: &PullbackSettings,
) -> Result<ZeroSetSummary> {
    if samples == 0 || n == 0 {
        return Err(Error::InvalidParameter(format!("zero-set scan needs samples >= 1 and n >= 1, got {samples} and {n}")));
    }
    if !(settings.zero_threshold > 0.0 && settings.rel_tol > 0.0) {
        return Err(Error::InvalidParameter("zero threshold and rel_tol must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(samples);
    for _ in 0..samples {
        let (p, orbit) = sample_with_backward_orbit(&mut rng, params.a, n)?;
        let pull = pullback_on_orbit(&orbit, params, settings.zero_threshold, settings.rel_tol);
        records.push(ZeroSetRecord {
            u: p.u,
            v: p.v,
            gamma_n: birkhoff_on_orbit(&orbit, &params.forcing),
            value: pull.value,
            classification: pull.classification,
        });
    }
    let count = |c: Classification| records.iter().filter(|r| r.classification == c).count();
    let zero = count(Classification::Zero);
    Ok(ZeroSetSummary {
        t: params.t,
        samples,
        n,
        seed,
        zero,
        positive: count(Classification::Positive),
        undetermined: count(Classification::Undetermined),
        fraction_zero: zero as f64 / samples as f64,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forcing::Forcing;

    #[test]
    fn constant_forcing_is_all_or_nothing() {
        let positive = FibreParams::new(0.45, 0.0, Forcing::constant(2.0).unwrap()).unwrap();
        let s = zeroset_scan(&positive, 20, 200, 1, &PullbackSettings::default()).unwrap();
        assert_eq!((s.zero, s.positive), (0, 20));
        let zero = FibreParams::new(0.45, 1.0, Forcing::constant(2.0).unwrap()).unwrap();
        let s = zeroset_scan(&zero, 20, 200, 1, &PullbackSettings::default()).unwrap();
        assert_eq!(s.fraction_zero, 1.0);
    }

    #[test]
    fn deterministic_in_seed() {
        let params = FibreParams::cosine(0.45, -0.6, 1.001).unwrap();
        let a = zeroset_scan(&params, 10, 300, 5, &PullbackSettings::default()).unwrap();
        let b = zeroset_scan(&params, 10, 300, 5, &PullbackSettings::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.records, b.records);
        let c = zeroset_scan(&params, 10, 300, 6, &PullbackSettings::default()).unwrap();
        assert_ne!(a.records, c.records);
        assert_eq!(a.zero + a.positive + a.undetermined, 10);
    }

    #[test]
    fn rejects_empty_scans() {
        let params = FibreParams::cosine(0.45, 0.0, 1.001).unwrap();
        assert!(zeroset_scan(&params, 0, 10, 0, &PullbackSettings::default()).is_err());
        assert!(zeroset_scan(&params, 10, 0, 0, &PullbackSettings::default()).is_err());
    }
}
