//! The baker map and the concave fibre dynamics it drives.
//!
//! Fibre maps are `f_t(theta, x) = e^{-t} g(theta) h(x)` with `h(x) = x / (1 + x)`.
//! The maximal invariant graph is approximated by the pullback sequence
//! `psi_n(theta) = f_t^n(T^{-n} theta, M_t)`, which is non-increasing in `n`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_partition, Error, Result};
use crate::forcing::Forcing;
use crate::symbolic::ContractionSystem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BakerPoint {
    pub u: f64,
    pub v: f64,
}

impl BakerPoint {
    pub fn new(u: f64, v: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&u) && (0.0..=1.0).contains(&v) {
            Ok(BakerPoint { u, v })
        } else {
            Err(Error::InvalidParameter(format!("point ({u}, {v}) is outside the unit square")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// `B_a` or its inverse. Horizontal expansion / vertical contraction forward.
#[inline]
pub fn baker_map(p: BakerPoint, a: f64, direction: Direction) -> BakerPoint {
    match direction {
        Direction::Forward if p.u < a => BakerPoint { u: p.u / a, v: a * p.v },
        Direction::Forward => BakerPoint { u: (p.u - a) / (1.0 - a), v: a + (1.0 - a) * p.v },
        Direction::Inverse if p.v < a => BakerPoint { u: a * p.u, v: p.v / a },
        Direction::Inverse => BakerPoint { u: a + (1.0 - a) * p.u, v: (p.v - a) / (1.0 - a) },
    }
}

/// `log |dB_a restricted to E^s|`: `log a` left of the cut, `log(1 - a)` right of it.
#[inline]
pub fn stable_log_contraction(p: BakerPoint, a: f64) -> f64 {
    if p.u < a {
        a.ln()
    } else {
        (1.0 - a).ln()
    }
}

/// Concave fibre nonlinearity `h(x) = x / (1 + x)`.
///
/// Evaluated as `1 / (1 + 1/x)`: each rounding step is monotone, so the
/// floating-point `h` is non-decreasing and pullbacks decrease exactly in `n`.
#[inline]
pub fn fibre_nonlinearity(x: f64) -> f64 {
    1.0 / (1.0 + 1.0 / x)
}

/// Model parameters for one value of `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FibreParams {
    pub a: f64,
    pub t: f64,
    pub forcing: Forcing,
    /// Upper fibre bound `M_t = e^{-t} sup g`; `f_t(theta, M_t) < M_t` since `h < 1`.
    pub cap: f64,
}

impl FibreParams {
    pub fn new(a: f64, t: f64, forcing: Forcing) -> Result<Self> {
        check_partition(a)?;
        forcing.validate()?;
        if !t.is_finite() {
            return Err(Error::InvalidParameter(format!("t = {t} must be finite")));
        }
        Ok(FibreParams { a, t, forcing, cap: (-t).exp() * forcing.sup() })
    }

    pub fn cosine(a: f64, t: f64, c: f64) -> Result<Self> {
        Self::new(a, t, Forcing::cosine(c)?)
    }

    #[inline]
    pub fn scale(&self) -> f64 {
        (-self.t).exp()
    }
}

#[inline]
pub fn fibre_step(x: f64, p: BakerPoint, params: &FibreParams) -> f64 {
    fibre_step_at_v(x, p.v, params)
}

#[inline]
fn fibre_step_at_v(x: f64, v: f64, params: &FibreParams) -> f64 {
    params.scale() * params.forcing.eval(v) * fibre_nonlinearity(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    Zero,
    Positive,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PullbackResult {
    pub value: f64,
    pub n_used: usize,
    pub classification: Classification,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PullbackSettings {
    pub n_max: usize,
    pub zero_threshold: f64,
    pub rel_tol: f64,
}

impl Default for PullbackSettings {
    fn default() -> Self {
        PullbackSettings { n_max: 100_000, zero_threshold: 1e-12, rel_tol: 1e-9 }
    }
}

impl PullbackSettings {
    pub fn validate(&self) -> Result<()> {
        if self.n_max == 0 || !(self.zero_threshold > 0.0) || !(self.rel_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "pullback needs n_max >= 1, zero_threshold > 0, rel_tol > 0 (got {self:?})"
            )));
        }
        Ok(())
    }
}

/// Backward orbit `p_{-1}, ..., p_{-n}`.
pub fn backward_orbit(p: BakerPoint, a: f64, n: usize) -> Vec<BakerPoint> {
    std::iter::successors(Some(p), |&q| Some(baker_map(q, a, Direction::Inverse)))
        .skip(1)
        .take(n)
        .collect()
}

/// `psi_n = f(p_{-1}, f(p_{-2}, ... f(p_{-n}, M_t)))` for a stored backward orbit.
pub fn pullback_value(orbit: &[BakerPoint], params: &FibreParams, n: usize) -> f64 {
    orbit[..n].iter().rev().fold(params.cap, |x, q| fibre_step_at_v(x, q.v, params))
}

/// Pullback along a precomputed backward orbit, doubling `n` until the value
/// falls below `zero_threshold` (Zero), stops changing by more than `rel_tol`
/// relative (Positive), or the orbit is exhausted (Undetermined).
pub fn pullback_on_orbit(
    orbit: &[BakerPoint],
    params: &FibreParams,
    zero_threshold: f64,
    rel_tol: f64,
) -> PullbackResult {
    let n_max = orbit.len();
    let mut previous: Option<f64> = None;
    let mut n = 1;
    loop {
        let value = pullback_value(orbit, params, n);
        if value < zero_threshold {
            return PullbackResult { value, n_used: n, classification: Classification::Zero };
        }
        if let Some(prev) = previous {
            if prev - value <= rel_tol * value {
                return PullbackResult { value, n_used: n, classification: Classification::Positive };
            }
        }
        if n >= n_max {
            return PullbackResult { value, n_used: n, classification: Classification::Undetermined };
        }
        previous = Some(value);
        n = (2 * n).min(n_max);
    }
}

pub fn pullback_graph(
    p: BakerPoint,
    params: &FibreParams,
    settings: &PullbackSettings,
) -> Result<PullbackResult> {
    settings.validate()?;
    let orbit = backward_orbit(p, params.a, settings.n_max);
    Ok(pullback_on_orbit(&orbit, params, settings.zero_threshold, settings.rel_tol))
}

/// `(1/n) sum_{k=1}^n log g(B_a^{-k} p)`.
pub fn backward_birkhoff(p: BakerPoint, params: &FibreParams, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("backward Birkhoff average needs n >= 1".into()));
    }
    Ok(birkhoff_on_orbit(&backward_orbit(p, params.a, n), &params.forcing))
}

pub fn birkhoff_on_orbit(orbit: &[BakerPoint], forcing: &Forcing) -> f64 {
    orbit.iter().map(|q| forcing.log_eval(q.v)).sum::<f64>() / orbit.len() as f64
}

/// A Lebesgue-distributed point together with its backward orbit `p_{-1}, ..., p_{-n}`.
///
/// Under Lebesgue measure the past symbols of a point are i.i.d. with
/// `P(0) = a`, and `v_{-k} = c_{s_k}(v_{-k-1})`. Drawing the symbols and
/// contracting from a uniform `v` far in the past gives every `v_{-k}` to
/// full precision. Iterating the inverse map instead expands rounding errors
/// by `1/a` or `1/(1-a)` per step, and for `a = 1/2` sends every float onto a
/// fixed point within 53 steps.
pub fn sample_with_backward_orbit<R: Rng + ?Sized>(rng: &mut R, a: f64, n: usize) -> Result<(BakerPoint, Vec<BakerPoint>)> {
    let sys = ContractionSystem::new(a)?;
    // 0.55^64 < 1e-16, so the seed of the contraction is forgotten
    let depth = n + 64;
    let symbols: Vec<u8> = (0..depth).map(|_| u8::from(rng.gen::<f64>() >= a)).collect();
    let mut vs = vec![0.0; n + 1];
    let mut v: f64 = rng.gen();
    for k in (0..depth).rev() {
        v = sys.apply(symbols[k], v);
        if k <= n {
            vs[k] = v;
        }
    }
    let mut u: f64 = rng.gen();
    let point = BakerPoint { u, v: vs[0] };
    let orbit = (1..=n)
        .map(|k| {
            u = sys.apply(symbols[k - 1], u);
            BakerPoint { u, v: vs[k] }
        })
        .collect();
    Ok((point, orbit))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(u: f64, v: f64) -> BakerPoint {
        BakerPoint::new(u, v).unwrap()
    }

    #[test]
    fn baker_branches() {
        let f = baker_map(pt(0.2, 0.3), 0.45, Direction::Forward);
        assert!((f.u - 0.2 / 0.45).abs() < 1e-15 && (f.v - 0.135).abs() < 1e-15);
        let f = baker_map(pt(0.7, 0.5), 0.45, Direction::Forward);
        assert!((f.u - 0.25 / 0.55).abs() < 1e-15 && (f.v - 0.725).abs() < 1e-15);
        let b = baker_map(pt(0.2 / 0.45, 0.135), 0.45, Direction::Inverse);
        assert!((b.u - 0.2).abs() < 1e-15 && (b.v - 0.3).abs() < 1e-15);
    }

    #[test]
    fn stable_contraction_rates() {
        assert!((stable_log_contraction(pt(0.2, 0.0), 0.45) - (-0.798508)).abs() < 1e-6);
        assert!((stable_log_contraction(pt(0.7, 0.0), 0.45) - (-0.597837)).abs() < 1e-6);
        for u in [0.1, 0.5, 0.9] {
            assert_eq!(stable_log_contraction(pt(u, 0.3), 0.5), 0.5f64.ln());
        }
    }

    #[test]
    fn fibre_step_values() {
        let params = FibreParams::cosine(0.45, 0.0, 1.001).unwrap();
        assert_eq!(fibre_step(0.0, pt(0.3, 0.8), &params), 0.0);
        assert!((fibre_step(1.0, pt(0.3, 0.25), &params) - 0.5005).abs() < 1e-15);
        assert!(fibre_step(params.cap, pt(0.3, 0.0), &params) < params.cap);
    }

    #[test]
    fn fibre_slope_at_zero_matches_forcing() {
        let params = FibreParams::cosine(0.45, 0.3, 1.001).unwrap();
        let p = pt(0.6, 0.1);
        let h = 1e-8;
        let fd = (fibre_step(h, p, &params) - fibre_step(0.0, p, &params)) / h;
        let exact = (-0.3f64).exp() * params.forcing.eval(0.1);
        assert!(((fd - exact) / exact).abs() < 1e-6);
    }

    #[test]
    fn constant_forcing_pullback_hits_closed_form() {
        // e^{-t} 2 x / (1 + x) = x  =>  x = 2 e^{-t} - 1
        let params = FibreParams::new(0.45, 0.0, Forcing::constant(2.0).unwrap()).unwrap();
        let r = pullback_graph(pt(0.3, 0.6), &params, &PullbackSettings::default()).unwrap();
        assert_eq!(r.classification, Classification::Positive);
        assert!((r.value - 1.0).abs() < 1e-8);

        let params =
            FibreParams::new(0.45, 2f64.ln() + 0.1, Forcing::constant(2.0).unwrap()).unwrap();
        let r = pullback_graph(pt(0.3, 0.6), &params, &PullbackSettings::default()).unwrap();
        assert_eq!(r.classification, Classification::Zero);
    }

    #[test]
    fn pullback_with_one_step_budget_is_undetermined() {
        let params = FibreParams::cosine(0.45, -0.5, 1.001).unwrap();
        let s = PullbackSettings { n_max: 1, ..Default::default() };
        let r = pullback_graph(pt(0.3, 0.6), &params, &s).unwrap();
        assert_eq!(r.classification, Classification::Undetermined);
        assert_eq!(r.n_used, 1);
    }

    #[test]
    fn pullback_rejects_bad_settings() {
        let params = FibreParams::cosine(0.45, 0.0, 1.001).unwrap();
        let s = PullbackSettings { n_max: 0, ..Default::default() };
        assert!(pullback_graph(pt(0.3, 0.6), &params, &s).is_err());
        let s = PullbackSettings { rel_tol: 0.0, ..Default::default() };
        assert!(pullback_graph(pt(0.3, 0.6), &params, &s).is_err());
    }

    #[test]
    fn birkhoff_at_fixed_points() {
        let params = FibreParams::cosine(0.45, 0.0, 1.001).unwrap();
        for p in [pt(0.0, 0.0), pt(1.0, 1.0)] {
            for n in [1, 7, 100] {
                let avg = backward_birkhoff(p, &params, n).unwrap();
                assert!((avg - 2.001f64.ln()).abs() < 1e-12, "{p:?} {n} {avg}");
            }
        }
        assert!(backward_birkhoff(pt(0.0, 0.0), &params, 0).is_err());
    }

    #[test]
    fn sampled_orbits_follow_the_inverse_map() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let (p, orbit) = sample_with_backward_orbit(&mut rng, 0.45, 40).unwrap();
        // one inverse step is accurate to rounding, so compare step by step
        let mut prev = p;
        for q in &orbit {
            let step = baker_map(prev, 0.45, Direction::Inverse);
            assert!((step.u - q.u).abs() < 1e-14 && (step.v - q.v).abs() < 1e-14);
            prev = *q;
        }
        // a = 1/2 is where iterating the inverse map collapses
        let (_, orbit) = sample_with_backward_orbit(&mut rng, 0.5, 200).unwrap();
        assert!(orbit[150..].iter().any(|q| q.v > 0.1 && q.v < 0.9));
    }

    #[test]
    fn point_validation() {
        assert!(BakerPoint::new(1.2, 0.0).is_err());
        assert!(BakerPoint::new(0.5, -0.1).is_err());
        assert!(FibreParams::cosine(1.0, 0.0, 2.0).is_err());
        assert!(FibreParams::cosine(0.5, 0.0, 1.0).is_err());
    }
}
