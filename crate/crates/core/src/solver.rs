//! The dimension curve `D(t)`.
//!
//! For each `t` the pair `(D, q)` solves
//!
//! ```text
//! Q(D, q, t) = 0,    dQ/dq (D, q, t) = 0,
//! ```
//!
//! and `D'(t) = q / (dQ/d delta)`. The curve passes through `(1, 0)` at
//! `t = gamma_c`, the Lebesgue average of `log g`, which is where continuation
//! starts.

use serde::{Deserialize, Serialize};

use crate::error::{check_partition, Error, Result};
use crate::forcing::Forcing;
use crate::collocation::{pressure_collocation, pressure_collocation_adaptive, Collocation};
use crate::pressure::{pressure_adaptive_joint, pressure_transfer, PotentialWindow, PressureResult};
use crate::quadrature::integrate;
use crate::symbolic::{periodic_orbit_logg_average, SymbolWord};

/// Default budget for the periodic-word scan (words of all periods combined).
pub const DEFAULT_SCAN_BUDGET: u64 = 1 << 24;

/// `integral_0^1 log(c + cos(2 pi v)) dv`, by adaptive quadrature.
///
/// Lebesgue measure is the SRB measure of every baker map, so the result does
/// not depend on `a`.
pub fn gamma_c(a: f64, forcing: &Forcing) -> Result<f64> {
    check_partition(a)?;
    forcing.validate()?;
    match *forcing {
        Forcing::Constant { g } => Ok(g.ln()),
        Forcing::Cosine { .. } => integrate(|v| forcing.log_eval(v), 0.0, 1.0, 1e-12),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaSummary {
    pub gamma_c: f64,
    pub gamma_min_est: f64,
    pub gamma_max_est: f64,
    pub witness_min: SymbolWord,
    pub witness_max: SymbolWord,
    pub scan_period: usize,
}

impl GammaSummary {
    pub fn width(&self) -> f64 {
        self.gamma_max_est - self.gamma_min_est
    }

    /// `(gamma_min + margin, gamma_max - margin)` with the margin a fraction of the width.
    pub fn usable_window(&self, margin_fraction: f64) -> (f64, f64) {
        let margin = margin_fraction * self.width();
        (self.gamma_min_est + margin, self.gamma_max_est - margin)
    }
}

/// The usable window `(gamma_min + margin, gamma_max - margin)`, rejected with
/// [`Error::GammaDegenerate`] when it is not wider than `resolution`.
pub fn usable_window(gamma: &GammaSummary, margin_fraction: f64, resolution: f64) -> Result<(f64, f64)> {
    let (lo, hi) = gamma.usable_window(margin_fraction);
    let width = hi - lo;
    if !(width > resolution) {
        return Err(Error::GammaDegenerate { width: width.max(0.0), resolution });
    }
    Ok((lo, hi))
}

pub fn gamma_extremes(a: f64, forcing: &Forcing, max_period: usize) -> Result<GammaSummary> {
    gamma_extremes_with_budget(a, forcing, max_period, DEFAULT_SCAN_BUDGET)
}

/// Scan the averages of `log g` over every primitive periodic orbit of period
/// at most `max_period`. The extremes are inner approximations of
/// `gamma_min`/`gamma_max`.
pub fn gamma_extremes_with_budget(
    a: f64,
    forcing: &Forcing,
    max_period: usize,
    budget: u64,
) -> Result<GammaSummary> {
    if max_period == 0 {
        return Err(Error::InvalidParameter("max_period must be at least 1".into()));
    }
    if max_period >= 62 || (2u64 << max_period) > budget {
        return Err(Error::ResourceLimit(format!(
            "scanning periods up to {max_period} needs about 2^{} words, above the budget {budget}",
            max_period + 1
        )));
    }
    let gamma_c = gamma_c(a, forcing)?;
    let mut min = (f64::INFINITY, SymbolWord::default());
    let mut max = (f64::NEG_INFINITY, SymbolWord::default());
    for period in 1..=max_period {
        for bits in 0..1u64 << period {
            let word = SymbolWord::from_bits(bits, period);
            // one representative per cycle
            if !word.is_primitive() || word.canonical_rotation() != word {
                continue;
            }
            let avg = periodic_orbit_logg_average(&word, a, forcing)?;
            if avg < min.0 {
                min = (avg, word.clone());
            }
            if avg > max.0 {
                max = (avg, word);
            }
        }
    }
    Ok(GammaSummary {
        gamma_c,
        gamma_min_est: min.0,
        gamma_max_est: max.0,
        witness_min: min.1,
        witness_max: max.1,
        scan_period: max_period,
    })
}

/// The driving and forcing parameters shared by every point of a curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub a: f64,
    pub forcing: Forcing,
}

impl Model {
    pub fn new(a: f64, forcing: Forcing) -> Result<Self> {
        let model = Model { a, forcing };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        check_partition(self.a)?;
        self.forcing.validate()
    }
}

/// How the solver evaluates `Q` and its derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// Chebyshev collocation of the transfer operator on functions of `v`.
    Collocation,
    /// Finite-window transfer matrices on `2^m` cylinders.
    Window,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSettings {
    pub newton_tol: f64,
    /// Required agreement of `Q` and `dQ/dq` between successive resolutions.
    pub win_tol: f64,
    pub fd_step: f64,
    pub max_iterations: usize,
    pub q_cap: f64,
    pub backend: Backend,
    pub m_start: usize,
    pub m_max: usize,
    pub nodes_start: usize,
    pub nodes_step: usize,
    pub nodes_max: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            newton_tol: 1e-10,
            win_tol: 1e-9,
            fd_step: 1e-4,
            max_iterations: 50,
            q_cap: 200.0,
            backend: Backend::Collocation,
            m_start: 1,
            m_max: 16,
            nodes_start: 12,
            nodes_step: 8,
            nodes_max: 128,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        let positive = [("newton_tol", self.newton_tol), ("win_tol", self.win_tol), ("fd_step", self.fd_step), ("q_cap", self.q_cap)];
        if let Some((name, value)) = positive.iter().find(|(_, v)| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidParameter(format!("solver setting {name} must be positive and finite, got {value}")));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("solver needs max_iterations >= 1".into()));
        }
        if self.m_start == 0 || self.m_start > self.m_max {
            return Err(Error::InvalidParameter(format!("need 1 <= m_start <= m_max, got {} and {}", self.m_start, self.m_max)));
        }
        if self.nodes_start < 2 || self.nodes_step == 0 || self.nodes_start > self.nodes_max {
            return Err(Error::InvalidParameter(format!(
                "need 2 <= nodes_start <= nodes_max and nodes_step >= 1, got {}, {}, {}",
                self.nodes_start, self.nodes_max, self.nodes_step
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub t: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub q: f64,
    #[serde(rename = "residual_Q")]
    pub residual_q: f64,
    #[serde(rename = "residual_dQdq")]
    pub residual_dqdq: f64,
    /// Resolution of the final pressure evaluation: the window length `m`,
    /// or the nodes per panel for the collocation backend.
    pub window: usize,
    pub converged: bool,
    /// Equilibrium average of `u = -log |dB|E^s|`, i.e. `-dQ/d delta`.
    pub mu_u: f64,
    /// `D'(t)` reconstructed as `q / (dQ/d delta)`.
    pub slope: f64,
    pub iterations: usize,
    pub failure: Option<String>,
}

impl CurvePoint {
    fn failed(t: f64, err: &Error) -> Self {
        CurvePoint {
            t,
            d: f64::NAN,
            q: f64::NAN,
            residual_q: f64::NAN,
            residual_dqdq: f64::NAN,
            window: 0,
            converged: false,
            mu_u: f64::NAN,
            slope: f64::NAN,
            iterations: 0,
            failure: Some(err.to_string()),
        }
    }
}

enum Engine {
    Window(PotentialWindow),
    Collocation(Collocation),
}

impl Engine {
    fn new(model: &Model, settings: &SolverSettings) -> Result<Self> {
        Ok(match settings.backend {
            Backend::Window => Engine::Window(PotentialWindow::new(settings.m_start.max(1), model.a, model.forcing)?),
            Backend::Collocation => {
                Engine::Collocation(Collocation::new(model.a, model.forcing, settings.nodes_start)?)
            }
        })
    }

    fn floor(&self, settings: &SolverSettings) -> usize {
        match self {
            Engine::Window(_) => settings.m_start.max(1),
            Engine::Collocation(_) => settings.nodes_start,
        }
    }

    /// One resolution below `resolution`, where refinement restarts.
    fn coarser(&self, resolution: usize, settings: &SolverSettings) -> usize {
        let step = match self {
            Engine::Window(_) => 1,
            Engine::Collocation(_) => settings.nodes_step,
        };
        resolution.saturating_sub(step).max(self.floor(settings))
    }

    fn refined(&self, q: f64, d: f64, t: f64, from: usize, settings: &SolverSettings) -> Result<PressureResult> {
        match self {
            Engine::Window(win) => pressure_adaptive_joint(q, d, t, settings.win_tol, &win.with_m(from), settings.m_max),
            Engine::Collocation(grid) => pressure_collocation_adaptive(
                q,
                d,
                t,
                settings.win_tol,
                &grid.with_nodes(from)?,
                settings.nodes_step,
                settings.nodes_max,
            ),
        }
    }

    /// Evaluator at a fixed resolution.
    fn frozen(&self, resolution: usize) -> Result<Frozen> {
        Ok(match self {
            Engine::Window(win) => Frozen::Window(win.with_m(resolution)),
            Engine::Collocation(grid) => Frozen::Collocation(grid.with_nodes(resolution)?),
        })
    }
}

enum Frozen {
    Window(PotentialWindow),
    Collocation(Collocation),
}

impl Frozen {
    fn eval(&self, q: f64, d: f64, t: f64) -> Result<PressureResult> {
        match self {
            Frozen::Window(win) => pressure_transfer(q, d, t, win),
            Frozen::Collocation(grid) => pressure_collocation(q, d, t, grid),
        }
    }
}

fn residual(r: &PressureResult) -> f64 {
    r.value.abs().max(r.dq_dq.abs())
}

/// Newton's method on `(Q, dQ/dq) = 0` from `(init_d, init_q)`.
///
/// The first Jacobian row comes from the eigenvector derivatives, the second
/// from central differences of `dQ/dq` at a frozen resolution. Steps that do
/// not reduce the residual are halved.
pub fn solve_dq(t: f64, init_d: f64, init_q: f64, model: &Model, settings: &SolverSettings) -> Result<CurvePoint> {
    model.validate()?;
    settings.validate()?;
    if !(t.is_finite() && init_d.is_finite() && init_q.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "solver needs finite t and seed, got t = {t}, seed = ({init_d}, {init_q})"
        )));
    }
    let engine = Engine::new(model, settings)?;

    let (mut d, mut q) = (init_d, init_q);
    // refinement returns the finer of the two resolutions it compared
    let mut center = engine.refined(q, d, t, engine.floor(settings), settings)?;
    for iteration in 0..=settings.max_iterations {
        if residual(&center) < settings.newton_tol {
            return Ok(CurvePoint {
                t,
                d,
                q,
                residual_q: center.value,
                residual_dqdq: center.dq_dq,
                window: center.m,
                converged: true,
                mu_u: -center.dq_ddelta,
                slope: q / center.dq_ddelta,
                iterations: iteration,
                failure: None,
            });
        }
        if iteration == settings.max_iterations {
            break;
        }

        let h = settings.fd_step;
        let frozen = engine.frozen(center.m)?;
        let at = |dd: f64, qq: f64| frozen.eval(qq, dd, t).map(|r| r.dq_dq);
        let j11 = center.dq_ddelta;
        let j12 = center.dq_dq;
        let j21 = (at(d + h, q)? - at(d - h, q)?) / (2.0 * h);
        let j22 = (at(d, q + h)? - at(d, q - h)?) / (2.0 * h);
        let det = j11 * j22 - j12 * j21;
        if !(det.is_finite() && det != 0.0) {
            return Err(Error::NonConvergence { what: "Newton solve (singular Jacobian)", iterations: iteration });
        }
        let (f1, f2) = (center.value, center.dq_dq);
        let step_d = -(j22 * f1 - j12 * f2) / det;
        let step_q = -(-j21 * f1 + j11 * f2) / det;

        let restart = engine.coarser(center.m, settings);
        let mut lambda = 1.0;
        let mut accepted = None;
        let mut last_q = q;
        for _ in 0..8 {
            let (nd, nq) = (d + lambda * step_d, q + lambda * step_q);
            last_q = nq;
            if nq.abs() <= settings.q_cap && nd.is_finite() {
                let trial = engine.refined(nq, nd, t, restart, settings)?;
                if residual(&trial) < residual(&center) {
                    accepted = Some((nd, nq, trial));
                    break;
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((nd, nq, trial)) => {
                d = nd;
                q = nq;
                center = trial;
            }
            None if last_q.abs() > settings.q_cap || (q + step_q).abs() > settings.q_cap => {
                return Err(Error::BoundaryBlowup { q: q + step_q, cap: settings.q_cap });
            }
            None => {
                return Err(Error::NonConvergence { what: "Newton solve (no descent)", iterations: iteration });
            }
        }
    }
    Err(Error::NonConvergence { what: "Newton solve", iterations: settings.max_iterations })
}

/// Solve along `grid` by continuation from the grid point nearest `gamma_c`.
///
/// The point nearest `gamma_c` is seeded with `(1, 0)`; each arm then walks
/// outward, warm-starting from a linear extrapolation of its last two
/// converged points. Points outside `bounds` are not attempted. Failures are
/// recorded per point and never stop the sweep.
pub fn trace_curve(
    grid: &[f64],
    model: &Model,
    settings: &SolverSettings,
    gamma_c: f64,
    bounds: Option<(f64, f64)>,
) -> Result<Vec<CurvePoint>> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty t grid".into()));
    }
    if grid.iter().any(|t| !t.is_finite()) || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("t grid must be finite and strictly increasing".into()));
    }
    model.validate()?;
    settings.validate()?;
    let anchor = grid
        .iter()
        .enumerate()
        .min_by(|x, y| (x.1 - gamma_c).abs().total_cmp(&(y.1 - gamma_c).abs()))
        .map(|(i, _)| i)
        .expect("nonempty grid");

    let inside = |t: f64| bounds.is_none_or(|(lo, hi)| t > lo && t < hi);
    let solve = |t: f64, seed: (f64, f64)| -> CurvePoint {
        if !inside(t) {
            let (lo, hi) = bounds.expect("only bounded sweeps skip points");
            return CurvePoint::failed(
                t,
                &Error::InvalidParameter(format!("t = {t} is outside the usable window ({lo}, {hi})")),
            );
        }
        solve_dq(t, seed.0, seed.1, model, settings).unwrap_or_else(|e| CurvePoint::failed(t, &e))
    };

    let center = solve(grid[anchor], (1.0, 0.0));
    let arm = |indices: Vec<usize>| -> Vec<(usize, CurvePoint)> {
        let mut owned: Vec<(usize, CurvePoint)> = Vec::new();
        let mut last_two: Vec<CurvePoint> = if center.converged { vec![center.clone()] } else { Vec::new() };
        for i in indices {
            let t = grid[i];
            let seed = match last_two.as_slice() {
                [] => (1.0, 0.0),
                [p] => (p.d, p.q),
                [p0, p1] => {
                    let s = (t - p1.t) / (p1.t - p0.t);
                    (p1.d + s * (p1.d - p0.d), p1.q + s * (p1.q - p0.q))
                }
                _ => unreachable!(),
            };
            let mut point = solve(t, seed);
            if !point.converged && last_two.len() == 2 {
                // extrapolation can overshoot near the window edges; retry from the last solution
                let p1 = &last_two[1];
                let retry = solve(t, (p1.d, p1.q));
                if retry.converged {
                    point = retry;
                }
            }
            if point.converged {
                last_two.push(point.clone());
                if last_two.len() > 2 {
                    last_two.remove(0);
                }
            }
            owned.push((i, point));
        }
        owned
    };

    let (left, right) = std::thread::scope(|scope| {
        let left = scope.spawn(|| arm((0..anchor).rev().collect()));
        let right = arm((anchor + 1..grid.len()).collect());
        (left.join().expect("left continuation arm panicked"), right)
    });

    let mut points: Vec<Option<CurvePoint>> = vec![None; grid.len()];
    points[anchor] = Some(center);
    for (i, p) in left.into_iter().chain(right) {
        points[i] = Some(p);
    }
    Ok(points.into_iter().map(|p| p.expect("every grid point visited")).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

/// Dimensions of the zero set `N_t`, its complement, the set `S_t` and the
/// global attractor, filled in from `D(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DimensionReport {
    pub t: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub regime: Regime,
    pub dim_h_nt: Option<f64>,
    pub dim_p_nt: Option<f64>,
    pub dim_h_complement: Option<f64>,
    pub dim_p_complement: Option<f64>,
    pub dim_st: f64,
    pub dim_attractor: f64,
}

pub fn dimension_report(point: &CurvePoint, gamma: &GammaSummary) -> Result<DimensionReport> {
    if !point.converged {
        return Err(Error::Unconverged { t: point.t });
    }
    let t = point.t;
    if !(t > gamma.gamma_min_est && t < gamma.gamma_max_est) {
        return Err(Error::InvalidParameter(format!(
            "t = {t} is outside ({}, {})",
            gamma.gamma_min_est, gamma.gamma_max_est
        )));
    }
    let d = point.d;
    let regime = if (t - gamma.gamma_c).abs() <= 1e-12 * gamma.gamma_c.abs().max(1.0) {
        Regime::Critical
    } else if t < gamma.gamma_c {
        Regime::Subcritical
    } else {
        Regime::Supercritical
    };
    let report = DimensionReport {
        t,
        d,
        regime,
        dim_h_nt: None,
        dim_p_nt: None,
        dim_h_complement: None,
        dim_p_complement: None,
        dim_st: d + 1.0,
        dim_attractor: 3.0,
    };
    Ok(match regime {
        Regime::Subcritical => DimensionReport { dim_h_nt: Some(d + 1.0), dim_p_nt: Some(2.0), ..report },
        Regime::Critical => DimensionReport {
            dim_h_nt: Some(d + 1.0),
            dim_h_complement: Some(d + 1.0),
            dim_p_complement: Some(d + 1.0),
            ..report
        },
        Regime::Supercritical => DimensionReport {
            dim_h_complement: Some(d + 1.0),
            dim_p_complement: Some(d + 1.0),
            dim_attractor: d + 2.0,
            ..report
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> Model {
        Model::new(0.45, Forcing::cosine(1.001).unwrap()).unwrap()
    }

    #[test]
    fn gamma_c_quadrature_matches_closed_form() {
        for c in [1.001, 1.5, 2.0, 10.0] {
            let f = Forcing::cosine(c).unwrap();
            let oracle = ((c + (c * c - 1.0f64).sqrt()) / 2.0).ln();
            assert!((gamma_c(0.45, &f).unwrap() - oracle).abs() < 1e-10, "c = {c}");
        }
        let two = gamma_c(0.3, &Forcing::cosine(2.0).unwrap()).unwrap();
        assert!((two - 0.623_810_716).abs() < 1e-8);
        let huge = gamma_c(0.45, &Forcing::cosine(1e6).unwrap()).unwrap();
        assert!((huge - 1e6f64.ln()).abs() < 1e-6);
        assert_eq!(gamma_c(0.45, &Forcing::Cosine { c: 1.0 }), Err(Error::PositivityViolation { c: 1.0 }));
    }

    #[test]
    fn extremes_of_the_experiment() {
        let g = gamma_extremes(0.45, &Forcing::cosine(1.001).unwrap(), 12).unwrap();
        assert!((g.gamma_max_est - 2.001f64.ln()).abs() < 1e-9);
        assert_eq!(g.witness_max.len(), 1);
        assert!(g.gamma_min_est < g.gamma_c && g.gamma_c < g.gamma_max_est);
        assert_eq!(g.witness_min.len(), 3);
    }

    #[test]
    fn extremes_collapse_for_nearly_constant_forcing() {
        let g = gamma_extremes(0.45, &Forcing::cosine(1e6).unwrap(), 8).unwrap();
        assert!(g.width() <= 3e-6);
        assert!(matches!(usable_window(&g, 0.01, 0.01), Err(Error::GammaDegenerate { .. })));
        let flat = gamma_extremes(0.45, &Forcing::constant(2.0).unwrap(), 6).unwrap();
        assert_eq!(flat.width(), 0.0);
        assert!(matches!(usable_window(&flat, 0.01, 1e-3), Err(Error::GammaDegenerate { .. })));
    }

    #[test]
    fn scan_budget_is_enforced() {
        let f = Forcing::cosine(1.001).unwrap();
        assert!(matches!(gamma_extremes_with_budget(0.45, &f, 20, 1 << 10), Err(Error::ResourceLimit(_))));
        assert!(gamma_extremes(0.45, &f, 0).is_err());
    }

    #[test]
    fn anchor_point_is_recovered() {
        let gc = gamma_c(0.45, &model().forcing).unwrap();
        let settings = SolverSettings::default();
        for seed in [(1.0, 0.0), (1.05, 0.1)] {
            let p = solve_dq(gc, seed.0, seed.1, &model(), &settings).unwrap();
            assert!(p.converged);
            assert!((p.d - 1.0).abs() < 1e-6 && p.q.abs() < 1e-6, "{p:?}");
        }
    }

    #[test]
    fn window_backend_recovers_the_anchor() {
        let gc = gamma_c(0.45, &model().forcing).unwrap();
        let settings = SolverSettings { backend: Backend::Window, win_tol: 1e-8, ..Default::default() };
        let p = solve_dq(gc, 1.0, 0.0, &model(), &settings).unwrap();
        assert!((p.d - 1.0).abs() < 1e-6 && p.q.abs() < 1e-6, "{p:?}");
    }

    #[test]
    fn signs_on_either_side_of_the_anchor() {
        let gc = gamma_c(0.45, &model().forcing).unwrap();
        let settings = SolverSettings::default();
        let above = solve_dq(gc + 0.1, 1.0, 0.0, &model(), &settings).unwrap();
        assert!(above.d < 1.0 && above.q > 0.0);
        let below = solve_dq(gc - 0.1, 1.0, 0.0, &model(), &settings).unwrap();
        assert!(below.d < 1.0 && below.q < 0.0);
        for p in [&above, &below] {
            assert!(p.residual_q.abs() < settings.newton_tol && p.residual_dqdq.abs() < settings.newton_tol);
            assert!((0.0..=1.0).contains(&p.d));
            // D' = q / dQ_ddelta has the opposite sign of q
            assert!(p.slope * p.q < 0.0);
        }
    }

    #[test]
    fn solver_rejects_bad_input() {
        let settings = SolverSettings::default();
        assert!(solve_dq(f64::NAN, 1.0, 0.0, &model(), &settings).is_err());
        let bad = Model { a: 1.2, forcing: Forcing::Cosine { c: 1.001 } };
        assert!(solve_dq(0.0, 1.0, 0.0, &bad, &settings).is_err());
        let tight = SolverSettings { q_cap: 1e-3, ..Default::default() };
        let gc = gamma_c(0.45, &model().forcing).unwrap();
        assert!(matches!(solve_dq(gc + 0.5, 1.0, 0.0, &model(), &tight), Err(Error::BoundaryBlowup { .. })));
    }

    #[test]
    fn short_trace_is_unimodal() {
        let gc = gamma_c(0.45, &model().forcing).unwrap();
        let grid: Vec<f64> = (0..9).map(|i| gc - 0.2 + 0.05 * i as f64).collect();
        let points = trace_curve(&grid, &model(), &SolverSettings::default(), gc, None).unwrap();
        assert!(points.iter().all(|p| p.converged));
        let peak = points.iter().enumerate().max_by(|x, y| x.1.d.total_cmp(&y.1.d)).unwrap().0;
        assert_eq!(peak, 4);
        assert!(points[..=peak].windows(2).all(|w| w[0].d < w[1].d));
        assert!(points[peak..].windows(2).all(|w| w[0].d > w[1].d));
        assert!(trace_curve(&[0.1, 0.0], &model(), &SolverSettings::default(), gc, None).is_err());
    }

    #[test]
    fn trace_marks_points_outside_bounds() {
        let gc = gamma_c(0.45, &model().forcing).unwrap();
        let grid = [gc - 0.1, gc, gc + 3.0];
        let points = trace_curve(&grid, &model(), &SolverSettings::default(), gc, Some((gc - 1.0, gc + 1.0))).unwrap();
        assert!(points[0].converged && points[1].converged);
        assert!(!points[2].converged && points[2].failure.is_some());
    }

    fn converged(t: f64, d: f64) -> CurvePoint {
        CurvePoint {
            t,
            d,
            q: 0.0,
            residual_q: 0.0,
            residual_dqdq: 0.0,
            window: 20,
            converged: true,
            mu_u: 0.69,
            slope: 0.0,
            iterations: 1,
            failure: None,
        }
    }

    #[test]
    fn report_formulas() {
        let g = gamma_extremes(0.45, &Forcing::cosine(1.001).unwrap(), 8).unwrap();
        let r = dimension_report(&converged(g.gamma_c - 0.3, 0.7), &g).unwrap();
        assert_eq!(r.regime, Regime::Subcritical);
        assert!((r.dim_h_nt.unwrap() - 1.7).abs() < 1e-15);
        assert_eq!(r.dim_p_nt, Some(2.0));
        assert_eq!(r.dim_attractor, 3.0);

        let r = dimension_report(&converged(g.gamma_c + 0.5, 0.4), &g).unwrap();
        assert_eq!(r.regime, Regime::Supercritical);
        assert!((r.dim_h_complement.unwrap() - 1.4).abs() < 1e-15);
        assert!((r.dim_p_complement.unwrap() - 1.4).abs() < 1e-15);
        assert!((r.dim_attractor - 2.4).abs() < 1e-15);

        let r = dimension_report(&converged(g.gamma_c, 1.0), &g).unwrap();
        assert_eq!(r.regime, Regime::Critical);
        assert_eq!((r.dim_attractor, r.dim_st), (3.0, 2.0));

        let failed = CurvePoint::failed(0.0, &Error::NonConvergence { what: "x", iterations: 1 });
        assert_eq!(dimension_report(&failed, &g), Err(Error::Unconverged { t: 0.0 }));
        assert!(dimension_report(&converged(5.0, 0.1), &g).is_err());
    }
}
