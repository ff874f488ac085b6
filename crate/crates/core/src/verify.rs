//! Executable invariant suite behind `skewdim verify`.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::collocation::{pressure_collocation, Collocation};
use crate::error::Result;
use crate::fibre::{
    birkhoff_on_orbit, fibre_step, pullback_on_orbit, pullback_value, sample_with_backward_orbit, BakerPoint,
    Classification, FibreParams, PullbackSettings,
};
use crate::forcing::Forcing;
use crate::pressure::{bowen_closed_form, pressure_periodic, pressure_transfer, PotentialWindow};
use crate::solver::{gamma_c, gamma_extremes, solve_dq, trace_curve, CurvePoint, Model, SolverSettings};
use crate::zeroset::zeroset_scan;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyOptions {
    pub a: f64,
    pub c: f64,
    pub seed: u64,
    pub skip_montecarlo: bool,
    /// Evaluate the Bowen closed form at this partition parameter instead of
    /// the true one; the Bowen check must then fail.
    pub bowen_fault_a: Option<f64>,
    pub solver: SolverSettings,
    pub pullback: PullbackSettings,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            a: 0.45,
            c: 1.001,
            seed: 0,
            skip_montecarlo: false,
            bowen_fault_a: None,
            solver: SolverSettings::default(),
            pullback: PullbackSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub seconds: f64,
    pub detail: String,
}

/// The 3x3x3 grid of `(q, delta, t)` on `[-1, 1] x [0, 2] x [-0.5, 0.5]`.
pub fn pressure_check_grid() -> Vec<(f64, f64, f64)> {
    let mut grid = Vec::with_capacity(27);
    for q in [-1.0, 0.0, 1.0] {
        for delta in [0.0, 1.0, 2.0] {
            for t in [-0.5, 0.0, 0.5] {
                grid.push((q, delta, t));
            }
        }
    }
    grid
}

type Check<'a> = (&'static str, Box<dyn Fn() -> Result<(bool, String)> + 'a>);

/// Run every check and return one outcome per check.
pub fn run_suite(opts: &VerifyOptions) -> Result<Vec<CheckOutcome>> {
    let forcing = Forcing::cosine(opts.c)?;
    let model = Model::new(opts.a, forcing)?;
    let gc = gamma_c(opts.a, &forcing)?;

    let mut checks: Vec<Check> = vec![
        ("bowen_identity", Box::new(|| bowen_identity(opts))),
        ("periodic_closed_form", Box::new(|| periodic_closed_form(opts))),
        ("derivative_consistency", Box::new(|| derivative_consistency(opts))),
        ("convexity_in_q", Box::new(|| convexity_in_q(opts))),
        ("estimator_agreement", Box::new(|| estimator_agreement(opts))),
        ("collocation_vs_window", Box::new(|| collocation_vs_window(opts))),
        ("gamma_extremes", Box::new(|| gamma_bounds(opts, gc))),
        ("anchor_solve", Box::new(|| anchor_solve(opts, &model, gc))),
        ("curve_shape_and_sign_law", Box::new(|| curve_checks(opts, &model, gc))),
        ("pullback_monotone_and_invariant", Box::new(|| pullback_checks(opts, gc))),
    ];
    if !opts.skip_montecarlo {
        checks.push(("zeroset_transition", Box::new(|| zeroset_transition(opts, gc))));
        checks.push(("birkhoff_lebesgue_average", Box::new(|| birkhoff_average(opts, gc))));
    }

    let mut outcomes = Vec::with_capacity(checks.len());
    for (name, check) in checks {
        let start = Instant::now();
        let (passed, detail) = match check() {
            Ok(result) => result,
            Err(e) => (false, format!("error: {e}")),
        };
        outcomes.push(CheckOutcome { name, passed, seconds: start.elapsed().as_secs_f64(), detail });
    }
    Ok(outcomes)
}

fn bowen_identity(opts: &VerifyOptions) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for a in [0.3, opts.a, 0.5] {
        let closed_a = opts.bowen_fault_a.unwrap_or(a);
        for delta in [0.0, 0.5, 1.0, 2.0] {
            for m in [1, 4, 8] {
                let win = PotentialWindow::new(m, a, Forcing::cosine(opts.c)?)?;
                let r = pressure_transfer(0.0, delta, 0.3, &win)?;
                worst = worst.max((r.value - bowen_closed_form(delta, closed_a)).abs());
            }
        }
    }
    Ok((worst <= 1e-12, format!("max |Q(delta, 0, t) - log(a^delta + (1-a)^delta)| = {worst:.3e}")))
}

fn periodic_closed_form(opts: &VerifyOptions) -> Result<(bool, String)> {
    let win = PotentialWindow::new(3, opts.a, Forcing::cosine(opts.c)?)?;
    let entropy = (pressure_periodic(0.0, 0.0, 0.0, 10, &win)? - 2f64.ln()).abs();
    let srb = pressure_periodic(0.0, 1.0, 0.0, 10, &win)?.abs();
    Ok((entropy <= 1e-12 && srb <= 1e-12, format!("entropy error {entropy:.3e}, SRB error {srb:.3e}")))
}

fn derivative_consistency(opts: &VerifyOptions) -> Result<(bool, String)> {
    const H: f64 = 1e-5;
    let win = PotentialWindow::new(8, opts.a, Forcing::cosine(opts.c)?)?;
    let mut worst: f64 = 0.0;
    for (q, delta, t) in pressure_check_grid() {
        let r = pressure_transfer(q, delta, t, &win)?;
        let value = |q: f64, d: f64| pressure_transfer(q, d, t, &win).map(|r| r.value);
        let fd_q = (value(q + H, delta)? - value(q - H, delta)?) / (2.0 * H);
        let fd_d = (value(q, delta + H)? - value(q, delta - H)?) / (2.0 * H);
        worst = worst.max((r.dq_dq - fd_q).abs()).max((r.dq_ddelta - fd_d).abs());
    }
    Ok((worst <= 1e-7, format!("max derivative mismatch {worst:.3e} (m = 8, step {H:e})")))
}

fn convexity_in_q(opts: &VerifyOptions) -> Result<(bool, String)> {
    let win = PotentialWindow::new(8, opts.a, Forcing::cosine(opts.c)?)?;
    let mut worst = f64::INFINITY;
    for (delta, t) in [(0.5, -0.5), (1.0, 0.0), (1.5, 0.4)] {
        let values: Vec<f64> = (0..=32)
            .map(|i| pressure_transfer(-2.0 + 0.125 * i as f64, delta, t, &win).map(|r| r.value))
            .collect::<Result<_>>()?;
        for w in values.windows(3) {
            worst = worst.min(w[0] - 2.0 * w[1] + w[2]);
        }
    }
    Ok((worst >= -1e-10, format!("min second difference {worst:.3e}")))
}

fn estimator_agreement(opts: &VerifyOptions) -> Result<(bool, String)> {
    let win = PotentialWindow::new(8, opts.a, Forcing::cosine(opts.c)?)?;
    let mut worst = (0.0f64, (0.0, 0.0, 0.0));
    for (q, delta, t) in pressure_check_grid() {
        let diff = (pressure_transfer(q, delta, t, &win)?.value - pressure_periodic(q, delta, t, 12, &win)?).abs();
        if diff > worst.0 {
            worst = (diff, (q, delta, t));
        }
    }
    Ok((
        worst.0 <= 1e-4,
        format!("max |transfer - periodic| = {:.3e} at (q, delta, t) = {:?} (m = 8, n = 12)", worst.0, worst.1),
    ))
}

fn collocation_vs_window(opts: &VerifyOptions) -> Result<(bool, String)> {
    let grid = Collocation::new(opts.a, Forcing::cosine(opts.c)?, 24)?;
    let mut worst_ratio: f64 = 0.0;
    for (q, delta, t) in pressure_check_grid() {
        let exact = pressure_collocation(q, delta, t, &grid)?;
        let win = PotentialWindow::new(10, opts.a, Forcing::cosine(opts.c)?)?;
        let r = pressure_transfer(q, delta, t, &win)?;
        let gap = (r.value - exact.value).abs();
        if r.est_error > 0.0 {
            worst_ratio = worst_ratio.max(gap / r.est_error);
        } else if gap > 1e-12 {
            worst_ratio = f64::INFINITY;
        }
    }
    Ok((worst_ratio <= 1.0, format!("max |window - collocation| / truncation bound = {worst_ratio:.3e} (m = 10)")))
}

fn gamma_bounds(opts: &VerifyOptions, gc: f64) -> Result<(bool, String)> {
    let g = gamma_extremes(opts.a, &Forcing::cosine(opts.c)?, 12)?;
    let closed = Forcing::cosine(opts.c)?.log_mean_closed_form();
    let ok = (gc - closed).abs() <= 1e-9 && g.gamma_min_est < gc && gc < g.gamma_max_est;
    Ok((
        ok,
        format!(
            "gamma_c = {gc:.12} (closed form {closed:.12}), scan ({:.9}, {:.9}) witnesses {} / {}",
            g.gamma_min_est, g.gamma_max_est, g.witness_min, g.witness_max
        ),
    ))
}

fn anchor_solve(opts: &VerifyOptions, model: &Model, gc: f64) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for (d0, q0) in [(1.0, 0.0), (1.05, 0.1)] {
        let p = solve_dq(gc, d0, q0, model, &opts.solver)?;
        worst = worst.max((p.d - 1.0).abs()).max(p.q.abs());
    }
    Ok((worst <= 1e-6, format!("max |(D, q) - (1, 0)| = {worst:.3e} from seeds (1, 0) and (1.05, 0.1)")))
}

/// Centered finite-difference slope of `D` at each interior converged point.
pub fn finite_difference_slopes(points: &[CurvePoint]) -> Vec<Option<f64>> {
    (0..points.len())
        .map(|i| {
            if i == 0 || i + 1 == points.len() {
                return None;
            }
            let (l, r) = (&points[i - 1], &points[i + 1]);
            (l.converged && r.converged && points[i].converged).then(|| (r.d - l.d) / (r.t - l.t))
        })
        .collect()
}

fn curve_checks(opts: &VerifyOptions, model: &Model, gc: f64) -> Result<(bool, String)> {
    let grid: Vec<f64> = (0..80).map(|i| gc - 0.6 + 1.8 * i as f64 / 79.0).collect();
    let points = trace_curve(&grid, model, &opts.solver, gc, None)?;
    let converged: Vec<&CurvePoint> = points.iter().filter(|p| p.converged).collect();
    let unimodal = converged.windows(2).all(|w| {
        let (l, r) = (w[0], w[1]);
        if r.t <= gc {
            l.d < r.d
        } else if l.t >= gc {
            l.d > r.d
        } else {
            true
        }
    });
    let in_range = converged.iter().all(|p| (0.0..=1.0).contains(&p.d));
    let slopes = finite_difference_slopes(&points);
    let mut sign_violations = 0;
    let mut worst_slope_gap: f64 = 0.0;
    for (p, slope) in points.iter().zip(&slopes) {
        if let Some(s) = slope {
            if s.abs() > 1e-4 && p.q.signum() != -s.signum() {
                sign_violations += 1;
            }
            worst_slope_gap = worst_slope_gap.max((p.slope - s).abs());
        }
    }
    let max_d = converged.iter().map(|p| p.d).fold(f64::NEG_INFINITY, f64::max);
    let ok = converged.len() >= 70 && unimodal && in_range && sign_violations == 0 && max_d >= 0.998 && worst_slope_gap <= 5e-3;
    Ok((
        ok,
        format!(
            "{}/80 converged, unimodal {unimodal}, max D {max_d:.6}, sign violations {sign_violations}, max |q/dQ_ddelta - FD slope| {worst_slope_gap:.2e}",
            converged.len()
        ),
    ))
}

fn pullback_checks(opts: &VerifyOptions, gc: f64) -> Result<(bool, String)> {
    const SAMPLES: usize = 100;
    let forcing = Forcing::cosine(opts.c)?;
    let lower = FibreParams::new(opts.a, gc - 0.3, forcing)?;
    let upper = FibreParams::new(opts.a, gc - 0.2, forcing)?;
    let s = &opts.pullback;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let (mut tested, mut drawn) = (0, 0);
    let (mut worst_invariance, mut n_violations, mut t_violations) = (0.0f64, 0, 0);
    while tested < SAMPLES && drawn < 10 * SAMPLES {
        drawn += 1;
        let (p, orbit) = sample_with_backward_orbit(&mut rng, opts.a, s.n_max)?;
        let here = pullback_on_orbit(&orbit, &lower, s.zero_threshold, s.rel_tol);
        if here.classification != Classification::Positive {
            continue;
        }
        tested += 1;
        // the image shares the backward orbit of p
        let image_orbit: Vec<BakerPoint> = std::iter::once(p).chain(orbit.iter().copied()).collect();
        let there = pullback_on_orbit(&image_orbit, &lower, s.zero_threshold, s.rel_tol);
        let residual = (fibre_step(here.value, p, &lower) - there.value).abs() / there.value;
        worst_invariance = worst_invariance.max(residual / s.rel_tol);

        let horizon = here.n_used.min(256);
        let values: Vec<f64> = (1..=horizon).map(|n| pullback_value(&orbit, &lower, n)).collect();
        if values.windows(2).any(|w| w[1] > w[0]) {
            n_violations += 1;
        }
        let colder = pullback_on_orbit(&orbit, &upper, s.zero_threshold, s.rel_tol);
        if colder.value > here.value {
            t_violations += 1;
        }
    }
    let ok = tested == SAMPLES && worst_invariance <= 10.0 && n_violations == 0 && t_violations == 0;
    Ok((
        ok,
        format!(
            "{tested} positive samples, max invariance residual {worst_invariance:.2} x rel_tol, n-monotonicity violations {n_violations}, t-monotonicity violations {t_violations}"
        ),
    ))
}

fn zeroset_transition(opts: &VerifyOptions, gc: f64) -> Result<(bool, String)> {
    let forcing = Forcing::cosine(opts.c)?;
    let settings = PullbackSettings { n_max: 5000, ..opts.pullback };
    let below = zeroset_scan(&FibreParams::new(opts.a, gc - 0.1, forcing)?, 1000, 5000, opts.seed, &settings)?;
    let above = zeroset_scan(&FibreParams::new(opts.a, gc + 0.1, forcing)?, 1000, 5000, opts.seed, &settings)?;
    let trichotomy = [below.trichotomy_agreement(0.1), above.trichotomy_agreement(0.1)]
        .into_iter()
        .flatten()
        .fold(1.0f64, f64::min);
    let ok = below.fraction_zero <= 0.05 && above.fraction_zero >= 0.95 && trichotomy >= 0.95;
    Ok((
        ok,
        format!(
            "fraction zero {:.3} at gamma_c - 0.1, {:.3} at gamma_c + 0.1, trichotomy agreement {trichotomy:.3}",
            below.fraction_zero, above.fraction_zero
        ),
    ))
}

fn birkhoff_average(opts: &VerifyOptions, gc: f64) -> Result<(bool, String)> {
    let forcing = Forcing::cosine(opts.c)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(1));
    let mut close = 0;
    for _ in 0..100 {
        let (_, orbit) = sample_with_backward_orbit(&mut rng, opts.a, 10_000)?;
        if (birkhoff_on_orbit(&orbit, &forcing) - gc).abs() <= 0.05 {
            close += 1;
        }
    }
    Ok((close >= 90, format!("{close}/100 backward averages (n = 10^4) within 0.05 of gamma_c")))
}
