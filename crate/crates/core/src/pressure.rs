//! Topological pressure `Q(delta, q, t) = P(q (Phi - t) - delta u)` on the full 2-shift.
//!
//! `Phi = log g(v)` depends on the past and `u = -log |dB_a|E^s|` on the current
//! symbol. Shifting by `m` turns the potential into a function of `m + 1` forward
//! symbols `w_0 .. w_m`: the first `m` symbols (read most-recent-last) locate `v`
//! to within a cylinder of width `max(a, 1-a)^m`, and `w_m` picks the contraction
//! rate. Pressure is then the log spectral radius of a positive transfer matrix
//! on the `2^m` states `w_0 .. w_{m-1}`.
//!
//! State `s` stores `w_0` in its most significant bit, so the successor after
//! emitting symbol `b` is `((s << 1) | b) & mask`.

use serde::Serialize;

use crate::error::{check_partition, Error, Result};
use crate::forcing::Forcing;
use crate::symbolic::{ContractionSystem, SymbolWord};

/// Largest window the engine will build (`2^24` states).
pub const MAX_WINDOW: usize = 24;

/// Largest number of periodic words the periodic-orbit estimator will enumerate.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PotentialWindow {
    pub m: usize,
    pub a: f64,
    pub forcing: Forcing,
    /// Point of `[0, 1]` pushed through the past branches to stand in for `v`.
    pub anchor: f64,
}

impl PotentialWindow {
    pub fn new(m: usize, a: f64, forcing: Forcing) -> Result<Self> {
        let win = PotentialWindow { m, a, forcing, anchor: 0.5 };
        win.validate()?;
        Ok(win)
    }

    pub fn with_m(&self, m: usize) -> Self {
        PotentialWindow { m, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        check_partition(self.a)?;
        self.forcing.validate()?;
        if self.m == 0 || self.m > MAX_WINDOW {
            return Err(Error::InvalidParameter(format!(
                "window length m = {} must lie in 1..={MAX_WINDOW}",
                self.m
            )));
        }
        if !(0.0..=1.0).contains(&self.anchor) {
            return Err(Error::InvalidParameter(format!("anchor {} is outside [0, 1]", self.anchor)));
        }
        Ok(())
    }

    /// `sup |Phi - Phi_window|`, a bound on the pressure error per unit `|q|`.
    pub fn truncation_bound(&self) -> f64 {
        let rho = self.a.max(1.0 - self.a);
        self.forcing.log_lipschitz() * rho.powi(self.m as i32) * self.anchor.max(1.0 - self.anchor)
    }

    fn log_rates(&self) -> [f64; 2] {
        [self.a.ln(), (1.0 - self.a).ln()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PressureResult {
    pub value: f64,
    /// `dQ/dq`, the equilibrium average of `Phi - t`.
    #[serde(rename = "dQ_dq")]
    pub dq_dq: f64,
    /// `dQ/d delta = -mu(u)`, always negative.
    #[serde(rename = "dQ_ddelta")]
    pub dq_ddelta: f64,
    pub m: usize,
    pub power_iterations: usize,
    pub est_error: f64,
}

/// Power-iteration controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerSettings {
    /// Relative gap between the Collatz-Wielandt bounds at which iteration stops.
    pub rel_tol: f64,
    pub max_iterations: usize,
}

impl Default for PowerSettings {
    fn default() -> Self {
        PowerSettings { rel_tol: 1e-13, max_iterations: 200_000 }
    }
}

/// `q (log g(v_hat) - t) + delta log r(w_m)` for a word `w_0 .. w_m`.
pub fn window_potential(word: &SymbolWord, q: f64, delta: f64, t: f64, win: &PotentialWindow) -> Result<f64> {
    win.validate()?;
    if word.len() != win.m + 1 {
        return Err(Error::InvalidParameter(format!(
            "window potential needs a word of length m + 1 = {}, got {}",
            win.m + 1,
            word.len()
        )));
    }
    let sys = ContractionSystem::new(win.a)?;
    let w = word.symbols();
    // most recent past symbol is w_{m-1}, so it is applied last
    let v_hat = w[..win.m].iter().fold(win.anchor, |x, &s| sys.apply(s, x));
    Ok(q * (win.forcing.log_eval(v_hat) - t) + delta * win.log_rates()[w[win.m] as usize])
}

/// `v_hat` for every state of the window.
fn state_coordinates(win: &PotentialWindow) -> Vec<f64> {
    let sys = ContractionSystem::new(win.a).expect("validated window");
    let m = win.m;
    (0..1usize << m)
        .map(|s| (0..m).rev().fold(win.anchor, |x, bit| sys.apply(((s >> bit) & 1) as u8, x)))
        .collect()
}

/// The weighted transition matrix `A[s, succ_b(s)] = exp(q (Phi_s - t)) r_b^delta`,
/// stored as a row scale times a column weight.
struct Transfer {
    m: usize,
    /// `Phi_s - t` per state.
    observable: Vec<f64>,
    /// `exp(q (Phi_s - t) - shift)`.
    row_scale: Vec<f64>,
    shift: f64,
    /// `r_b^delta`.
    col_weight: [f64; 2],
    log_rates: [f64; 2],
}

impl Transfer {
    fn build(q: f64, delta: f64, t: f64, win: &PotentialWindow) -> Self {
        let log_rates = win.log_rates();
        let observable: Vec<f64> =
            state_coordinates(win).into_iter().map(|v| win.forcing.log_eval(v) - t).collect();
        let shift = observable.iter().map(|&o| q * o).fold(f64::NEG_INFINITY, f64::max);
        // floored so that no state decouples (keeps the matrix primitive in floating point)
        let row_scale = observable.iter().map(|&o| (q * o - shift).exp().max(1e-300)).collect();
        let col_weight = [(delta * log_rates[0]).exp(), (delta * log_rates[1]).exp()];
        Transfer { m: win.m, observable, row_scale, shift, col_weight, log_rates }
    }

    fn mask(&self) -> usize {
        (1 << self.m) - 1
    }

    /// `out = A x`.
    fn apply_right(&self, x: &[f64], out: &mut [f64]) {
        let mask = self.mask();
        let [w0, w1] = self.col_weight;
        for (s, o) in out.iter_mut().enumerate() {
            let base = (s << 1) & mask;
            *o = self.row_scale[s] * (w0 * x[base] + w1 * x[base | 1]);
        }
    }

    /// `out = y A`.
    fn apply_left(&self, y: &[f64], out: &mut [f64]) {
        let high = 1 << (self.m - 1);
        for (s, o) in out.iter_mut().enumerate() {
            let p0 = s >> 1;
            let p1 = p0 | high;
            let inflow = y[p0] * self.row_scale[p0] + y[p1] * self.row_scale[p1];
            *o = self.col_weight[s & 1] * inflow;
        }
    }
}

/// Power iteration for a positive operator; returns `(eigenvalue, vector, iterations)`.
///
/// Two iteration maps are tried on short probes, `A` itself and `A + sigma I`
/// with `sigma` the running eigenvalue estimate, and the one whose
/// Collatz-Wielandt gap shrinks faster is kept. The shift damps the
/// eigenvalues `~lambda e^{2 pi i k / p}` that appear when the weights
/// concentrate on a period-`p` cycle; it slows convergence when the runner-up
/// eigenvalue is real and close to `lambda`. Iteration stops when
/// `min (Ax)_s / x_s <= lambda <= max (Ax)_s / x_s` agree to `rel_tol`.
fn perron<F>(n: usize, apply: F, settings: &PowerSettings) -> Result<(f64, Vec<f64>, usize)>
where
    F: Fn(&[f64], &mut [f64]),
{
    const PROBE: usize = 40;
    let mut x = vec![1.0; n];
    let mut y = vec![0.0; n];
    let mut shifted = false;
    let mut probe_start = (0usize, f64::NAN);
    let mut plain_rate = f64::NAN;
    for it in 1..=settings.max_iterations {
        apply(&x, &mut y);
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for (yi, xi) in y.iter().zip(&x) {
            let r = yi / xi;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        if !(lo > 0.0) || !hi.is_finite() {
            return Err(Error::NonConvergence { what: "transfer power iteration (overflow)", iterations: it });
        }
        let gap = (hi - lo) / hi;
        if gap <= settings.rel_tol {
            let norm = y.iter().copied().fold(0.0, f64::max);
            x.iter_mut().zip(&y).for_each(|(xi, yi)| *xi = yi / norm);
            return Ok((0.5 * (lo + hi), x, it));
        }

        // probes: iterations [PROBE, 2 PROBE) plain, [2 PROBE, 3 PROBE) shifted
        if it == PROBE || it == 2 * PROBE || it == 3 * PROBE {
            if it > PROBE {
                let rate = (gap / probe_start.1).powf(1.0 / (it - probe_start.0) as f64);
                if it == 2 * PROBE {
                    plain_rate = rate;
                    shifted = true;
                } else {
                    shifted = rate < plain_rate;
                }
            }
            probe_start = (it, gap);
        }

        let sigma = if shifted { 0.5 * (lo + hi) } else { 0.0 };
        let norm = y.iter().zip(&x).map(|(yi, xi)| yi + sigma * xi).fold(0.0, f64::max);
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = (yi + sigma * *xi) / norm;
        }
    }
    Err(Error::NonConvergence { what: "transfer power iteration", iterations: settings.max_iterations })
}

pub fn pressure_transfer(q: f64, delta: f64, t: f64, win: &PotentialWindow) -> Result<PressureResult> {
    pressure_transfer_with(q, delta, t, win, &PowerSettings::default())
}

pub fn pressure_transfer_with(
    q: f64,
    delta: f64,
    t: f64,
    win: &PotentialWindow,
    settings: &PowerSettings,
) -> Result<PressureResult> {
    win.validate()?;
    if !(q.is_finite() && delta.is_finite() && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite pressure arguments ({q}, {delta}, {t})")));
    }
    let op = Transfer::build(q, delta, t, win);
    let n = 1usize << op.m;
    let (lambda, right, it_r) = perron(n, |x, out| op.apply_right(x, out), settings)?;
    let (_, left, it_l) = perron(n, |y, out| op.apply_left(y, out), settings)?;

    // Transition measure mu(s -> succ_b(s)) = l_s A[s, succ] r_succ / (lambda <l, r>);
    // its state marginal is l_s r_s / <l, r>.
    let mask = op.mask();
    let (mut pairing, mut phi_mass, mut u_mass) = (0.0, 0.0, 0.0);
    for s in 0..n {
        let lr = left[s] * right[s];
        pairing += lr;
        phi_mass += lr * op.observable[s];
        let base = (s << 1) & mask;
        let flow0 = op.col_weight[0] * right[base];
        let flow1 = op.col_weight[1] * right[base | 1];
        u_mass += left[s] * op.row_scale[s] * (flow0 * op.log_rates[0] + flow1 * op.log_rates[1]);
    }
    Ok(PressureResult {
        value: lambda.ln() + op.shift,
        dq_dq: phi_mass / pairing,
        dq_ddelta: u_mass / (lambda * pairing),
        m: win.m,
        power_iterations: it_r + it_l,
        est_error: q.abs() * win.truncation_bound(),
    })
}

/// `(1/n) log sum_{sigma^n w = w} exp(S_n potential(w))`, enumerating all `2^n` cycles.
pub fn pressure_periodic(q: f64, delta: f64, t: f64, n: usize, win: &PotentialWindow) -> Result<f64> {
    pressure_periodic_with_budget(q, delta, t, n, win, DEFAULT_ENUMERATION_BUDGET)
}

pub fn pressure_periodic_with_budget(
    q: f64,
    delta: f64,
    t: f64,
    n: usize,
    win: &PotentialWindow,
    budget: u64,
) -> Result<f64> {
    win.validate()?;
    if n < win.m + 1 {
        return Err(Error::InvalidParameter(format!("period n = {n} must be at least m + 1 = {}", win.m + 1)));
    }
    if n >= 64 || (1u64 << n) > budget {
        return Err(Error::ResourceLimit(format!(
            "2^{n} periodic words exceed the enumeration budget of {budget}"
        )));
    }
    let op = Transfer::build(q, delta, t, win);
    let m = win.m;
    let state_mask = (1u64 << m) - 1;
    // Birkhoff sum around the cycle w_0 .. w_{n-1}: step k sees state
    // w_k .. w_{k+m-1} and emits w_{k+m} (indices mod n).
    let sums: Vec<f64> = (0..1u64 << n)
        .map(|bits| {
            let symbol = |k: usize| ((bits >> (n - 1 - k % n)) & 1) as usize;
            let mut state = (0..m).fold(0u64, |s, k| (s << 1) | symbol(k) as u64);
            let mut total = 0.0;
            for k in 0..n {
                let b = symbol(k + m);
                total += q * op.observable[state as usize] + delta * op.log_rates[b];
                state = ((state << 1) | b as u64) & state_mask;
            }
            total
        })
        .collect();
    let top = sums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mass: f64 = sums.iter().map(|s| (s - top).exp()).sum();
    Ok((top + mass.ln()) / n as f64)
}

/// Refine the window from `win.m` until successive values agree to `tol`.
///
/// The returned result is the finer of the two windows compared, with
/// `est_error = |Q_m - Q_{m+1}|`.
pub fn pressure_adaptive(
    q: f64,
    delta: f64,
    t: f64,
    tol: f64,
    win: &PotentialWindow,
    m_max: usize,
) -> Result<PressureResult> {
    refine(q, delta, t, tol, win, m_max, |fine, coarse| (fine.value - coarse.value).abs())
}

/// Like [`pressure_adaptive`], but successive windows must also agree in
/// `dQ/dq`. At `q = 0` the value does not depend on the window while `dQ/dq`
/// still carries the truncation error, and the dimension solver drives
/// `dQ/dq` to zero.
pub fn pressure_adaptive_joint(
    q: f64,
    delta: f64,
    t: f64,
    tol: f64,
    win: &PotentialWindow,
    m_max: usize,
) -> Result<PressureResult> {
    refine(q, delta, t, tol, win, m_max, |fine, coarse| {
        (fine.value - coarse.value).abs().max((fine.dq_dq - coarse.dq_dq).abs())
    })
}

fn refine<F>(
    q: f64,
    delta: f64,
    t: f64,
    tol: f64,
    win: &PotentialWindow,
    m_max: usize,
    difference: F,
) -> Result<PressureResult>
where
    F: Fn(&PressureResult, &PressureResult) -> f64,
{
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("window tolerance {tol} must be positive")));
    }
    let mut m = win.m;
    let mut coarse = pressure_transfer(q, delta, t, &win.with_m(m))?;
    loop {
        if m + 1 > m_max.min(MAX_WINDOW) {
            return Err(Error::ResourceLimit(format!(
                "window refinement reached m_max = {m_max} without successive windows agreeing to {tol:e}"
            )));
        }
        let fine = pressure_transfer(q, delta, t, &win.with_m(m + 1))?;
        let diff = difference(&fine, &coarse);
        if diff < tol {
            return Ok(PressureResult { est_error: diff, ..fine });
        }
        coarse = fine;
        m += 1;
    }
}

/// `log(a^delta + (1 - a)^delta)`, the pressure of `-delta u` alone.
pub fn bowen_closed_form(delta: f64, a: f64) -> f64 {
    (a.powf(delta) + (1.0 - a).powf(delta)).ln()
}
