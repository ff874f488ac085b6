//! Pressure from the transfer operator acting on functions of `v`.
//!
//! As the window length grows, the window transfer matrix converges to
//!
//! ```text
//! (L h)(v) = sum_b r_b^delta exp(q (Phi(c_b v) - t)) h(c_b v),    v in [0, 1],
//! ```
//!
//! whose spectral radius is `exp Q(delta, q, t)`. The leading eigenfunction is
//! real analytic on `[0, 1]`; its complex singularities sit at the preimages
//! under the branches `c_b` of the complex zeros of `g`. Chebyshev collocation
//! on panels graded toward those points therefore converges geometrically in
//! the number of nodes per panel, while the window engine is limited by its
//! `max(a, 1 - a)^m` truncation.
//!
//! The discretized operator has a few negative entries (Lagrange weights), so
//! its leading eigenpair is found with restarted Arnoldi rather than a
//! Perron-Frobenius power iteration.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};

use crate::error::{check_partition, Error, Result};
use crate::forcing::Forcing;
use crate::pressure::PressureResult;
use crate::symbolic::ContractionSystem;

pub const DEFAULT_NODES: usize = 16;
pub const MAX_NODES: usize = 256;

/// Panels are split until each half-width is at most this multiple of the
/// distance to the nearest singularity.
const GRADING: f64 = 1.0;
const MAX_PANELS: usize = 4096;

const KRYLOV_DIM: usize = 32;
const MAX_RESTARTS: usize = 400;
const EIGEN_TOL: f64 = 1e-14;

/// A panel partition of `[0, 1]` with `nodes` Chebyshev points per panel and
/// the interpolation rows that carry nodal values to the points `c_b(v_i)`.
#[derive(Debug, Clone)]
pub struct Collocation {
    a: f64,
    forcing: Forcing,
    nodes: usize,
    panels: Vec<(f64, f64)>,
    points: Vec<f64>,
    /// First column of the panel containing `c_b(v_i)`, at index `2 i + b`.
    target: Vec<usize>,
    /// Lagrange weights of `c_b(v_i)`, `nodes` per entry of `target`.
    weights: Vec<f64>,
    /// `Phi(c_b(v_i))`, at index `2 i + b`.
    phi: Vec<f64>,
}

impl Collocation {
    pub fn new(a: f64, forcing: Forcing, nodes: usize) -> Result<Self> {
        check_partition(a)?;
        forcing.validate()?;
        if !(2..=MAX_NODES).contains(&nodes) {
            return Err(Error::InvalidParameter(format!(
                "collocation needs 2..={MAX_NODES} nodes per panel, got {nodes}"
            )));
        }
        let panels = graded_panels(a, &forcing)?;
        Ok(Self::assemble(a, forcing, nodes, panels))
    }

    /// Same panels, different number of nodes per panel.
    pub fn with_nodes(&self, nodes: usize) -> Result<Self> {
        if !(2..=MAX_NODES).contains(&nodes) {
            return Err(Error::InvalidParameter(format!(
                "collocation needs 2..={MAX_NODES} nodes per panel, got {nodes}"
            )));
        }
        Ok(Self::assemble(self.a, self.forcing, nodes, self.panels.clone()))
    }

    fn assemble(a: f64, forcing: Forcing, nodes: usize, panels: Vec<(f64, f64)>) -> Self {
        let sys = ContractionSystem::new(a).expect("validated partition");
        let reference: Vec<f64> = (0..nodes).map(|j| chebyshev_node(j, nodes)).collect();
        let bary: Vec<f64> = (0..nodes)
            .map(|j| {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * ((2 * j + 1) as f64 * PI / (2 * nodes) as f64).sin()
            })
            .collect();
        let points: Vec<f64> = panels
            .iter()
            .flat_map(|&(lo, hi)| reference.iter().map(move |s| 0.5 * (lo + hi) + 0.5 * (hi - lo) * s))
            .collect();
        let uppers: Vec<f64> = panels.iter().map(|p| p.1).collect();

        let n = points.len();
        let mut target = Vec::with_capacity(2 * n);
        let mut weights = Vec::with_capacity(2 * n * nodes);
        let mut phi = Vec::with_capacity(2 * n);
        for &v in &points {
            for b in 0..2u8 {
                let y = sys.apply(b, v);
                let k = uppers.partition_point(|&hi| hi < y).min(panels.len() - 1);
                let (lo, hi) = panels[k];
                let s = (2.0 * y - lo - hi) / (hi - lo);
                target.push(k * nodes);
                weights.extend(lagrange_row(s, &reference, &bary));
                phi.push(forcing.log_eval(y));
            }
        }
        Collocation { a, forcing, nodes, panels, points, target, weights, phi }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn forcing(&self) -> Forcing {
        self.forcing
    }

    pub fn nodes_per_panel(&self) -> usize {
        self.nodes
    }

    pub fn panels(&self) -> &[(f64, f64)] {
        &self.panels
    }

    /// Collocation points, panel by panel.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    #[inline]
    fn interpolate(&self, row: usize, x: &[f64]) -> f64 {
        let start = self.target[row];
        let w = &self.weights[row * self.nodes..(row + 1) * self.nodes];
        w.iter().zip(&x[start..start + self.nodes]).map(|(a, b)| a * b).sum()
    }
}

/// `cos((2 j + 1) pi / (2 n))`, the Chebyshev points of the first kind.
fn chebyshev_node(j: usize, n: usize) -> f64 {
    ((2 * j + 1) as f64 * PI / (2 * n) as f64).cos()
}

fn lagrange_row(s: f64, reference: &[f64], bary: &[f64]) -> Vec<f64> {
    if let Some(hit) = reference.iter().position(|&r| r == s) {
        return (0..reference.len()).map(|j| if j == hit { 1.0 } else { 0.0 }).collect();
    }
    let raw: Vec<f64> = reference.iter().zip(bary).map(|(r, w)| w / (s - r)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Complex singularities, as `(re, im)` with `im > 0`, of the leading
/// eigenfunction and of the coefficients `Phi o c_b`.
fn singularities(a: f64, forcing: &Forcing) -> Vec<(f64, f64)> {
    let height = match *forcing {
        // c + cos(2 pi z) = 0 at z = 1/2 + k +- i acosh(c) / (2 pi)
        Forcing::Cosine { c } => c.acosh() / TAU,
        Forcing::Constant { .. } => return Vec::new(),
    };
    let sys = ContractionSystem::new(a).expect("validated partition");
    let preimage = |b: u8, (re, im): (f64, f64)| {
        let (slope, offset) = sys.coefficients(b);
        ((re - offset) / slope, im / slope)
    };
    let relevant = |(re, im): (f64, f64)| im < 2.0 && (-2.0..=3.0).contains(&re);
    let mut found = Vec::new();
    let mut front: Vec<(f64, f64)> =
        (-1..=2).flat_map(|k| [0u8, 1].map(|b| preimage(b, (0.5 + k as f64, height)))).collect();
    while !front.is_empty() {
        let next = front
            .iter()
            .filter(|&&z| relevant(z))
            .flat_map(|&z| [0u8, 1].map(|b| preimage(b, z)))
            .collect();
        found.extend(front.into_iter().filter(|&z| relevant(z)));
        front = next;
    }
    found
}

fn graded_panels(a: f64, forcing: &Forcing) -> Result<Vec<(f64, f64)>> {
    let sing = singularities(a, forcing);
    let distance = |lo: f64, hi: f64| {
        sing.iter()
            .map(|&(re, im)| (re - re.clamp(lo, hi)).hypot(im))
            .fold(f64::INFINITY, f64::min)
    };
    let mut panels = Vec::new();
    let mut stack = vec![(0.0, 1.0)];
    while let Some((lo, hi)) = stack.pop() {
        if 0.5 * (hi - lo) <= GRADING * distance(lo, hi) {
            panels.push((lo, hi));
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi));
            stack.push((lo, mid));
        }
        if panels.len() + stack.len() > MAX_PANELS {
            return Err(Error::ResourceLimit(format!(
                "resolving the singularities of log g needs more than {MAX_PANELS} panels"
            )));
        }
    }
    Ok(panels)
}

/// The discretized operator at one `(q, delta, t)`, scaled by `exp(-shift)`.
struct Operator<'a> {
    grid: &'a Collocation,
    /// `r_b^delta exp(q (Phi(c_b v_i) - t) - shift)`, at index `2 i + b`.
    coefficient: Vec<f64>,
    shift: f64,
}

impl<'a> Operator<'a> {
    fn build(q: f64, delta: f64, t: f64, grid: &'a Collocation) -> Self {
        let log_rates = [grid.a.ln(), (1.0 - grid.a).ln()];
        let exponent: Vec<f64> = grid
            .phi
            .iter()
            .enumerate()
            .map(|(row, &phi)| q * (phi - t) + delta * log_rates[row % 2])
            .collect();
        let shift = exponent.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let coefficient = exponent.iter().map(|e| (e - shift).exp()).collect();
        Operator { grid, coefficient, shift }
    }

    fn apply_right(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.coefficient[2 * i] * self.grid.interpolate(2 * i, x)
                + self.coefficient[2 * i + 1] * self.grid.interpolate(2 * i + 1, x);
        }
    }

    fn apply_left(&self, y: &[f64], out: &mut [f64]) {
        let p = self.grid.nodes;
        out.iter_mut().for_each(|o| *o = 0.0);
        for row in 0..2 * y.len() {
            let scale = self.coefficient[row] * y[row / 2];
            let start = self.grid.target[row];
            let w = &self.grid.weights[row * p..(row + 1) * p];
            for (o, wj) in out[start..start + p].iter_mut().zip(w) {
                *o += scale * wj;
            }
        }
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn normalize(x: &mut [f64]) -> f64 {
    let norm = dot(x, x).sqrt();
    x.iter_mut().for_each(|v| *v /= norm);
    norm
}

/// Restarted Arnoldi for the eigenvalue of largest real part.
///
/// Returns the eigenvalue, a unit eigenvector with positive sum, and the
/// number of operator applications.
fn leading_eigenpair<F>(n: usize, apply: F) -> Result<(f64, Vec<f64>, usize)>
where
    F: Fn(&[f64], &mut [f64]),
{
    let k = KRYLOV_DIM.min(n);
    let mut x = vec![1.0; n];
    normalize(&mut x);
    let mut applications = 0;
    for _ in 0..MAX_RESTARTS {
        let mut basis = vec![x.clone()];
        let mut h = DMatrix::<f64>::zeros(k + 1, k);
        let mut dim = k;
        for j in 0..k {
            let mut w = vec![0.0; n];
            apply(&basis[j], &mut w);
            applications += 1;
            // two passes of modified Gram-Schmidt
            for _ in 0..2 {
                for (i, b) in basis.iter().enumerate() {
                    let c = dot(b, &w);
                    h[(i, j)] += c;
                    w.iter_mut().zip(b).for_each(|(wi, bi)| *wi -= c * bi);
                }
            }
            let norm = dot(&w, &w).sqrt();
            h[(j + 1, j)] = norm;
            if !norm.is_finite() {
                return Err(Error::NonConvergence { what: "collocation eigen-solve (overflow)", iterations: applications });
            }
            if norm <= 1e-300 || norm <= 1e-15 * h.column(j).amax() {
                dim = j + 1;
                break;
            }
            w.iter_mut().for_each(|v| *v /= norm);
            basis.push(w);
        }

        let small = h.view((0, 0), (dim, dim)).into_owned();
        let theta = small
            .complex_eigenvalues()
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max);
        if !(theta > 0.0) {
            return Err(Error::NonConvergence { what: "collocation eigen-solve (no positive Ritz value)", iterations: applications });
        }
        let y = ritz_vector(&small, theta);

        let mut next = vec![0.0; n];
        for (yi, b) in y.iter().zip(&basis) {
            next.iter_mut().zip(b).for_each(|(xi, bi)| *xi += yi * bi);
        }
        if next.iter().sum::<f64>() < 0.0 {
            next.iter_mut().for_each(|v| *v = -*v);
        }
        normalize(&mut next);
        x = next;

        // the Arnoldi residual estimate can be optimistic for non-normal
        // operators, so the residual is checked directly
        let mut ax = vec![0.0; n];
        apply(&x, &mut ax);
        applications += 1;
        let rayleigh = dot(&x, &ax);
        let residual = ax.iter().zip(&x).map(|(a, b)| (a - rayleigh * b).powi(2)).sum::<f64>().sqrt();
        if residual <= EIGEN_TOL * rayleigh.abs() {
            return Ok((rayleigh, x, applications));
        }
    }
    Err(Error::NonConvergence { what: "collocation eigen-solve", iterations: applications })
}

/// Unit null vector of `h - theta I` by inverse iteration.
fn ritz_vector(h: &DMatrix<f64>, theta: f64) -> DVector<f64> {
    let dim = h.nrows();
    let mut y = DVector::from_element(dim, 1.0 / (dim as f64).sqrt());
    let mut perturbation = 1e-13;
    for _ in 0..3 {
        let shifted = h - DMatrix::identity(dim, dim) * (theta * (1.0 + perturbation));
        match shifted.lu().solve(&y) {
            Some(z) if z.iter().all(|v| v.is_finite()) && z.norm() > 0.0 => {
                y = &z / z.norm();
            }
            _ => perturbation *= 1e3,
        }
    }
    y
}

/// Relative size of the last two Chebyshev coefficients of `x` on each panel.
fn chebyshev_tail(grid: &Collocation, x: &[f64]) -> f64 {
    let p = grid.nodes;
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || p < 4 {
        return 0.0;
    }
    let coefficient = |values: &[f64], k: usize| {
        2.0 / p as f64
            * values
                .iter()
                .enumerate()
                .map(|(j, v)| v * (k as f64 * (2 * j + 1) as f64 * PI / (2 * p) as f64).cos())
                .sum::<f64>()
    };
    x.chunks(p)
        .map(|values| coefficient(values, p - 1).abs() + coefficient(values, p - 2).abs())
        .fold(0.0, f64::max)
        / scale
}

/// `Q(delta, q, t)` with its first derivatives on a fixed collocation grid.
///
/// `m` in the result is the number of nodes per panel, `power_iterations`
/// counts operator applications, and `est_error` is the relative Chebyshev
/// tail of the leading eigenfunction.
pub fn pressure_collocation(q: f64, delta: f64, t: f64, grid: &Collocation) -> Result<PressureResult> {
    if !(q.is_finite() && delta.is_finite() && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite pressure arguments ({q}, {delta}, {t})")));
    }
    let op = Operator::build(q, delta, t, grid);
    let n = grid.len();
    let (lambda, right, it_r) = leading_eigenpair(n, |x, out| op.apply_right(x, out))?;
    let (_, left, it_l) = leading_eigenpair(n, |y, out| op.apply_left(y, out))?;

    let log_rates = [grid.a.ln(), (1.0 - grid.a).ln()];
    let (mut phi_mass, mut u_mass) = (0.0, 0.0);
    for (i, l) in left.iter().enumerate() {
        for (b, log_rate) in log_rates.iter().enumerate() {
            let row = 2 * i + b;
            let flow = l * op.coefficient[row] * grid.interpolate(row, &right);
            phi_mass += flow * (grid.phi[row] - t);
            u_mass += flow * log_rate;
        }
    }
    let normalizer = lambda * dot(&left, &right);
    Ok(PressureResult {
        value: lambda.ln() + op.shift,
        dq_dq: phi_mass / normalizer,
        dq_ddelta: u_mass / normalizer,
        m: grid.nodes,
        power_iterations: it_r + it_l,
        est_error: chebyshev_tail(grid, &right),
    })
}

/// Add `step` nodes per panel until successive grids agree to `tol` in both
/// the value and `dQ/dq`; returns the finer result with `est_error` the
/// larger difference.
pub fn pressure_collocation_adaptive(
    q: f64,
    delta: f64,
    t: f64,
    tol: f64,
    grid: &Collocation,
    step: usize,
    max_nodes: usize,
) -> Result<PressureResult> {
    if !(tol > 0.0) || step == 0 {
        return Err(Error::InvalidParameter(format!(
            "collocation refinement needs tol > 0 and a positive step, got tol = {tol}, step = {step}"
        )));
    }
    let mut coarse = pressure_collocation(q, delta, t, grid)?;
    let mut nodes = grid.nodes;
    loop {
        if nodes + step > max_nodes.min(MAX_NODES) {
            return Err(Error::ResourceLimit(format!(
                "collocation refinement reached {max_nodes} nodes per panel without agreeing to {tol:e}"
            )));
        }
        nodes += step;
        let fine = pressure_collocation(q, delta, t, &grid.with_nodes(nodes)?)?;
        let diff = (fine.value - coarse.value).abs().max((fine.dq_dq - coarse.dq_dq).abs());
        if diff < tol {
            return Ok(PressureResult { est_error: diff, ..fine });
        }
        coarse = fine;
    }
}
