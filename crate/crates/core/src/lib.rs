//! Dimension theory of concave skew products driven by a baker map.
//!
//! The base is the baker map `B_a` on the unit square, the fibre maps are
//! `f_t(theta, x) = e^{-t} g(theta) x / (1 + x)` with `g(u, v) = c + cos(2 pi v)`.
//! The crate computes the pullback approximation of the maximal invariant
//! graph, backward Lyapunov averages, the pressure `Q(delta, q, t)` on the
//! full 2-shift, and the curve `D(t)` that gives the Hausdorff dimensions of
//! the zero set and of the global attractor.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod collocation;
pub mod config;
pub mod error;
pub mod fibre;
pub mod forcing;
pub mod output;
pub mod pressure;
pub mod quadrature;
pub mod solver;
pub mod symbolic;
pub mod verify;
pub mod zeroset;

pub use error::{Error, ErrorClass, Result};
pub use fibre::{
    backward_birkhoff, backward_orbit, baker_map, birkhoff_on_orbit, fibre_step, pullback_graph, pullback_on_orbit,
    pullback_value, sample_with_backward_orbit, stable_log_contraction, BakerPoint, Classification, Direction,
    FibreParams, PullbackResult, PullbackSettings,
};
pub use config::RunConfig;
pub use collocation::{pressure_collocation, pressure_collocation_adaptive, Collocation};
pub use forcing::Forcing;
pub use pressure::{
    bowen_closed_form, pressure_adaptive, pressure_adaptive_joint, pressure_periodic, pressure_transfer,
    window_potential, PotentialWindow, PressureResult,
};
pub use solver::{
    dimension_report, gamma_c, gamma_extremes, gamma_extremes_with_budget, solve_dq, trace_curve, usable_window, Backend, CurvePoint, DimensionReport,
    GammaSummary, Model, Regime, SolverSettings,
};
pub use symbolic::{encode_point, periodic_orbit_logg_average, reconstruct_v, SymbolWord};
pub use verify::{run_suite, CheckOutcome, VerifyOptions};
pub use zeroset::{zeroset_scan, ZeroSetRecord, ZeroSetSummary};
