//! Per-slot subproblem solvers.
//!
//! The per-slot drift-plus-penalty problem splits into a local-side problem
//! (local CPU, uplink rate, downlink power, extraction factor, time split)
//! solved by block coordinate descent, and a remote CPU allocation problem.
//! Each block has a closed-form primal response to its Lagrange multipliers;
//! the multipliers are found by bisection.

mod bisect;
mod downlink;
mod extraction;
mod idle_time;
mod local;
mod objective;
mod remote;
mod time_division;

pub use bisect::{bisect, dual_bisect, BisectionSpec, DualRoot, DUAL_REL_TOL, MULTIPLIER_CAP};
pub use downlink::{solve_downlink_power, DownlinkSolution};
pub use idle_time::{fill_idle_time, IdleFill};
pub use extraction::{solve_extraction_factor, ExtractionSolution, SCA_MAX_ITERS, SCA_TOL};
pub use local::{solve_local_and_uplink, solve_uplink_only, LocalUplinkSolution};
pub use objective::{eval_local_objective, eval_remote_objective, local_objective_magnitude, remote_coefficient};
pub use remote::{solve_remote_allocation, RemoteSolution};
pub use time_division::{solve_time_division, TimeDivisionSolution, TimeLp, TimeSplit};

use serde::{Deserialize, Serialize};

/// Queue-derived weights of one device for the current slot (bits).
///
/// `w1 = 2 Q^L + X^q`, `w2 = X^r + 2 Q^L + 2 C^max + X^q`,
/// `w3 = 4 Q^O + X^q`, `w4 = 4 Q^D + X^q`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SlotWeights {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub w4: f64,
    pub c_max: f64,
}

/// Per-unit-time coefficient of the uplink rate in the local objective,
/// `a w1 / beta^k - w2 / beta + w3`.
#[inline]
pub(crate) fn uplink_coefficient(w: &SlotWeights, beta: f64, a: f64, k: f64) -> f64 {
    a * w.w1 / beta.powf(k) - w.w2 / beta + w.w3
}

/// Net raw bits removed from the local buffer per uplinked semantic bit,
/// `1 / beta - a / beta^k`.
#[inline]
pub(crate) fn drain_coefficient(beta: f64, a: f64, k: f64) -> f64 {
    1.0 / beta - a / beta.powf(k)
}
