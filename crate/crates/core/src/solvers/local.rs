use std::f64::consts::LN_2;

use crate::config::SystemConfig;
use crate::error::Result;
use crate::model::{link_power, link_rate};

use super::{drain_coefficient, dual_bisect, uplink_coefficient, SlotWeights};

/// Local CPU frequencies, uplink rates (with their powers) and the
/// per-device buffer multipliers.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalUplinkSolution {
    pub f_local: Vec<f64>,
    pub r_uplink: Vec<f64>,
    pub p_uplink: Vec<f64>,
    pub rho: Vec<f64>,
}

/// Fixed data of one device's local/uplink problem.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LocalProblem {
    pub w2: f64,
    /// `a w1 / beta^k - w2 / beta + w3`
    pub c_up: f64,
    /// `1 / beta - a / beta^k`
    pub drain: f64,
    pub tau_u: f64,
    pub h: f64,
    pub q_local: f64,
    pub intensity: f64,
    pub kappa: f64,
    pub f_max: f64,
    pub r_max: f64,
}

impl LocalProblem {
    pub fn new(w: &SlotWeights, beta: f64, tau_u: f64, h: f64, q_local: f64, n: usize, f_max: f64, cfg: &SystemConfig) -> Self {
        LocalProblem {
            w2: w.w2,
            c_up: uplink_coefficient(w, beta, cfg.a, cfg.k),
            drain: drain_coefficient(beta, cfg.a, cfg.k),
            tau_u,
            h,
            q_local,
            intensity: cfg.intensity.at(n),
            kappa: cfg.kappa_local.at(n),
            f_max,
            r_max: link_rate(h, cfg.p_uplink_max.at(n), cfg),
        }
    }

    /// Lagrangian minimizer `(f, r)` at buffer multiplier `rho`.
    pub fn response(&self, rho: f64, cfg: &SystemConfig) -> (f64, f64) {
        let f = if self.w2 - rho <= 0.0 || self.f_max <= 0.0 {
            0.0
        } else if cfg.v <= 0.0 {
            self.f_max
        } else {
            ((self.w2 - rho) / (3.0 * cfg.v * self.intensity * self.kappa)).sqrt().min(self.f_max)
        };
        let omega = self.c_up + rho * self.drain;
        let r = if omega >= 0.0 {
            0.0
        } else if cfg.v <= 0.0 {
            self.r_max
        } else {
            let arg = -omega * cfg.bandwidth * self.h / (LN_2 * cfg.v * cfg.noise_power());
            if arg <= 1.0 {
                0.0
            } else {
                (cfg.bandwidth * arg.log2()).min(self.r_max)
            }
        };
        (f, r)
    }

    /// Buffer-causality violation `tau f / I + tau_u r drain - Q^L`.
    pub fn violation(&self, f: f64, r: f64, tau: f64) -> f64 {
        tau * f / self.intensity + self.tau_u * r * self.drain - self.q_local
    }

    pub fn solve(&self, cfg: &SystemConfig) -> Result<(f64, f64, f64)> {
        let tau = cfg.slot_tau;
        let root = dual_bisect(|rho| {
            let (f, r) = self.response(rho, cfg);
            self.violation(f, r, tau)
        })?;
        let (f_hi, r_hi) = self.response(root.multiplier, cfg);
        if root.weight_lower > 0.0 {
            let (f_lo, r_lo) = self.response(root.lower, cfg);
            let w = root.weight_lower;
            Ok((w * f_lo + (1.0 - w) * f_hi, w * r_lo + (1.0 - w) * r_hi, root.multiplier))
        } else {
            Ok((f_hi, r_hi, root.multiplier))
        }
    }
}

fn solve_all(
    weights: &[SlotWeights],
    beta: &[f64],
    tau_u: &[f64],
    gains: &[f64],
    q_local: &[f64],
    cfg: &SystemConfig,
    local_cpu: bool,
) -> Result<LocalUplinkSolution> {
    let n = weights.len();
    let mut out = LocalUplinkSolution {
        f_local: Vec::with_capacity(n),
        r_uplink: Vec::with_capacity(n),
        p_uplink: Vec::with_capacity(n),
        rho: Vec::with_capacity(n),
    };
    for i in 0..n {
        let f_max = if local_cpu { cfg.f_local_max.at(i) } else { 0.0 };
        let prob = LocalProblem::new(&weights[i], beta[i], tau_u[i].max(0.0), gains[i], q_local[i], i, f_max, cfg);
        let (f, r, rho) = prob.solve(cfg)?;
        out.f_local.push(f);
        out.r_uplink.push(r);
        out.p_uplink.push(link_power(gains[i], r, cfg).min(cfg.p_uplink_max.at(i)));
        out.rho.push(rho);
    }
    Ok(out)
}

/// Local CPU and uplink-rate block, one bisection on `rho_n` per device.
///
/// When `tau_u = 0` the rate leaves both objective and constraint; it is
/// then set to the per-unit-time optimum at the multiplier found for the
/// CPU alone, so the time split can see what uplink would be worth.
pub fn solve_local_and_uplink(
    weights: &[SlotWeights],
    beta: &[f64],
    tau_u: &[f64],
    gains: &[f64],
    q_local: &[f64],
    cfg: &SystemConfig,
) -> Result<LocalUplinkSolution> {
    solve_all(weights, beta, tau_u, gains, q_local, cfg, true)
}

/// Same block with the local CPU switched off (`f_local = 0`).
pub fn solve_uplink_only(
    weights: &[SlotWeights],
    beta: &[f64],
    tau_u: &[f64],
    gains: &[f64],
    q_local: &[f64],
    cfg: &SystemConfig,
) -> Result<LocalUplinkSolution> {
    solve_all(weights, beta, tau_u, gains, q_local, cfg, false)
}
