use std::f64::consts::LN_2;

use crate::config::SystemConfig;
use crate::error::Result;

use super::{dual_bisect, SlotWeights};

/// Downlink powers for one slot plus the power-budget multiplier.
#[derive(Debug, Clone, PartialEq)]
pub struct DownlinkSolution {
    pub p_downlink: Vec<f64>,
    pub mu: f64,
}

/// Largest power that does not overdraw the downlink queue in `tau_d`.
#[inline]
pub(crate) fn queue_power_cap(q_down: f64, h: f64, tau_d: f64, cfg: &SystemConfig) -> f64 {
    if q_down <= 0.0 {
        return 0.0;
    }
    cfg.noise_power() / h * (q_down * LN_2 / (cfg.bandwidth * tau_d)).exp_m1()
}

/// `min{max{0, Omega_1}, cap}` at multiplier `mu`.
#[inline]
pub(crate) fn downlink_response(w4: f64, tau_d: f64, h: f64, cap: f64, mu: f64, cfg: &SystemConfig) -> f64 {
    if w4 <= 0.0 || cap <= 0.0 {
        return 0.0;
    }
    let denom = LN_2 * (cfg.v * tau_d + mu);
    if denom <= 0.0 {
        return cap;
    }
    let omega1 = w4 * tau_d * cfg.bandwidth / denom - cfg.noise_power() / h;
    omega1.max(0.0).min(cap)
}

/// Downlink power block: maximizes `sum w4 tau_d R^D - V tau_d p` under the
/// per-device queue caps and the shared budget `P_MEC`.
///
/// Devices with `tau_d = 0` do not affect the objective. They are left out of
/// the budget search and then handed a proposal computed as if they owned the
/// whole slot, scaled into whatever budget the active devices left unused.
/// This keeps the block optimal while giving the time split something to
/// price on the next round.
pub fn solve_downlink_power(
    weights: &[SlotWeights],
    tau_d: &[f64],
    gains: &[f64],
    q_down: &[f64],
    cfg: &SystemConfig,
) -> Result<DownlinkSolution> {
    let n = weights.len();
    let active: Vec<usize> = (0..n).filter(|&i| tau_d[i] > 0.0).collect();
    let caps: Vec<f64> = (0..n)
        .map(|i| {
            let td = if tau_d[i] > 0.0 { tau_d[i] } else { cfg.slot_tau };
            queue_power_cap(q_down[i], gains[i], td, cfg)
        })
        .collect();
    let response = |i: usize, mu: f64| downlink_response(weights[i].w4, tau_d[i], gains[i], caps[i], mu, cfg);

    let root = dual_bisect(|mu| active.iter().map(|&i| response(i, mu)).sum::<f64>() - cfg.p_mec)?;
    let mut p = vec![0.0; n];
    for &i in &active {
        let hi = response(i, root.multiplier);
        p[i] = if root.weight_lower > 0.0 {
            root.weight_lower * response(i, root.lower) + (1.0 - root.weight_lower) * hi
        } else {
            hi
        };
    }

    let used: f64 = p.iter().sum();
    let slack = (cfg.p_mec - used).max(0.0);
    let idle: Vec<(usize, f64)> = (0..n)
        .filter(|&i| tau_d[i] <= 0.0)
        .map(|i| (i, downlink_response(weights[i].w4, cfg.slot_tau, gains[i], caps[i], root.multiplier, cfg)))
        .collect();
    let wanted: f64 = idle.iter().map(|(_, v)| v).sum();
    let scale = if wanted > slack { slack / wanted } else { 1.0 };
    for (i, v) in idle {
        p[i] = v * scale;
    }

    Ok(DownlinkSolution {
        p_downlink: p,
        mu: root.multiplier,
    })
}
