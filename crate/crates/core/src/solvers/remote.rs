use crate::config::SystemConfig;
use crate::error::Result;

use super::{dual_bisect, remote_coefficient, SlotWeights};

/// Server CPU shares and the capacity multiplier.
#[derive(Debug, Clone, PartialEq)]
pub struct RemoteSolution {
    pub f_remote: Vec<f64>,
    pub nu: f64,
}

/// `f_n(nu)`: zero when `phi + nu >= 0`, else the stationary point capped by
/// what the remote queue holds.
#[inline]
pub(crate) fn remote_response(phi: f64, nu: f64, cap: f64, cfg: &SystemConfig) -> f64 {
    let s = phi + nu;
    if s >= 0.0 || cap <= 0.0 {
        return 0.0;
    }
    if cfg.v <= 0.0 {
        return cap;
    }
    (-s / (3.0 * cfg.v * cfg.slot_tau * cfg.kappa_mec)).sqrt().min(cap)
}

/// Remote allocation: minimizes `sum phi_n f_n + V tau kappa_M f_n^3` with
/// `tau f_n / (G I) <= Q^O_n` and `sum f_n <= F_MEC`.
pub fn solve_remote_allocation(
    weights: &[SlotWeights],
    q_remote: &[f64],
    g: &[f64],
    h_ratio: &[f64],
    cfg: &SystemConfig,
) -> Result<RemoteSolution> {
    let n = weights.len();
    let tau = cfg.slot_tau;
    let phi: Vec<f64> = (0..n)
        .map(|i| remote_coefficient(&weights[i], g[i], h_ratio[i], cfg.intensity.at(i), tau))
        .collect();
    let caps: Vec<f64> = (0..n).map(|i| q_remote[i].max(0.0) * g[i] * cfg.intensity.at(i) / tau).collect();
    let root = dual_bisect(|nu| (0..n).map(|i| remote_response(phi[i], nu, caps[i], cfg)).sum::<f64>() - cfg.f_mec)?;
    let w = root.weight_lower;
    let f_remote = (0..n)
        .map(|i| {
            let hi = remote_response(phi[i], root.multiplier, caps[i], cfg);
            if w > 0.0 {
                w * remote_response(phi[i], root.lower, caps[i], cfg) + (1.0 - w) * hi
            } else {
                hi
            }
        })
        .collect();
    Ok(RemoteSolution {
        f_remote,
        nu: root.multiplier,
    })
}
