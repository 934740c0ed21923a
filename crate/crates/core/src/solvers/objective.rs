use crate::config::SystemConfig;
use crate::model::{downlink_rate, extraction_cost_unchecked, local_power, SlotDecision};

use super::SlotWeights;

/// Local-side drift-plus-penalty value of a decision:
///
/// ```text
/// sum_n  w1 C + w3 tau_u r - w2 (tau f / I + tau_u r / beta) - w4 tau_d R^D
///        + V (tau kappa f^3 + tau_u p_u + tau_d p_d)
/// ```
pub fn eval_local_objective(weights: &[SlotWeights], decision: &SlotDecision, gains: &[f64], cfg: &SystemConfig) -> f64 {
    let tau = cfg.slot_tau;
    decision
        .tds
        .iter()
        .zip(weights)
        .zip(gains)
        .enumerate()
        .map(|(n, ((d, w), &h))| {
            let sem = d.tau_u * d.r_uplink;
            let extraction = extraction_cost_unchecked(sem, d.beta, cfg.a, cfg.k);
            let local_bits = tau * d.f_local / cfg.intensity.at(n);
            let down_bits = d.tau_d * downlink_rate(h, d.p_downlink, cfg);
            let energy = tau * local_power(d.f_local, cfg.kappa_local.at(n)) + d.tau_u * d.p_uplink + d.tau_d * d.p_downlink;
            w.w1 * extraction + w.w3 * sem - w.w2 * (local_bits + sem / d.beta) - w.w4 * down_bits + cfg.v * energy
        })
        .sum()
}

/// Sum of the absolute values of the terms of [`eval_local_objective`]; the
/// scale against which changes of the objective are judged.
pub fn local_objective_magnitude(weights: &[SlotWeights], decision: &SlotDecision, gains: &[f64], cfg: &SystemConfig) -> f64 {
    let tau = cfg.slot_tau;
    decision
        .tds
        .iter()
        .zip(weights)
        .zip(gains)
        .enumerate()
        .map(|(n, ((d, w), &h))| {
            let sem = d.tau_u * d.r_uplink;
            let extraction = extraction_cost_unchecked(sem, d.beta, cfg.a, cfg.k);
            let local_bits = tau * d.f_local / cfg.intensity.at(n);
            let down_bits = d.tau_d * downlink_rate(h, d.p_downlink, cfg);
            let energy = tau * local_power(d.f_local, cfg.kappa_local.at(n)) + d.tau_u * d.p_uplink + d.tau_d * d.p_downlink;
            w.w1 * extraction + w.w3 * sem + w.w2 * (local_bits + sem / d.beta) + w.w4 * down_bits + cfg.v * energy
        })
        .sum()
}

/// `phi_n = (w4 H tau - w3 tau) / (G I)`, the linear coefficient of `f^O_n`.
#[inline]
pub fn remote_coefficient(w: &SlotWeights, g: f64, h_ratio: f64, intensity: f64, tau: f64) -> f64 {
    (w.w4 * h_ratio * tau - w.w3 * tau) / (g * intensity)
}

/// Remote-allocation value `sum_n phi_n f_n + V tau kappa_M f_n^3`.
pub fn eval_remote_objective(
    weights: &[SlotWeights],
    f_remote: &[f64],
    g: &[f64],
    h_ratio: &[f64],
    cfg: &SystemConfig,
) -> f64 {
    let tau = cfg.slot_tau;
    (0..f_remote.len())
        .map(|n| {
            let phi = remote_coefficient(&weights[n], g[n], h_ratio[n], cfg.intensity.at(n), tau);
            phi * f_remote[n] + cfg.v * tau * local_power(f_remote[n], cfg.kappa_mec)
        })
        .sum()
}
