use std::f64::consts::LN_2;

use crate::config::SystemConfig;
use crate::model::{link_power, link_rate};

use super::{bisect, BisectionSpec};

/// Links of every device after [`fill_idle_time`].
#[derive(Debug, Clone, PartialEq)]
pub struct IdleFill {
    pub tau_u: Vec<f64>,
    pub tau_d: Vec<f64>,
    pub r_uplink: Vec<f64>,
    pub p_uplink: Vec<f64>,
    pub p_downlink: Vec<f64>,
}

/// `d/dt [t P(bits / t)]` at rate `r`, with `P` the power that carries `r`
/// over gain `h`. Never positive.
fn stretch_slope(r: f64, h: f64, cfg: &SystemConfig) -> f64 {
    let x = r * LN_2 / cfg.bandwidth;
    cfg.noise_power() / h * (x.exp_m1() - x * x.exp())
}

/// Hands each device's unused slot time to its links while holding the bits
/// they carry fixed: a link that moves `s` bits over `t` seconds spends
/// `t P(s / t)`, which falls as `t` grows. The spare time is split so that
/// both links' marginal savings match.
///
/// Bits moved, buffer and queue use are unchanged; rates and powers only go
/// down, so every constraint stays satisfied.
pub fn fill_idle_time(
    tau_u: &[f64],
    tau_d: &[f64],
    r_uplink: &[f64],
    p_downlink: &[f64],
    gains: &[f64],
    cfg: &SystemConfig,
) -> IdleFill {
    let n = tau_u.len();
    let mut out = IdleFill {
        tau_u: tau_u.to_vec(),
        tau_d: tau_d.to_vec(),
        r_uplink: r_uplink.to_vec(),
        p_uplink: Vec::with_capacity(n),
        p_downlink: p_downlink.to_vec(),
    };
    for i in 0..n {
        let h = gains[i];
        let spare = cfg.slot_tau - tau_u[i] - tau_d[i];
        let up_bits = tau_u[i] * r_uplink[i];
        let down_bits = tau_d[i] * link_rate(h, p_downlink[i], cfg);
        if spare > 1e-12 * cfg.slot_tau && (up_bits > 0.0 || down_bits > 0.0) {
            let to_up = if down_bits <= 0.0 {
                spare
            } else if up_bits <= 0.0 {
                0.0
            } else {
                let gap = |x: f64| {
                    stretch_slope(up_bits / (tau_u[i] + x), h, cfg) - stretch_slope(down_bits / (tau_d[i] + spare - x), h, cfg)
                };
                if gap(0.0) >= 0.0 {
                    0.0
                } else if gap(spare) <= 0.0 {
                    spare
                } else {
                    bisect(gap, BisectionSpec::new(0.0, spare, 1e-12 * cfg.slot_tau)).unwrap_or(0.0)
                }
            };
            if up_bits > 0.0 {
                out.tau_u[i] = tau_u[i] + to_up;
                out.r_uplink[i] = up_bits / out.tau_u[i];
            }
            if down_bits > 0.0 {
                out.tau_d[i] = tau_d[i] + spare - to_up;
                out.p_downlink[i] = link_power(h, down_bits / out.tau_d[i], cfg);
            }
        }
        out.p_uplink.push(link_power(h, out.r_uplink[i], cfg));
    }
    out
}
