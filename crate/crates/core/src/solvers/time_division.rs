use crate::config::SystemConfig;
use crate::model::downlink_rate;

use super::{drain_coefficient, uplink_coefficient, SlotWeights};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TimeSplit {
    pub tau_u: f64,
    pub tau_d: f64,
}

/// Per-device time splits with the LP coefficients that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeDivisionSolution {
    pub splits: Vec<TimeSplit>,
    pub xi_u: Vec<f64>,
    pub xi_d: Vec<f64>,
    /// Whether a feasibility clamp changed the case-table answer.
    pub clamped: Vec<bool>,
}

/// One device's time-split LP:
///
/// ```text
/// min  xi_u tau_u + xi_d tau_d
/// s.t. tau_u r drain <= room,  tau_d R^D <= Q^D,  tau_u + tau_d <= tau,  tau_u, tau_d >= 0
/// ```
/// where `room = Q^L - tau f / I` and `drain = 1 / beta - a / beta^k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeLp {
    pub xi_u: f64,
    pub xi_d: f64,
    pub r_uplink: f64,
    pub drain: f64,
    pub room: f64,
    pub r_downlink: f64,
    pub q_down: f64,
    pub tau: f64,
}

impl TimeLp {
    pub fn objective(&self, s: TimeSplit) -> f64 {
        self.xi_u * s.tau_u + self.xi_d * s.tau_d
    }

    /// `theta`, the bound the buffer places on `tau_u` (upper when the drain
    /// coefficient is non-negative, lower otherwise). Infinite when the
    /// uplink does not touch the buffer.
    pub fn theta(&self) -> f64 {
        let denom = self.r_uplink * self.drain;
        if denom == 0.0 {
            if self.drain >= 0.0 {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            }
        } else {
            self.room / denom
        }
    }

    fn downlink_limit(&self) -> f64 {
        if self.r_downlink > 0.0 {
            self.q_down / self.r_downlink
        } else {
            f64::INFINITY
        }
    }

    /// Case tables for the sign of the drain coefficient, followed by the
    /// clamps that restore the constraints the tables leave out.
    pub fn solve(&self) -> (TimeSplit, bool) {
        let tau = self.tau;
        let (xu, xd) = (self.xi_u, self.xi_d);
        let theta = self.theta();
        let d_lim = self.downlink_limit();
        let d_cap = tau.min(d_lim);
        let raw = if self.drain >= 0.0 {
            let t = tau.min(theta);
            if xu >= 0.0 && xd >= 0.0 {
                (0.0, 0.0)
            } else if xu >= 0.0 {
                (0.0, d_cap)
            } else if xd >= 0.0 {
                (t, 0.0)
            } else if xu <= xd {
                (t, tau - t)
            } else {
                (tau - d_cap, d_cap)
            }
        } else {
            let t = tau.min(theta.max(0.0));
            if xu >= 0.0 && xd >= 0.0 {
                (t, 0.0)
            } else if xu >= 0.0 {
                (t, tau.min(d_lim).min(tau - t))
            } else if xd <= xu {
                // downlink first, leftover time still pays off on the uplink
                let d = d_lim.min(tau - t);
                (tau - d, d)
            } else {
                (tau, 0.0)
            }
        };

        let mut tau_u = raw.0;
        let mut tau_d = raw.1;
        if self.drain >= 0.0 {
            tau_u = tau_u.min(theta.clamp(0.0, tau));
        } else {
            tau_u = tau_u.max(theta.clamp(0.0, tau));
        }
        tau_u = tau_u.clamp(0.0, tau);
        tau_d = tau_d.min(d_lim).min(tau - tau_u).max(0.0);
        let clamped = tau_u != raw.0 || tau_d != raw.1;
        (TimeSplit { tau_u, tau_d }, clamped)
    }
}

/// Builds the LP of device `n` from the other blocks' current values.
#[allow(clippy::too_many_arguments)]
pub(crate) fn time_lp(
    w: &SlotWeights,
    f_local: f64,
    r_uplink: f64,
    p_uplink: f64,
    p_downlink: f64,
    beta: f64,
    h: f64,
    q_local: f64,
    q_down: f64,
    n: usize,
    cfg: &SystemConfig,
) -> TimeLp {
    let r_down = downlink_rate(h, p_downlink, cfg);
    TimeLp {
        xi_u: uplink_coefficient(w, beta, cfg.a, cfg.k) * r_uplink + cfg.v * p_uplink,
        xi_d: cfg.v * p_downlink - w.w4 * r_down,
        r_uplink,
        drain: drain_coefficient(beta, cfg.a, cfg.k),
        room: q_local - cfg.slot_tau * f_local / cfg.intensity.at(n),
        r_downlink: r_down,
        q_down,
        tau: cfg.slot_tau,
    }
}

/// Time-division block: one small LP per device, solved from its case table.
#[allow(clippy::too_many_arguments)]
pub fn solve_time_division(
    weights: &[SlotWeights],
    f_local: &[f64],
    r_uplink: &[f64],
    p_uplink: &[f64],
    p_downlink: &[f64],
    beta: &[f64],
    gains: &[f64],
    q_local: &[f64],
    q_down: &[f64],
    cfg: &SystemConfig,
) -> TimeDivisionSolution {
    let n = weights.len();
    let mut out = TimeDivisionSolution {
        splits: Vec::with_capacity(n),
        xi_u: Vec::with_capacity(n),
        xi_d: Vec::with_capacity(n),
        clamped: Vec::with_capacity(n),
    };
    for i in 0..n {
        let lp = time_lp(
            &weights[i],
            f_local[i],
            r_uplink[i],
            p_uplink[i],
            p_downlink[i],
            beta[i],
            gains[i],
            q_local[i],
            q_down[i],
            i,
            cfg,
        );
        let (split, clamped) = lp.solve();
        out.splits.push(split);
        out.xi_u.push(lp.xi_u);
        out.xi_d.push(lp.xi_d);
        out.clamped.push(clamped);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(xi_u: f64, xi_d: f64) -> TimeLp {
        TimeLp {
            xi_u,
            xi_d,
            r_uplink: 1e6,
            drain: 1.0,
            room: 4e5,
            r_downlink: 1e6,
            q_down: 3e5,
            tau: 1.0,
        }
    }

    #[test]
    fn nonnegative_coefficients_idle() {
        assert_eq!(lp(1.0, 2.0).solve().0, TimeSplit { tau_u: 0.0, tau_d: 0.0 });
    }

    #[test]
    fn downlink_only_is_capped_by_its_queue() {
        assert_eq!(lp(1.0, -2.0).solve().0, TimeSplit { tau_u: 0.0, tau_d: 0.3 });
    }

    #[test]
    fn uplink_only_is_capped_by_the_buffer() {
        assert_eq!(lp(-1.0, 2.0).solve().0, TimeSplit { tau_u: 0.4, tau_d: 0.0 });
    }

    #[test]
    fn both_negative_prefers_the_cheaper_direction() {
        let (s, clamped) = lp(-2.0, -1.0).solve();
        assert_eq!(s, TimeSplit { tau_u: 0.4, tau_d: 0.3 });
        assert!(clamped);
        let (s, _) = lp(-1.0, -2.0).solve();
        assert_eq!(s, TimeSplit { tau_u: 0.4, tau_d: 0.3 });
    }

    #[test]
    fn negative_drain_turns_theta_into_a_floor() {
        let mut p = lp(1.0, 1.0);
        p.drain = -0.5;
        p.room = -2e5;
        assert_eq!(p.solve().0, TimeSplit { tau_u: 0.4, tau_d: 0.0 });
        p.xi_u = -1.0;
        assert_eq!(p.solve().0, TimeSplit { tau_u: 1.0, tau_d: 0.0 });
        p.xi_d = -3.0;
        assert_eq!(p.solve().0, TimeSplit { tau_u: 0.7, tau_d: 0.3 });
    }

    #[test]
    fn silent_uplink_leaves_theta_inactive() {
        let mut p = lp(-1.0, 1.0);
        p.r_uplink = 0.0;
        assert_eq!(p.solve().0, TimeSplit { tau_u: 1.0, tau_d: 0.0 });
    }
}
