use crate::config::SystemConfig;

use super::{dual_bisect, SlotWeights};

/// Stopping threshold on the change of `beta` between SCA iterates.
pub const SCA_TOL: f64 = 1e-6;
pub const SCA_MAX_ITERS: usize = 50;

/// Extraction factors plus per-device diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionSolution {
    pub beta: Vec<f64>,
    pub iterations: Vec<usize>,
    /// Set when the starting factor violated the buffer constraint; that
    /// device's factor is returned unchanged.
    pub infeasible: Vec<bool>,
}

/// One device's extraction problem in `b = 1 / beta`:
///
/// ```text
/// min  M (a w1 b^k - w2 b)
/// s.t. tau f / I + M b <= Q^L + a M b^k,   1 <= b <= 1 / beta_min
/// ```
/// with `M = tau_u r`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ExtractionProblem {
    pub w1: f64,
    pub w2: f64,
    pub sem_bits: f64,
    /// `Q^L - tau f / I`
    pub room: f64,
    pub a: f64,
    pub k: f64,
    pub b_max: f64,
}

impl ExtractionProblem {
    pub fn objective(&self, b: f64) -> f64 {
        self.sem_bits * (self.a * self.w1 * b.powf(self.k) - self.w2 * b)
    }

    pub fn violation(&self, b: f64) -> f64 {
        self.sem_bits * b - self.a * self.sem_bits * b.powf(self.k) - self.room
    }

    fn tolerance(&self, b: f64) -> f64 {
        1e-9 * (self.room.abs() + self.sem_bits * b).max(1.0)
    }

    /// Minimizer of the problem with `b^k` linearized at `b_ref`; `None` if
    /// the linearized feasible set is empty.
    fn convexified_step(&self, b_ref: f64) -> Option<f64> {
        let (m, a, k) = (self.sem_bits, self.a, self.k);
        let c1 = m * (1.0 - a * k * b_ref.powf(k - 1.0));
        let c0 = self.room + a * m * (1.0 - k) * b_ref.powf(k);
        let (mut lo, mut hi): (f64, f64) = (1.0, self.b_max);
        if c1 > 0.0 {
            hi = hi.min(c0 / c1);
        } else if c1 < 0.0 {
            lo = lo.max(c0 / c1);
        } else if c0 < 0.0 {
            return None;
        }
        if lo > hi {
            return None;
        }
        if a * self.w1 <= 1e-30 {
            return Some(hi);
        }
        // threshold rule at dual value xi
        let at = |xi: f64| {
            let num = self.w2 - xi * c1 / m;
            if num <= 0.0 {
                return 1.0;
            }
            let omega4 = (num / (k * a * self.w1)).powf(1.0 / (k - 1.0));
            if omega4 < 1.0 {
                1.0
            } else {
                omega4.min(self.b_max)
            }
        };
        let root = dual_bisect(|xi| c1 * at(xi) - c0).ok()?;
        if root.multiplier > 0.0 {
            // binding linearized constraint: land on it exactly
            return Some(if c1 > 0.0 { hi } else { lo });
        }
        Some(at(0.0).clamp(lo, hi))
    }

    /// Runs SCA from `beta_init`; returns `(beta, iterations, infeasible)`.
    pub fn solve(&self, beta_init: f64) -> (f64, usize, bool) {
        let mut b = 1.0 / beta_init;
        if self.violation(b) > self.tolerance(b) {
            return (beta_init, 0, true);
        }
        let mut beta = beta_init;
        for iter in 1..=SCA_MAX_ITERS {
            let Some(next) = self.convexified_step(b) else {
                return (beta, iter, false);
            };
            let next_beta = (1.0 / next).clamp(1.0 / self.b_max, 1.0);
            let delta = (next_beta - beta).abs();
            if self.objective(next) <= self.objective(b) {
                b = next;
                beta = next_beta;
            }
            if delta <= SCA_TOL {
                return (beta, iter, false);
            }
        }
        (beta, SCA_MAX_ITERS, false)
    }
}

/// Extraction-factor block: per device, SCA on the inverse factor with the
/// threshold rule solving each convexified step.
///
/// Devices that upload nothing keep `beta_init`; `beta_min = 1` forces 1.
pub fn solve_extraction_factor(
    weights: &[SlotWeights],
    f_local: &[f64],
    r_uplink: &[f64],
    tau_u: &[f64],
    q_local: &[f64],
    cfg: &SystemConfig,
    beta_init: &[f64],
) -> ExtractionSolution {
    let n = weights.len();
    let mut out = ExtractionSolution {
        beta: Vec::with_capacity(n),
        iterations: Vec::with_capacity(n),
        infeasible: Vec::with_capacity(n),
    };
    for i in 0..n {
        let sem_bits = tau_u[i] * r_uplink[i];
        if cfg.beta_min >= 1.0 {
            out.beta.push(1.0);
            out.iterations.push(0);
            out.infeasible.push(false);
            continue;
        }
        if sem_bits <= 0.0 {
            out.beta.push(beta_init[i]);
            out.iterations.push(0);
            out.infeasible.push(false);
            continue;
        }
        let prob = ExtractionProblem {
            w1: weights[i].w1,
            w2: weights[i].w2,
            sem_bits,
            room: q_local[i] - cfg.slot_tau * f_local[i] / cfg.intensity.at(i),
            a: cfg.a,
            k: cfg.k,
            b_max: 1.0 / cfg.beta_min,
        };
        let (beta, iters, bad) = prob.solve(beta_init[i].clamp(cfg.beta_min, 1.0));
        out.beta.push(beta);
        out.iterations.push(iters);
        out.infeasible.push(bad);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(w1: f64, w2: f64) -> SlotWeights {
        SlotWeights { w1, w2, ..Default::default() }
    }

    #[test]
    fn nothing_uploaded_keeps_the_start() {
        let cfg = SystemConfig::default();
        let s = solve_extraction_factor(&[w(1e7, 2e7)], &[0.0], &[0.0], &[0.5], &[1e6], &cfg, &[0.42]);
        assert_eq!(s.beta, vec![0.42]);
    }

    #[test]
    fn unit_beta_min_forces_one() {
        let mut cfg = SystemConfig::default();
        cfg.beta_min = 1.0;
        let s = solve_extraction_factor(&[w(1e7, 2e7)], &[0.0], &[1e6], &[0.5], &[1e8], &cfg, &[1.0]);
        assert_eq!(s.beta, vec![1.0]);
    }

    #[test]
    fn large_w1_keeps_raw_data() {
        let cfg = SystemConfig::default();
        // k a w1 >= w2 makes the threshold fire at b = 1
        let s = solve_extraction_factor(&[w(1e10, 1e6)], &[0.0], &[1e6], &[0.5], &[1e8], &cfg, &[0.5]);
        assert_eq!(s.beta, vec![1.0]);
    }

    #[test]
    fn unconstrained_interior_matches_stationary_point() {
        let cfg = SystemConfig::default();
        let (w1, w2) = (1e9, 1e7);
        let s = solve_extraction_factor(&[w(w1, w2)], &[0.0], &[1e6], &[0.5], &[1e9], &cfg, &[1.0]);
        // b^{k-1} = w2 / (k a w1) = 2.5
        let expect = 1.0 / 2.5f64.powf(1.0 / 3.0);
        assert!((s.beta[0] - expect).abs() <= 1e-9, "{} vs {expect}", s.beta[0]);
    }

    #[test]
    fn zero_w1_pushes_to_the_buffer_limit() {
        let cfg = SystemConfig::default();
        let q = 1e6;
        let s = solve_extraction_factor(&[w(0.0, 1e7)], &[0.0], &[1e6], &[0.5], &[q], &cfg, &[1.0]);
        let b = 1.0 / s.beta[0];
        let used = 5e5 * b - 1e-3 * 5e5 * b.powi(4);
        assert!(b < 1.0 / cfg.beta_min);
        assert!((used - q).abs() <= 1e-4 * q, "used {used}");
    }

    #[test]
    fn infeasible_start_is_flagged() {
        let cfg = SystemConfig::default();
        let s = solve_extraction_factor(&[w(1e6, 1e7)], &[0.0], &[1e7], &[0.5], &[1e3], &cfg, &[0.3]);
        assert_eq!(s.beta, vec![0.3]);
        assert!(s.infeasible[0]);
    }
}
