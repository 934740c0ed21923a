//! Brute-force checkers: dense grids, LP vertex enumeration and KKT
//! residuals. They only use the formulas in [`crate::model`] and never call
//! the production solvers.

use std::f64::consts::LN_2;

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::model::link_rate;

/// Axis-aligned grid: `(lower, upper, points)` per dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub dims: Vec<(f64, f64, usize)>,
}

impl GridSpec {
    pub fn new(dims: Vec<(f64, f64, usize)>) -> Self {
        GridSpec { dims }
    }

    pub fn uniform(lower: f64, upper: f64, points: usize) -> Self {
        GridSpec {
            dims: vec![(lower, upper, points)],
        }
    }

    fn coord(&self, d: usize, i: usize) -> f64 {
        let (lo, hi, pts) = self.dims[d];
        if i + 1 == pts {
            hi
        } else {
            lo + (hi - lo) * i as f64 / (pts - 1) as f64
        }
    }
}

/// Exhaustive minimization of `objective` over the feasible grid points.
/// Ties go to the lexicographically smallest index.
pub fn grid_min(
    spec: &GridSpec,
    mut objective: impl FnMut(&[f64]) -> f64,
    mut feasible: impl FnMut(&[f64]) -> bool,
) -> Result<(Vec<f64>, f64)> {
    for (d, &(lo, hi, pts)) in spec.dims.iter().enumerate() {
        assert!(pts >= 2 && lo.is_finite() && hi.is_finite() && lo <= hi, "bad grid dimension {d}: {:?}", spec.dims[d]);
    }
    let dims = spec.dims.len();
    let mut idx = vec![0usize; dims];
    let mut x: Vec<f64> = (0..dims).map(|d| spec.coord(d, 0)).collect();
    let mut best: Option<(Vec<f64>, f64)> = None;
    loop {
        if feasible(&x) {
            let v = objective(&x);
            if best.as_ref().map_or(true, |(_, b)| v < *b) {
                best = Some((x.clone(), v));
            }
        }
        // odometer increment, last dimension fastest
        let mut d = dims;
        loop {
            if d == 0 {
                return best.ok_or_else(|| Error::Infeasible("no feasible grid point".into()));
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < spec.dims[d].2 {
                x[d] = spec.coord(d, idx[d]);
                break;
            }
            idx[d] = 0;
            x[d] = spec.coord(d, 0);
        }
    }
}

/// [`grid_min`] refined `levels` times, each pass zooming to `window` cells
/// on either side of the previous best point (clipped to the original box).
/// Exact up to the final cell width for one-dimensional unimodal
/// objectives; in more dimensions a slanted constraint can stall it.
pub fn refine_grid_min(
    spec: &GridSpec,
    levels: usize,
    window: usize,
    mut objective: impl FnMut(&[f64]) -> f64,
    mut feasible: impl FnMut(&[f64]) -> bool,
) -> Result<(Vec<f64>, f64)> {
    let mut cur = spec.clone();
    let mut best = grid_min(&cur, &mut objective, &mut feasible)?;
    for _ in 1..levels {
        let dims = cur
            .dims
            .iter()
            .zip(&spec.dims)
            .zip(&best.0)
            .map(|((&(lo, hi, pts), &(lo0, hi0, _)), &x)| {
                let half = (hi - lo) / (pts - 1) as f64 * window as f64;
                ((x - half).max(lo0), (x + half).min(hi0), pts)
            })
            .collect();
        cur = GridSpec::new(dims);
        let next = grid_min(&cur, &mut objective, &mut feasible)?;
        if next.1 <= best.1 {
            best = next;
        }
    }
    Ok(best)
}

/// Half-plane `a . x <= b` in the `(tau_u, tau_d)` plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlane {
    pub a: [f64; 2],
    pub b: f64,
}

/// Constraints of the time-split LP of one device: buffer causality,
/// downlink queue, slot length and non-negativity.
pub fn time_split_polytope(r_uplink: f64, drain: f64, room: f64, r_downlink: f64, q_down: f64, tau: f64) -> Vec<HalfPlane> {
    vec![
        HalfPlane { a: [r_uplink * drain, 0.0], b: room },
        HalfPlane { a: [0.0, r_downlink], b: q_down },
        HalfPlane { a: [1.0, 1.0], b: tau },
        HalfPlane { a: [-1.0, 0.0], b: 0.0 },
        HalfPlane { a: [0.0, -1.0], b: 0.0 },
    ]
}

/// Minimizes `c . x` over a bounded 2-D polytope by enumerating every pairwise
/// intersection of constraint lines. Ties go to the first vertex found.
pub fn lp_vertex_enum(c: [f64; 2], planes: &[HalfPlane]) -> Result<([f64; 2], f64)> {
    let scale = |p: &HalfPlane| p.a[0].abs().max(p.a[1].abs()).max(p.b.abs()).max(1.0);
    let inside = |x: [f64; 2]| planes.iter().all(|p| p.a[0] * x[0] + p.a[1] * x[1] <= p.b + 1e-9 * scale(p));
    let mut best: Option<([f64; 2], f64)> = None;
    for i in 0..planes.len() {
        for j in (i + 1)..planes.len() {
            let (p, q) = (planes[i], planes[j]);
            let det = p.a[0] * q.a[1] - p.a[1] * q.a[0];
            if det.abs() <= 1e-300 {
                continue;
            }
            let x = [(p.b * q.a[1] - p.a[1] * q.b) / det, (p.a[0] * q.b - p.b * q.a[0]) / det];
            if !x.iter().all(|v| v.is_finite()) || !inside(x) {
                continue;
            }
            let v = c[0] * x[0] + c[1] * x[1];
            if best.map_or(true, |(_, b)| v < b) {
                best = Some((x, v));
            }
        }
    }
    best.ok_or_else(|| Error::Infeasible("empty time-split polytope".into()))
}

/// Scaled KKT residual norms.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KktResidual {
    pub stationarity: f64,
    pub feasibility: f64,
    pub complementarity: f64,
}

impl KktResidual {
    pub fn max(&self) -> f64 {
        self.stationarity.max(self.feasibility).max(self.complementarity)
    }

    fn merge(&mut self, other: KktResidual) {
        self.stationarity = self.stationarity.max(other.stationarity);
        self.feasibility = self.feasibility.max(other.feasibility);
        self.complementarity = self.complementarity.max(other.complementarity);
    }
}

/// Subproblem data for [`kkt_residual`].
#[derive(Debug, Clone, Copy)]
pub enum KktProblem<'a> {
    /// Point: `p_downlink`; multipliers: `[mu]`.
    Downlink {
        w4: &'a [f64],
        tau_d: &'a [f64],
        gains: &'a [f64],
        q_down: &'a [f64],
    },
    /// Point: interleaved `[f_0, r_0, f_1, r_1, ...]`; multipliers: `rho_n`.
    LocalUplink {
        w1: &'a [f64],
        w2: &'a [f64],
        w3: &'a [f64],
        beta: &'a [f64],
        tau_u: &'a [f64],
        gains: &'a [f64],
        q_local: &'a [f64],
    },
    /// Point: `[b]` with `b = 1 / beta`; multipliers: `[xi]`.
    Extraction {
        w1: f64,
        w2: f64,
        sem_bits: f64,
        room: f64,
    },
    /// Point: `f_remote`; multipliers: `[nu]`.
    Remote {
        w3: &'a [f64],
        w4: &'a [f64],
        g: &'a [f64],
        h_ratio: &'a [f64],
        q_remote: &'a [f64],
    },
}

/// Stationarity of a box-constrained coordinate: the gradient must vanish
/// inside the box and point outward at an active bound.
fn box_stationarity(x: f64, lo: f64, hi: f64, grad: f64) -> f64 {
    let span = (hi - lo).abs().max(1e-300);
    let at_lo = x <= lo + 1e-9 * span;
    let at_hi = x >= hi - 1e-9 * span;
    if at_lo && at_hi {
        0.0
    } else if at_lo {
        (-grad).max(0.0)
    } else if at_hi {
        grad.max(0.0)
    } else {
        grad.abs()
    }
}

fn coupled(point_sum: f64, budget: f64, mult: f64, term_scale: f64) -> KktResidual {
    let slack = budget - point_sum;
    KktResidual {
        stationarity: 0.0,
        feasibility: (-slack).max(0.0) / budget.max(1e-300),
        complementarity: if mult > 0.0 { mult * slack.abs() / (term_scale.max(1e-300) * budget.max(1e-300)) } else { 0.0 },
    }
}

/// Evaluates the stationarity, primal-feasibility and complementary-slackness
/// residuals of `point` with `multipliers`, each scaled by the magnitude of
/// the terms involved.
pub fn kkt_residual(problem: KktProblem<'_>, point: &[f64], multipliers: &[f64], cfg: &SystemConfig) -> KktResidual {
    let sigma = cfg.noise_power();
    let tau = cfg.slot_tau;
    let (a, k) = (cfg.a, cfg.k);
    let mut out = KktResidual::default();
    match problem {
        KktProblem::Downlink { w4, tau_d, gains, q_down } => {
            let mu = multipliers[0];
            let mut scale: f64 = 0.0;
            for n in 0..point.len() {
                if tau_d[n] <= 0.0 {
                    continue;
                }
                let (p, h) = (point[n], gains[n]);
                let cap = if q_down[n] > 0.0 {
                    sigma / h * (q_down[n] * LN_2 / (cfg.bandwidth * tau_d[n])).exp_m1()
                } else {
                    0.0
                };
                let gain_term = w4[n] * tau_d[n] * cfg.bandwidth * h / (LN_2 * (sigma + h * p));
                let grad = -gain_term + cfg.v * tau_d[n] + mu;
                let term_scale = gain_term + cfg.v * tau_d[n] + mu;
                scale = scale.max(term_scale);
                out.merge(KktResidual {
                    stationarity: box_stationarity(p, 0.0, cap, grad) / term_scale.max(1e-300),
                    feasibility: (p - cap).max(0.0) / cap.max(1e-300),
                    complementarity: 0.0,
                });
            }
            let total: f64 = point.iter().sum();
            out.merge(coupled(total, cfg.p_mec, mu, scale));
        }
        KktProblem::LocalUplink { w1, w2, w3, beta, tau_u, gains, q_local } => {
            for n in 0..w1.len() {
                let (f, r, rho) = (point[2 * n], point[2 * n + 1], multipliers[n]);
                let intensity = cfg.intensity.at(n);
                let kappa = cfg.kappa_local.at(n);
                let f_max = cfg.f_local_max.at(n);
                let r_max = link_rate(gains[n], cfg.p_uplink_max.at(n), cfg);
                let b = beta[n];
                let drain = 1.0 / b - a / b.powf(k);
                let c_up = a * w1[n] / b.powf(k) - w2[n] / b + w3[n];

                let energy_f = 3.0 * cfg.v * tau * kappa * f * f;
                let grad_f = -w2[n] * tau / intensity + energy_f + rho * tau / intensity;
                let scale_f = w2[n] * tau / intensity + energy_f + rho * tau / intensity;
                let mut res = KktResidual {
                    stationarity: box_stationarity(f, 0.0, f_max, grad_f) / scale_f.max(1e-300),
                    ..Default::default()
                };
                if tau_u[n] > 0.0 {
                    let energy_r = cfg.v * (sigma / gains[n]) * (LN_2 / cfg.bandwidth) * (r * LN_2 / cfg.bandwidth).exp();
                    let grad_r = tau_u[n] * (c_up + rho * drain + energy_r);
                    let scale_r = tau_u[n] * (c_up.abs() + (rho * drain).abs() + energy_r);
                    res.stationarity = res.stationarity.max(box_stationarity(r, 0.0, r_max, grad_r) / scale_r.max(1e-300));
                }
                let used = tau * f / intensity + tau_u[n] * r * drain;
                let mag = (tau * f / intensity + (tau_u[n] * r * drain).abs() + q_local[n]).max(1.0);
                let viol = used - q_local[n];
                res.feasibility = viol.max(0.0) / mag;
                let dual_scale = (w2[n] + c_up.abs()).max(1e-300);
                res.complementarity = rho * viol.abs() / (dual_scale * mag);
                out.merge(res);
            }
        }
        KktProblem::Extraction { w1, w2, sem_bits, room } => {
            let (bt, xi) = (point[0], multipliers[0]);
            let m = sem_bits;
            let b_max = 1.0 / cfg.beta_min;
            let obj_grad = m * (k * a * w1 * bt.powf(k - 1.0) - w2);
            let con_grad = m - a * k * m * bt.powf(k - 1.0);
            let grad = obj_grad + xi * con_grad;
            let scale = m * (k * a * w1 * bt.powf(k - 1.0) + w2) + xi * (m + a * k * m * bt.powf(k - 1.0));
            let viol = m * bt - a * m * bt.powf(k) - room;
            let mag = (m * bt + room.abs()).max(1.0);
            out.merge(KktResidual {
                stationarity: box_stationarity(bt, 1.0, b_max, grad) / scale.max(1e-300),
                feasibility: viol.max(0.0) / mag,
                complementarity: xi * viol.abs() / (scale.max(1e-300) / m.max(1e-300) * mag),
            });
        }
        KktProblem::Remote { w3, w4, g, h_ratio, q_remote } => {
            let nu = multipliers[0];
            let mut scale: f64 = 0.0;
            for n in 0..point.len() {
                let f = point[n];
                let intensity = cfg.intensity.at(n);
                let phi = (w4[n] * h_ratio[n] * tau - w3[n] * tau) / (g[n] * intensity);
                let cap = q_remote[n].max(0.0) * g[n] * intensity / tau;
                let energy = 3.0 * cfg.v * tau * cfg.kappa_mec * f * f;
                let grad = phi + energy + nu;
                let term_scale = phi.abs() + energy + nu;
                scale = scale.max(term_scale);
                out.merge(KktResidual {
                    stationarity: box_stationarity(f, 0.0, cap, grad) / term_scale.max(1e-300),
                    feasibility: (f - cap).max(0.0) / cap.max(1.0),
                    complementarity: 0.0,
                });
            }
            let total: f64 = point.iter().sum();
            out.merge(coupled(total, cfg.f_mec, nu, scale));
        }
    }
    out
}
