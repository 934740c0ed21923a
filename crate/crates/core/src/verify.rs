//! Seeded solver-versus-oracle suites.
//!
//! Each suite draws random instances of one per-slot subproblem, solves them
//! with the closed-form solver and with a brute-force oracle from
//! [`crate::oracle`], and records the worst objective gap
//! `|solver - oracle| / (1 + |oracle|)` and the worst scaled KKT residual.
//! Oracle objectives are written out here from the model formulas; only the
//! solver under test is called from [`crate::solvers`].

use std::fmt;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::SystemConfig;
use crate::error::Result;
use crate::model::{downlink_rate, extraction_cost, link_power, link_rate, local_power};
use crate::oracle::{
    grid_min, kkt_residual, lp_vertex_enum, refine_grid_min, time_split_polytope, GridSpec, KktProblem,
};
use crate::scheduler::stream_rng;
use crate::solvers::{
    solve_downlink_power, solve_extraction_factor, solve_local_and_uplink, solve_remote_allocation,
    solve_time_division, SlotWeights,
};

pub const OBJECTIVE_TOL: f64 = 1e-4;
pub const LP_TOL: f64 = 1e-6;
pub const KKT_TOL: f64 = 1e-6;
pub const DEFAULT_INSTANCES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub name: &'static str,
    pub instances: usize,
    pub max_gap: f64,
    pub worst_gap_instance: usize,
    pub gap_tol: f64,
    /// `None` for the time split, whose oracle is exact.
    pub max_kkt: Option<f64>,
    pub worst_kkt_instance: usize,
}

impl SuiteReport {
    fn new(name: &'static str, gap_tol: f64, with_kkt: bool) -> Self {
        SuiteReport {
            name,
            instances: 0,
            max_gap: 0.0,
            worst_gap_instance: 0,
            gap_tol,
            max_kkt: with_kkt.then_some(0.0),
            worst_kkt_instance: 0,
        }
    }

    fn record(&mut self, i: usize, gap: f64, kkt: Option<f64>) {
        self.instances += 1;
        if !(gap <= self.max_gap) {
            self.max_gap = gap;
            self.worst_gap_instance = i;
        }
        if let (Some(k), Some(m)) = (kkt, self.max_kkt.as_mut()) {
            if !(k <= *m) {
                *m = k;
                self.worst_kkt_instance = i;
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.max_gap <= self.gap_tol && self.max_kkt.map_or(true, |k| k <= KKT_TOL)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<14} {} instances={} max_gap={:.3e} (tol {:.0e}, #{})",
            self.name,
            if self.passed() { "PASS" } else { "FAIL" },
            self.instances,
            self.max_gap,
            self.gap_tol,
            self.worst_gap_instance
        )?;
        if let Some(k) = self.max_kkt {
            write!(f, " max_kkt={k:.3e} (tol {KKT_TOL:.0e}, #{})", self.worst_kkt_instance)?;
        }
        Ok(())
    }
}

fn gap(solver: f64, oracle: f64) -> f64 {
    (solver - oracle).abs() / (1.0 + oracle.abs())
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

/// Smallest multiplier on an enumerated grid at which `total(m) <= budget`:
/// a coarse geometric sweep, then repeated linear sweeps of the bracket.
fn enumerate_multiplier(mut total: impl FnMut(f64) -> f64, budget: f64) -> f64 {
    if total(0.0) <= budget {
        return 0.0;
    }
    let mut prev = 0.0;
    let mut hi = f64::NAN;
    for e in 0..=160 {
        let m = 10f64.powf(-10.0 + 0.25 * e as f64);
        if total(m) <= budget {
            hi = m;
            break;
        }
        prev = m;
    }
    assert!(hi.is_finite(), "multiplier grid exhausted");
    let mut lo = prev;
    for _ in 0..10 {
        let step = (hi - lo) / 20.0;
        for j in 1..=20 {
            let m = lo + step * j as f64;
            if total(m) <= budget {
                hi = m;
                lo = m - step;
                break;
            }
        }
    }
    hi
}

/// Downlink power: per-device grid for each multiplier, multiplier by enumeration.
pub fn downlink_suite(instances: usize, seed: u64) -> Result<SuiteReport> {
    let cfg = SystemConfig::default();
    let mut rng = stream_rng(seed, "verify-downlink", 0);
    let mut report = SuiteReport::new("downlink", OBJECTIVE_TOL, true);
    let n = 3;
    for i in 0..instances {
        let w4: Vec<f64> = (0..n).map(|_| log_uniform(&mut rng, 1e6, 1e10)).collect();
        let gains: Vec<f64> = (0..n).map(|_| log_uniform(&mut rng, 3e-12, 5e-11)).collect();
        let tau_d: Vec<f64> = (0..n).map(|_| if rng.gen_bool(0.1) { 0.0 } else { rng.gen_range(0.05..1.0) }).collect();
        let q_down: Vec<f64> = (0..n).map(|_| log_uniform(&mut rng, 1e3, 1e8)).collect();
        let weights: Vec<SlotWeights> = w4.iter().map(|&w4| SlotWeights { w4, ..Default::default() }).collect();

        let sol = solve_downlink_power(&weights, &tau_d, &gains, &q_down, &cfg)?;
        let value = |k: usize, p: f64| -w4[k] * tau_d[k] * downlink_rate(gains[k], p, &cfg) + cfg.v * tau_d[k] * p;
        let solver: f64 = (0..n).map(|k| value(k, sol.p_downlink[k])).sum();

        let response = |k: usize, mu: f64| -> f64 {
            if tau_d[k] <= 0.0 {
                return 0.0;
            }
            refine_grid_min(
                &GridSpec::uniform(0.0, cfg.p_mec, 41),
                18,
                4,
                |x| value(k, x[0]) + mu * x[0],
                |x| tau_d[k] * downlink_rate(gains[k], x[0], &cfg) <= q_down[k],
            )
            .expect("p = 0 is feasible")
            .0[0]
        };
        let mu = enumerate_multiplier(|mu| (0..n).map(|k| response(k, mu)).sum(), cfg.p_mec);
        let oracle: f64 = (0..n).map(|k| value(k, response(k, mu))).sum();
        let kkt = kkt_residual(
            KktProblem::Downlink { w4: &w4, tau_d: &tau_d, gains: &gains, q_down: &q_down },
            &sol.p_downlink,
            &[sol.mu],
            &cfg,
        );
        report.record(i, gap(solver, oracle), Some(kkt.max()));
    }
    Ok(report)
}

/// Local CPU and uplink rate of one device: dense 2-D grid over `(f, r)`.
pub fn local_uplink_suite(instances: usize, seed: u64) -> Result<SuiteReport> {
    let cfg = SystemConfig::default();
    let mut rng = stream_rng(seed, "verify-local", 0);
    let mut report = SuiteReport::new("local-uplink", OBJECTIVE_TOL, true);
    let tau = cfg.slot_tau;
    let (intensity, kappa, f_max) = (cfg.intensity.at(0), cfg.kappa_local.at(0), cfg.f_local_max.at(0));
    for i in 0..instances {
        let w = SlotWeights {
            w1: rng.gen_range(0.0..1e8),
            w2: log_uniform(&mut rng, 1e5, 1e9),
            w3: rng.gen_range(0.0..5e7),
            ..Default::default()
        };
        let beta = rng.gen_range(cfg.beta_min..=1.0);
        let tau_u = rng.gen_range(0.05..1.0);
        let h = log_uniform(&mut rng, 3e-12, 5e-11);
        let q = log_uniform(&mut rng, 1e4, 1e8);

        let sol = solve_local_and_uplink(&[w], &[beta], &[tau_u], &[h], &[q], &cfg)?;
        let objective = |f: f64, r: f64| {
            let c = extraction_cost(tau_u, r, beta, &cfg).expect("valid extraction inputs");
            w.w1 * c + w.w3 * tau_u * r - w.w2 * (tau * f / intensity + tau_u * r / beta)
                + cfg.v * (tau * local_power(f, kappa) + tau_u * link_power(h, r, &cfg))
        };
        let feasible = |f: f64, r: f64| {
            let c = extraction_cost(tau_u, r, beta, &cfg).expect("valid extraction inputs");
            tau * f / intensity + tau_u * r / beta <= q + c
        };
        let solver = objective(sol.f_local[0], sol.r_uplink[0]);
        let r_max = link_rate(h, cfg.p_uplink_max.at(0), &cfg);
        // nested 1-D grids: the partial minimum over r stays convex in f
        let inner = |f: f64| {
            refine_grid_min(&GridSpec::uniform(0.0, r_max, 41), 14, 4, |x| objective(f, x[0]), |x| feasible(f, x[0]))
                .map_or(f64::INFINITY, |(_, v)| v)
        };
        let (_, oracle) = refine_grid_min(&GridSpec::uniform(0.0, f_max, 41), 14, 4, |x| inner(x[0]), |x| feasible(x[0], 0.0))?;

        let kkt = kkt_residual(
            KktProblem::LocalUplink {
                w1: &[w.w1],
                w2: &[w.w2],
                w3: &[w.w3],
                beta: &[beta],
                tau_u: &[tau_u],
                gains: &[h],
                q_local: &[q],
            },
            &[sol.f_local[0], sol.r_uplink[0]],
            &sol.rho,
            &cfg,
        );
        report.record(i, gap(solver, oracle), Some(kkt.max()));
    }
    Ok(report)
}

/// Extraction factor: grid with step `1e-4` over `[beta_min, 1]` on the
/// original non-convex problem. The gap is one-sided (the solver may beat
/// the grid). The multiplier for the KKT check is recovered from
/// stationarity when the buffer constraint is active.
pub fn extraction_suite(instances: usize, seed: u64) -> Result<SuiteReport> {
    let cfg = SystemConfig::default();
    let mut rng = stream_rng(seed, "verify-extraction", 0);
    let mut report = SuiteReport::new("extraction", OBJECTIVE_TOL, true);
    let (a, k, tau) = (cfg.a, cfg.k, cfg.slot_tau);
    let intensity = cfg.intensity.at(0);
    let points = ((1.0 - cfg.beta_min) / 1e-4).round() as usize + 1;
    for i in 0..instances {
        let w = SlotWeights {
            w1: if rng.gen_bool(0.1) { 0.0 } else { log_uniform(&mut rng, 1e4, 1e10) },
            w2: log_uniform(&mut rng, 1e5, 1e9),
            ..Default::default()
        };
        let tau_u = rng.gen_range(0.05..1.0);
        let r = log_uniform(&mut rng, 1e5, 1e7);
        let f = rng.gen_range(0.0..1e9);
        let beta0 = rng.gen_range(cfg.beta_min..=1.0);
        let m = tau_u * r;
        let need = m / beta0 - a * m / beta0.powf(k);
        let extra = rng.gen::<f64>().powi(3) * 2.0 * m;
        let q = tau * f / intensity + need + extra;

        let sol = solve_extraction_factor(&[w], &[f], &[r], &[tau_u], &[q], &cfg, &[beta0]);
        let objective = |beta: f64| w.w1 * extraction_cost(tau_u, r, beta, &cfg).expect("valid") - w.w2 * m / beta;
        let feasible = |beta: f64| {
            let c = extraction_cost(tau_u, r, beta, &cfg).expect("valid");
            tau * f / intensity + m / beta <= q + c + 1e-9 * (q + m / beta)
        };
        let solver = objective(sol.beta[0]);
        let (_, oracle) = grid_min(&GridSpec::uniform(cfg.beta_min, 1.0, points), |x| objective(x[0]), |x| feasible(x[0]))?;

        let b = 1.0 / sol.beta[0];
        let room = q - tau * f / intensity;
        let obj_grad = m * (k * a * w.w1 * b.powf(k - 1.0) - w.w2);
        let con_grad = m - a * k * m * b.powf(k - 1.0);
        let slack = room - (m * b - a * m * b.powf(k));
        let active = slack.abs() <= 1e-9 * (room.abs() + m * b) && con_grad > 0.0;
        let xi = if active { (-obj_grad / con_grad).max(0.0) } else { 0.0 };
        let kkt = kkt_residual(
            KktProblem::Extraction { w1: w.w1, w2: w.w2, sem_bits: m, room },
            &[b],
            &[xi],
            &cfg,
        );
        report.record(i, (solver - oracle).max(0.0) / (1.0 + oracle.abs()), Some(kkt.max()));
    }
    Ok(report)
}

/// Time split: vertex enumeration of the two-variable LP.
pub fn time_division_suite(instances: usize, seed: u64) -> Result<SuiteReport> {
    let base = SystemConfig::default();
    let mut rng = stream_rng(seed, "verify-time", 0);
    let mut report = SuiteReport::new("time-division", LP_TOL, false);
    let mut i = 0;
    while report.instances < instances {
        let mut cfg = base.clone();
        // a large extraction cost makes the drain coefficient negative at small beta
        cfg.a = if rng.gen_bool(0.5) { 1e-3 } else { 0.05 };
        let tau = cfg.slot_tau;
        let intensity = cfg.intensity.at(0);
        let w = SlotWeights {
            w1: rng.gen_range(0.0..1e8),
            w2: log_uniform(&mut rng, 1e5, 1e9),
            w3: rng.gen_range(0.0..5e7),
            w4: log_uniform(&mut rng, 1e5, 1e10),
            c_max: 0.0,
        };
        let h = log_uniform(&mut rng, 3e-12, 5e-11);
        let beta = rng.gen_range(cfg.beta_min..=1.0);
        let r = if rng.gen_bool(0.1) { 0.0 } else { rng.gen_range(0.0..link_rate(h, 0.3, &cfg)) };
        let p_u = link_power(h, r, &cfg);
        let p_d = if rng.gen_bool(0.1) { 0.0 } else { rng.gen_range(0.0..cfg.p_mec) };
        let f = rng.gen_range(0.0..1e9);
        let drain = 1.0 / beta - cfg.a / beta.powf(cfg.k);
        let room = if drain < 0.0 && rng.gen_bool(0.5) {
            -rng.gen_range(0.0..0.9) * tau * r * drain.abs()
        } else {
            log_uniform(&mut rng, 1.0, 1e8)
        };
        let q_local = tau * f / intensity + room;
        let q_down = log_uniform(&mut rng, 1e2, 1e8);
        if q_local < 0.0 {
            continue;
        }

        let sol = solve_time_division(&[w], &[f], &[r], &[p_u], &[p_d], &[beta], &[h], &[q_local], &[q_down], &cfg);
        let r_d = downlink_rate(h, p_d, &cfg);
        let xi_u = w.w1 * cfg.a * r / beta.powf(cfg.k) + w.w3 * r - w.w2 * r / beta + cfg.v * p_u;
        let xi_d = cfg.v * p_d - w.w4 * r_d;
        let planes = time_split_polytope(r, drain, room, r_d, q_down, tau);
        let Ok((_, oracle)) = lp_vertex_enum([xi_u, xi_d], &planes) else {
            continue;
        };
        let s = sol.splits[0];
        let solver = xi_u * s.tau_u + xi_d * s.tau_d;
        let infeasible = planes.iter().any(|p| {
            let lhs = p.a[0] * s.tau_u + p.a[1] * s.tau_d;
            lhs > p.b + 1e-9 * p.a[0].abs().max(p.a[1].abs()).max(p.b.abs()).max(1.0)
        });
        report.record(i, if infeasible { f64::INFINITY } else { gap(solver, oracle) }, None);
        i += 1;
    }
    Ok(report)
}

/// Server CPU allocation: per-device grid for each multiplier, multiplier by
/// enumeration.
pub fn remote_suite(instances: usize, seed: u64) -> Result<SuiteReport> {
    let cfg = SystemConfig::default();
    let mut rng = stream_rng(seed, "verify-remote", 0);
    let mut report = SuiteReport::new("remote", OBJECTIVE_TOL, true);
    let n = 5;
    let tau = cfg.slot_tau;
    let intensity = cfg.intensity.at(0);
    for i in 0..instances {
        let w3: Vec<f64> = (0..n).map(|_| log_uniform(&mut rng, 1e6, 1e13)).collect();
        let w4: Vec<f64> = (0..n).map(|_| log_uniform(&mut rng, 1e5, 1e12)).collect();
        let g: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..3.3)).collect();
        let h_ratio: Vec<f64> = (0..n).map(|_| rng.gen_range(0.005..0.05)).collect();
        let q_remote: Vec<f64> = (0..n).map(|_| log_uniform(&mut rng, 1e4, 1e8)).collect();
        let weights: Vec<SlotWeights> =
            (0..n).map(|k| SlotWeights { w3: w3[k], w4: w4[k], ..Default::default() }).collect();

        let sol = solve_remote_allocation(&weights, &q_remote, &g, &h_ratio, &cfg)?;
        let value = |k: usize, f: f64| {
            (w4[k] * h_ratio[k] * tau - w3[k] * tau) * f / (g[k] * intensity) + cfg.v * tau * cfg.kappa_mec * f.powi(3)
        };
        let solver: f64 = (0..n).map(|k| value(k, sol.f_remote[k])).sum();
        let response = |k: usize, nu: f64| -> f64 {
            refine_grid_min(
                &GridSpec::uniform(0.0, cfg.f_mec, 41),
                18,
                4,
                |x| value(k, x[0]) + nu * x[0],
                |x| tau * x[0] / (g[k] * intensity) <= q_remote[k],
            )
            .expect("f = 0 is feasible")
            .0[0]
        };
        let nu = enumerate_multiplier(|nu| (0..n).map(|k| response(k, nu)).sum(), cfg.f_mec);
        let oracle: f64 = (0..n).map(|k| value(k, response(k, nu))).sum();

        let kkt = kkt_residual(
            KktProblem::Remote { w3: &w3, w4: &w4, g: &g, h_ratio: &h_ratio, q_remote: &q_remote },
            &sol.f_remote,
            &[sol.nu],
            &cfg,
        );
        report.record(i, gap(solver, oracle), Some(kkt.max()));
    }
    Ok(report)
}

/// All five suites with `instances` each.
pub fn run_all(instances: usize, seed: u64) -> Result<Vec<SuiteReport>> {
    Ok(vec![
        downlink_suite(instances, seed)?,
        local_uplink_suite(instances, seed)?,
        extraction_suite(instances, seed)?,
        time_division_suite(instances, seed)?,
        remote_suite(instances, seed)?,
    ])
}
