//! Policies the simulator can run: the full controller and its baselines.
//!
//! * `drmsa`: coordinate descent over every block.
//! * `ns`: no semantic extraction (`beta = 1`, no extraction workload).
//! * `nl`: no local computing (`f_local = 0`).
//! * `myopic`: per-slot energy minimization that meets the rate target each
//!   slot with no regard for backlogs.
//! * `exh`: multi-start search over the warm start of the descent.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::model::{link_power, link_rate, SlotDecision, TdDecision};
use crate::queueing::TdState;
use crate::scheduler::{compute_all_weights, fresh_start, plan_slot, remote_ratios, BcdConfig, PlanVariant, SlotObservation, SlotPlan};
use crate::solvers::{dual_bisect, eval_local_objective, eval_remote_objective};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    Drmsa,
    Ns,
    Nl,
    Myopic,
    Exh,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 5] = [
        PolicyKind::Drmsa,
        PolicyKind::Ns,
        PolicyKind::Nl,
        PolicyKind::Myopic,
        PolicyKind::Exh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Drmsa => "drmsa",
            PolicyKind::Ns => "ns",
            PolicyKind::Nl => "nl",
            PolicyKind::Myopic => "myopic",
            PolicyKind::Exh => "exh",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::config("algo", format!("unknown policy `{s}` (expected drmsa, ns, nl, myopic or exh)")))
    }
}

/// A policy plus its tuning knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub kind: PolicyKind,
    /// Number of starts tried by `exh`, including the DRMSA start.
    pub exh_restarts: usize,
}

impl Policy {
    pub fn new(kind: PolicyKind) -> Self {
        Policy { kind, exh_restarts: 50 }
    }

    /// Config the policy plans and accounts with. Without semantic
    /// extraction there is no extraction workload, so `a` is zeroed.
    pub fn planning_config(&self, cfg: &SystemConfig) -> SystemConfig {
        let mut cfg = cfg.clone();
        if self.kind == PolicyKind::Ns {
            cfg.a = 0.0;
        }
        cfg
    }

    pub fn variant(&self) -> PlanVariant {
        PlanVariant {
            semantic: self.kind != PolicyKind::Ns,
            local_cpu: self.kind != PolicyKind::Nl,
        }
    }
}

impl From<PolicyKind> for Policy {
    fn from(kind: PolicyKind) -> Self {
        Policy::new(kind)
    }
}

/// Plans one slot with `policy`. `cfg` must already be the policy's
/// planning config.
pub fn plan(
    policy: Policy,
    states: &[TdState],
    obs: &SlotObservation,
    cfg: &SystemConfig,
    bcd: &BcdConfig,
    prev: Option<&SlotDecision>,
    rng: &mut ChaCha8Rng,
) -> Result<SlotPlan> {
    let start = if bcd.warm_start { prev.cloned() } else { Some(fresh_start(states.len(), cfg)) };
    match policy.kind {
        PolicyKind::Drmsa | PolicyKind::Ns | PolicyKind::Nl => plan_slot(states, obs, cfg, bcd, policy.variant(), start.as_ref()),
        PolicyKind::Myopic => plan_myopic(states, obs, cfg),
        PolicyKind::Exh => plan_exh(states, obs, cfg, bcd, start.as_ref(), policy.exh_restarts, rng),
    }
}

/// Cheapest `(f, r)` for one device delivering `R_avg` processed bits/s with
/// the whole slot on the uplink at `beta = beta_min`. Returns the maxima and
/// `false` when the target is out of reach.
pub fn myopic_rates(h: f64, n: usize, cfg: &SystemConfig) -> Result<(f64, f64, bool)> {
    let beta = cfg.beta_min;
    let intensity = cfg.intensity.at(n);
    let kappa = cfg.kappa_local.at(n);
    let f_max = cfg.f_local_max.at(n);
    let r_max = link_rate(h, cfg.p_uplink_max.at(n), cfg);
    let sigma = cfg.noise_power();
    let b = cfg.bandwidth;
    let response = |zeta: f64| {
        let f = if kappa > 0.0 { (zeta / (3.0 * kappa * intensity)).sqrt().min(f_max) } else { f_max };
        let r = (b * (zeta * b * h / (beta * std::f64::consts::LN_2 * sigma)).log2()).clamp(0.0, r_max);
        (f, r)
    };
    let served = |(f, r): (f64, f64)| f / intensity + r / beta;
    if served((f_max, r_max)) < cfg.r_avg {
        return Ok((f_max, r_max, false));
    }
    let root = dual_bisect(|z| cfg.r_avg - served(response(z)))?;
    let (f_hi, r_hi) = response(root.multiplier);
    let w = root.weight_lower;
    if w > 0.0 {
        let (f_lo, r_lo) = response(root.lower);
        Ok((w * f_lo + (1.0 - w) * f_hi, w * r_lo + (1.0 - w) * r_hi, true))
    } else {
        Ok((f_hi, r_hi, true))
    }
}

/// Myopic baseline: every slot, the least transmit-and-compute energy that
/// processes `R_avg` bits/s per device at the most aggressive extraction,
/// with the whole slot spent on the uplink and no downlink. The server runs
/// each device at the frequency that clears what it just received.
pub fn plan_myopic(states: &[TdState], obs: &SlotObservation, cfg: &SystemConfig) -> Result<SlotPlan> {
    let n = states.len();
    let tau = cfg.slot_tau;
    let (g, h_ratio) = remote_ratios(&obs.min_chi, cfg)?;
    let mut shortfalls = 0;
    let mut tds = Vec::with_capacity(n);
    for i in 0..n {
        let h = obs.gains[i];
        let (f, r, met) = myopic_rates(h, i, cfg)?;
        shortfalls += usize::from(!met);
        tds.push(TdDecision {
            f_local: f,
            r_uplink: r,
            p_uplink: link_power(h, r, cfg).min(cfg.p_uplink_max.at(i)),
            p_downlink: 0.0,
            beta: cfg.beta_min,
            tau_u: tau,
            tau_d: 0.0,
            f_remote: r * g[i] * cfg.intensity.at(i),
        });
    }
    let wanted: f64 = tds.iter().map(|t| t.f_remote).sum();
    if wanted > cfg.f_mec {
        let s = cfg.f_mec / wanted;
        for t in &mut tds {
            t.f_remote *= s;
        }
    }
    let decision = SlotDecision { tds };
    let weights = compute_all_weights(states, obs, cfg);
    let f_remote: Vec<f64> = decision.tds.iter().map(|t| t.f_remote).collect();
    Ok(SlotPlan {
        local_objective: eval_local_objective(&weights, &decision, &obs.gains, cfg),
        remote_objective: eval_remote_objective(&weights, &f_remote, &g, &h_ratio, cfg),
        decision,
        weights,
        objective_trace: Vec::new(),
        rounds: 0,
        extraction_flags: 0,
        clamp_events: 0,
        rate_shortfalls: shortfalls,
    })
}

/// Uniform point of the simplex `{tau_u, tau_d >= 0, tau_u + tau_d <= tau}`.
fn random_split(rng: &mut ChaCha8Rng, tau: f64) -> (f64, f64) {
    let (mut u, mut d): (f64, f64) = (rng.gen(), rng.gen());
    if u + d > 1.0 {
        u = 1.0 - u;
        d = 1.0 - d;
    }
    (u * tau, d * tau)
}

/// Multi-start baseline: runs the descent from `start` and from
/// `restarts - 1` random extraction factors and time splits, keeping the
/// lowest total objective (earliest start on ties).
pub fn plan_exh(
    states: &[TdState],
    obs: &SlotObservation,
    cfg: &SystemConfig,
    bcd: &BcdConfig,
    start: Option<&SlotDecision>,
    restarts: usize,
    rng: &mut ChaCha8Rng,
) -> Result<SlotPlan> {
    let n = states.len();
    let mut starts: Vec<Option<SlotDecision>> = vec![start.cloned()];
    for _ in 1..restarts.max(1) {
        let tds = (0..n)
            .map(|_| {
                let beta = rng.gen_range(cfg.beta_min..=1.0);
                let (tau_u, tau_d) = random_split(rng, cfg.slot_tau);
                TdDecision { beta, tau_u, tau_d, ..Default::default() }
            })
            .collect();
        starts.push(Some(SlotDecision { tds }));
    }
    let plans = starts
        .par_iter()
        .map(|init| plan_slot(states, obs, cfg, bcd, PlanVariant::FULL, init.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, p) in plans.iter().enumerate() {
        if p.total_objective() < plans[best].total_objective() {
            best = i;
        }
    }
    Ok(plans.into_iter().nth(best).expect("at least one start"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn names_round_trip() {
        for k in PolicyKind::ALL {
            assert_eq!(k.to_string().parse::<PolicyKind>().unwrap(), k);
        }
        assert_eq!("DRMSA".parse::<PolicyKind>().unwrap(), PolicyKind::Drmsa);
        assert!("greedy".parse::<PolicyKind>().is_err());
    }

    #[test]
    fn random_splits_stay_in_the_simplex() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut mean = (0.0, 0.0);
        for _ in 0..20_000 {
            let (u, d) = random_split(&mut rng, 1.0);
            assert!(u >= 0.0 && d >= 0.0 && u + d <= 1.0);
            mean.0 += u / 20_000.0;
            mean.1 += d / 20_000.0;
        }
        // centroid of the triangle
        assert!((mean.0 - 1.0 / 3.0).abs() < 0.01 && (mean.1 - 1.0 / 3.0).abs() < 0.01);
    }

    #[test]
    fn myopic_meets_the_rate_target_exactly() {
        let cfg = SystemConfig::default();
        let (f, r, met) = myopic_rates(2e-11, 0, &cfg).unwrap();
        assert!(met);
        let served = f / 70.0 + r / cfg.beta_min;
        assert!((served - cfg.r_avg).abs() <= 1e-6 * cfg.r_avg);
        // both marginal costs equal the same multiplier
        let zeta_f = 3.0 * 1e-26 * 70.0 * f * f;
        let sigma = cfg.noise_power();
        let zeta_r = cfg.beta_min * sigma / 2e-11 * std::f64::consts::LN_2 / 2e6 * (r / 2e6).exp2();
        assert!((zeta_f - zeta_r).abs() <= 1e-6 * zeta_f);
    }

    #[test]
    fn myopic_flags_unreachable_targets() {
        let mut cfg = SystemConfig::default();
        cfg.r_avg = 1e9;
        let mut states = vec![TdState::default(); cfg.num_tds];
        states[0].q_local = 1.0;
        let obs = SlotObservation {
            gains: vec![1e-11; cfg.num_tds],
            arrivals: vec![0.0; cfg.num_tds],
            min_chi: vec![1.0; cfg.num_tds],
        };
        let plan = plan_myopic(&states, &obs, &cfg).unwrap();
        assert_eq!(plan.rate_shortfalls, cfg.num_tds);
        assert!(plan.decision.tds.iter().all(|t| t.f_local == 1e9));
        assert!(plan.decision.tds.iter().map(|t| t.f_remote).sum::<f64>() <= cfg.f_mec * (1.0 + 1e-12));
    }

    #[test]
    fn exh_is_no_worse_than_its_warm_start() {
        let cfg = SystemConfig::default();
        let states: Vec<TdState> = (0..cfg.num_tds)
            .map(|i| TdState {
                q_local: 2e6 * (1 + i) as f64,
                q_remote: 5e5,
                q_down: 1e4,
                x_q: 3e6,
                x_r: 1e7,
                ..Default::default()
            })
            .collect();
        let obs = SlotObservation {
            gains: (0..cfg.num_tds).map(|i| 4e-11 / (1.0 + 0.3 * i as f64)).collect(),
            arrivals: vec![0.0; cfg.num_tds],
            min_chi: vec![0.4; cfg.num_tds],
        };
        let bcd = BcdConfig::default();
        let base = plan_slot(&states, &obs, &cfg, &bcd, PlanVariant::FULL, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let exh = plan_exh(&states, &obs, &cfg, &bcd, None, 8, &mut rng).unwrap();
        assert!(exh.total_objective() <= base.total_objective());
        exh.decision.check_feasible(&cfg, &obs.gains).unwrap();
    }

    #[test]
    fn ns_and_nl_respect_their_restrictions() {
        let cfg = SystemConfig::default();
        let states: Vec<TdState> =
            (0..cfg.num_tds).map(|_| TdState { q_local: 5e6, x_q: 2e6, x_r: 4e6, ..Default::default() }).collect();
        let obs = SlotObservation {
            gains: vec![2e-11; cfg.num_tds],
            arrivals: vec![0.0; cfg.num_tds],
            min_chi: vec![1.0; cfg.num_tds],
        };
        let bcd = BcdConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let ns = Policy::new(PolicyKind::Ns);
        let ns_cfg = ns.planning_config(&cfg);
        let p = plan(ns, &states, &obs, &ns_cfg, &bcd, None, &mut rng).unwrap();
        assert!(p.decision.tds.iter().all(|t| t.beta == 1.0));
        assert!(p.weights.iter().all(|w| w.c_max == 0.0));
        let p = plan(Policy::new(PolicyKind::Nl), &states, &obs, &cfg, &bcd, None, &mut rng).unwrap();
        assert!(p.decision.tds.iter().all(|t| t.f_local == 0.0));
        assert!(p.decision.tds.iter().any(|t| t.r_uplink > 0.0));
    }
}
