//! Per-slot controller and the simulation loop.
//!
//! Each slot the controller turns queue backlogs into weights, runs block
//! coordinate descent over (local CPU + uplink rate + downlink power),
//! extraction factor and time split until the local objective settles, then
//! allocates the server CPU. The simulator samples arrivals and channels,
//! asks a policy for a decision and applies the queue updates.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::baselines::{self, Policy};
use crate::config::{ArrivalMode, ChannelMode, SystemConfig};
use crate::error::{Error, Result};
use crate::model::{
    downlink_rate, extraction_cost_unchecked, intensity_ratio, link_rate, path_loss_gain, remote_rate, result_ratio,
    sample_channel, td_energy, EnergyBreakdown, SlotDecision, TdDecision,
};
use crate::queueing::{SlotFlows, TdState};
use crate::solvers::{
    eval_local_objective, eval_remote_objective, fill_idle_time, local_objective_magnitude, solve_downlink_power,
    solve_extraction_factor, solve_local_and_uplink, solve_remote_allocation, solve_time_division, solve_uplink_only,
    SlotWeights,
};

/// Stopping rule of the per-slot coordinate descent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BcdConfig {
    /// Stop when `|J_r - J_{r-1}| <= tol (1 + |J_{r-1}|)`.
    pub objective_rel_tol: f64,
    pub max_rounds: usize,
    /// Start each slot from the previous decision instead of [`fresh_start`].
    pub warm_start: bool,
}

impl Default for BcdConfig {
    fn default() -> Self {
        BcdConfig {
            objective_rel_tol: 1e-5,
            max_rounds: 30,
            warm_start: false,
        }
    }
}

impl BcdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.objective_rel_tol > 0.0) {
            return Err(Error::config("objective_rel_tol", "must be > 0"));
        }
        if self.max_rounds == 0 {
            return Err(Error::config("max_rounds", "must be >= 1"));
        }
        Ok(())
    }
}

/// What the controller sees at the start of a slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotObservation {
    pub gains: Vec<f64>,
    pub arrivals: Vec<f64>,
    pub min_chi: Vec<f64>,
}

/// Largest extraction workload device `n` could create this slot,
/// `a tau R^U(h, p_max) / beta_min^k`.
pub fn max_extraction_workload(h: f64, n: usize, cfg: &SystemConfig) -> f64 {
    let r_max = link_rate(h, cfg.p_uplink_max.at(n), cfg);
    cfg.a * cfg.slot_tau * r_max / cfg.beta_min.powf(cfg.k)
}

/// Queue-derived weights of device `n`.
pub fn compute_weights(state: &TdState, h: f64, n: usize, cfg: &SystemConfig) -> SlotWeights {
    let c_max = max_extraction_workload(h, n, cfg);
    SlotWeights {
        w1: 2.0 * state.q_local + state.x_q,
        w2: state.x_r + 2.0 * state.q_local + 2.0 * c_max + state.x_q,
        w3: 4.0 * state.q_remote + state.x_q,
        w4: 4.0 * state.q_down + state.x_q,
        c_max,
    }
}

pub fn compute_all_weights(states: &[TdState], obs: &SlotObservation, cfg: &SystemConfig) -> Vec<SlotWeights> {
    states
        .iter()
        .enumerate()
        .map(|(n, s)| compute_weights(s, obs.gains[n], n, cfg))
        .collect()
}

/// Which blocks the controller may move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanVariant {
    /// Optimize the extraction factor; when false it stays at 1.
    pub semantic: bool,
    /// Allow local computing; when false `f_local = 0`.
    pub local_cpu: bool,
}

impl PlanVariant {
    pub const FULL: PlanVariant = PlanVariant {
        semantic: true,
        local_cpu: true,
    };
}

/// A planned slot with diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotPlan {
    pub decision: SlotDecision,
    pub weights: Vec<SlotWeights>,
    /// Local objective after every completed round.
    pub objective_trace: Vec<f64>,
    pub local_objective: f64,
    pub remote_objective: f64,
    pub rounds: usize,
    /// Devices whose extraction step started from an infeasible factor.
    pub extraction_flags: usize,
    /// Time-split answers changed by a feasibility clamp.
    pub clamp_events: usize,
    /// Devices whose rate target could not be met (myopic policy).
    pub rate_shortfalls: usize,
}

impl SlotPlan {
    pub fn total_objective(&self) -> f64 {
        self.local_objective + self.remote_objective
    }
}

/// Remote intensity and result ratios from the ledger minima.
pub fn remote_ratios(min_chi: &[f64], cfg: &SystemConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    let g = min_chi.iter().map(|&c| intensity_ratio(c, cfg.p_exp)).collect::<Result<Vec<_>>>()?;
    let h = min_chi.iter().map(|&c| result_ratio(c, cfg.u)).collect::<Result<Vec<_>>>()?;
    Ok((g, h))
}

/// Default per-slot starting point: `beta = beta_min` and the slot split
/// evenly between uplink and downlink. Rates and frequencies start at zero.
pub fn fresh_start(num_tds: usize, cfg: &SystemConfig) -> SlotDecision {
    let mut d = SlotDecision::idle(num_tds);
    for t in &mut d.tds {
        t.beta = cfg.beta_min;
        t.tau_u = 0.5 * cfg.slot_tau;
        t.tau_d = 0.5 * cfg.slot_tau;
    }
    d
}

/// Clips a starting decision to the current boxes. Without one, every device
/// starts idle.
fn sanitize(init: Option<&SlotDecision>, n: usize, variant: PlanVariant, cfg: &SystemConfig) -> SlotDecision {
    let mut d = match init {
        Some(d) if d.tds.len() == n => d.clone(),
        _ => SlotDecision::idle(n),
    };
    let tau = cfg.slot_tau;
    for t in &mut d.tds {
        t.beta = if variant.semantic { t.beta.clamp(cfg.beta_min, 1.0) } else { 1.0 };
        t.tau_u = t.tau_u.clamp(0.0, tau);
        t.tau_d = t.tau_d.clamp(0.0, tau - t.tau_u);
    }
    d
}

/// Solves one slot's drift-plus-penalty problem.
///
/// Blocks run in the order (local CPU, uplink rate, downlink power), then
/// extraction factor, then time split followed by [`fill_idle_time`],
/// repeated until the relative change of the local objective falls below the
/// tolerance or the round limit is hit.
/// A block that raises the objective by more than `1e-9` of its magnitude is
/// reported as an error. The server CPU is allocated last.
pub fn plan_slot(
    states: &[TdState],
    obs: &SlotObservation,
    cfg: &SystemConfig,
    bcd: &BcdConfig,
    variant: PlanVariant,
    init: Option<&SlotDecision>,
) -> Result<SlotPlan> {
    let n = states.len();
    let gains = &obs.gains;
    let weights = compute_all_weights(states, obs, cfg);
    let q_local: Vec<f64> = states.iter().map(|s| s.q_local).collect();
    let q_down: Vec<f64> = states.iter().map(|s| s.q_down).collect();
    let q_remote: Vec<f64> = states.iter().map(|s| s.q_remote).collect();

    let mut d = sanitize(init, n, variant, cfg);
    let mut trace = Vec::new();
    let mut last: Option<f64> = None;
    let mut extraction_flags = 0;
    let mut clamp_events = 0;
    let mut rounds = 0;

    let check = |round: usize, last: &mut Option<f64>, d: &SlotDecision| -> Result<f64> {
        let j = eval_local_objective(&weights, d, gains, cfg);
        if let Some(before) = *last {
            let scale = local_objective_magnitude(&weights, d, gains, cfg).max(1.0);
            if j > before + 1e-9 * scale {
                return Err(Error::BcdIncrease { round, before, after: j });
            }
        }
        *last = Some(j);
        Ok(j)
    };

    for round in 1..=bcd.max_rounds {
        rounds = round;
        let beta: Vec<f64> = d.tds.iter().map(|t| t.beta).collect();
        let tau_u: Vec<f64> = d.tds.iter().map(|t| t.tau_u).collect();
        let tau_d: Vec<f64> = d.tds.iter().map(|t| t.tau_d).collect();

        let lu = if variant.local_cpu {
            solve_local_and_uplink(&weights, &beta, &tau_u, gains, &q_local, cfg)?
        } else {
            solve_uplink_only(&weights, &beta, &tau_u, gains, &q_local, cfg)?
        };
        let dl = solve_downlink_power(&weights, &tau_d, gains, &q_down, cfg)?;
        for (i, t) in d.tds.iter_mut().enumerate() {
            t.f_local = lu.f_local[i];
            t.r_uplink = lu.r_uplink[i];
            t.p_uplink = lu.p_uplink[i];
            t.p_downlink = dl.p_downlink[i];
        }
        check(round, &mut last, &d)?;

        let f_local: Vec<f64> = d.tds.iter().map(|t| t.f_local).collect();
        if variant.semantic {
            let ex = solve_extraction_factor(&weights, &f_local, &lu.r_uplink, &tau_u, &q_local, cfg, &beta);
            extraction_flags += ex.infeasible.iter().filter(|&&b| b).count();
            for (t, b) in d.tds.iter_mut().zip(&ex.beta) {
                t.beta = *b;
            }
            check(round, &mut last, &d)?;
        }

        let beta: Vec<f64> = d.tds.iter().map(|t| t.beta).collect();
        let td = solve_time_division(
            &weights,
            &f_local,
            &lu.r_uplink,
            &lu.p_uplink,
            &dl.p_downlink,
            &beta,
            gains,
            &q_local,
            &q_down,
            cfg,
        );
        clamp_events += td.clamped.iter().filter(|&&c| c).count();
        for (t, s) in d.tds.iter_mut().zip(&td.splits) {
            t.tau_u = s.tau_u;
            t.tau_d = s.tau_d;
        }
        check(round, &mut last, &d)?;

        let col = |get: fn(&TdDecision) -> f64| d.tds.iter().map(get).collect::<Vec<f64>>();
        let fill = fill_idle_time(&col(|t| t.tau_u), &col(|t| t.tau_d), &col(|t| t.r_uplink), &col(|t| t.p_downlink), gains, cfg);
        for (i, t) in d.tds.iter_mut().enumerate() {
            t.tau_u = fill.tau_u[i];
            t.tau_d = fill.tau_d[i];
            t.r_uplink = fill.r_uplink[i];
            t.p_uplink = fill.p_uplink[i];
            t.p_downlink = fill.p_downlink[i];
        }
        let j = check(round, &mut last, &d)?;
        let converged = trace
            .last()
            .map_or(false, |&prev: &f64| (j - prev).abs() <= bcd.objective_rel_tol * (1.0 + prev.abs()));
        trace.push(j);
        if converged {
            break;
        }
    }

    for t in &mut d.tds {
        if t.tau_u <= 0.0 {
            t.r_uplink = 0.0;
            t.p_uplink = 0.0;
        }
        if t.tau_d <= 0.0 {
            t.p_downlink = 0.0;
        }
    }
    let local_objective = eval_local_objective(&weights, &d, gains, cfg);

    let (g, h) = remote_ratios(&obs.min_chi, cfg)?;
    let remote = solve_remote_allocation(&weights, &q_remote, &g, &h, cfg)?;
    for (t, f) in d.tds.iter_mut().zip(&remote.f_remote) {
        t.f_remote = *f;
    }
    let remote_objective = eval_remote_objective(&weights, &remote.f_remote, &g, &h, cfg);

    Ok(SlotPlan {
        decision: d,
        weights,
        objective_trace: trace,
        local_objective,
        remote_objective,
        rounds,
        extraction_flags,
        clamp_events,
        rate_shortfalls: 0,
    })
}

/// Per-device result of one executed slot; queue values are after the update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TdMetrics {
    pub energy: EnergyBreakdown,
    pub q_local: f64,
    pub q_remote: f64,
    pub q_down: f64,
    pub x_q: f64,
    pub x_r: f64,
    pub decision: TdDecision,
    /// `tau R^L + tau_u R^U / beta`.
    pub proc_bits: f64,
    pub admitted_bits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotMetrics {
    pub slot: usize,
    pub tds: Vec<TdMetrics>,
    pub rounds: usize,
    pub extraction_flags: usize,
    pub clamp_events: usize,
    pub rate_shortfalls: usize,
}

impl SlotMetrics {
    pub fn energy(&self) -> f64 {
        self.tds.iter().map(|t| t.energy.total()).sum()
    }

    pub fn q_total(&self) -> f64 {
        self.tds.iter().map(|t| t.q_local + t.q_remote + t.q_down).sum()
    }

    pub fn proc_bits(&self) -> f64 {
        self.tds.iter().map(|t| t.proc_bits).sum()
    }
}

/// Applies `decision` to every device's queues and returns the per-device
/// metrics. Arrivals come from `obs`; `G` and `H` from its ledger minima.
pub fn apply_decision(states: &mut [TdState], obs: &SlotObservation, decision: &SlotDecision, cfg: &SystemConfig) -> Result<Vec<TdMetrics>> {
    let tau = cfg.slot_tau;
    let (g, h) = remote_ratios(&obs.min_chi, cfg)?;
    let mut out = Vec::with_capacity(states.len());
    for (n, state) in states.iter_mut().enumerate() {
        let d = decision.tds[n];
        let sem = d.tau_u * d.r_uplink;
        let flows = SlotFlows {
            arrival: obs.arrivals[n],
            extraction: extraction_cost_unchecked(sem, d.beta, cfg.a, cfg.k),
            local_bits: tau * d.f_local / cfg.intensity.at(n),
            uplink_sem_bits: sem,
            offload_raw_bits: sem / d.beta,
            processed_sem_bits: tau * remote_rate(d.f_remote, g[n], cfg.intensity.at(n)),
            downlink_bits: d.tau_d * downlink_rate(obs.gains[n], d.p_downlink, cfg),
            result_ratio: h[n],
            beta: d.beta,
        };
        let outcome = state.advance(&flows, cfg);
        out.push(TdMetrics {
            energy: td_energy(&d, n, cfg),
            q_local: state.q_local,
            q_remote: state.q_remote,
            q_down: state.q_down,
            x_q: state.x_q,
            x_r: state.x_r,
            decision: d,
            proc_bits: outcome.processed_bits,
            admitted_bits: outcome.admitted_bits,
        });
    }
    Ok(out)
}

/// Independent RNG stream for `(seed, label, index)`.
pub fn stream_rng(seed: u64, label: &str, index: usize) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(label.as_bytes());
    hasher.update((index as u64).to_le_bytes());
    ChaCha8Rng::from_seed(hasher.finalize().into())
}

/// Seeded multi-slot simulation under one policy.
#[derive(Debug, Clone)]
pub struct Simulator {
    cfg: SystemConfig,
    policy: Policy,
    bcd: BcdConfig,
    states: Vec<TdState>,
    mean_gains: Vec<f64>,
    arrival_rngs: Vec<ChaCha8Rng>,
    channel_rngs: Vec<ChaCha8Rng>,
    policy_rng: ChaCha8Rng,
    prev: Option<SlotDecision>,
    slot: usize,
}

impl Simulator {
    pub fn new(cfg: &SystemConfig, policy: Policy, bcd: BcdConfig) -> Result<Self> {
        let mut cfg = cfg.clone();
        cfg.validate()?;
        bcd.validate()?;
        let cfg = policy.planning_config(&cfg);
        let n = cfg.num_tds;
        let mean_gains = (0..n).map(|i| path_loss_gain(cfg.distance(i), &cfg)).collect::<Result<Vec<_>>>()?;
        Ok(Simulator {
            states: vec![TdState::default(); n],
            mean_gains,
            arrival_rngs: (0..n).map(|i| stream_rng(cfg.seed, "arrival", i)).collect(),
            channel_rngs: (0..n).map(|i| stream_rng(cfg.seed, "channel", i)).collect(),
            policy_rng: stream_rng(cfg.seed, policy.kind.name(), 0),
            prev: None,
            slot: 0,
            cfg,
            policy,
            bcd,
        })
    }

    /// Configuration the policy plans and accounts with.
    pub fn config(&self) -> &SystemConfig {
        &self.cfg
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }

    pub fn states(&self) -> &[TdState] {
        &self.states
    }

    pub fn slot(&self) -> usize {
        self.slot
    }

    pub fn mean_gains(&self) -> &[f64] {
        &self.mean_gains
    }

    /// Draws this slot's arrivals and channels.
    pub fn observe(&mut self) -> Result<SlotObservation> {
        let cfg = &self.cfg;
        let n = cfg.num_tds;
        let mut gains = Vec::with_capacity(n);
        let mut arrivals = Vec::with_capacity(n);
        for i in 0..n {
            gains.push(match cfg.channel_mode {
                ChannelMode::Stochastic => sample_channel(self.mean_gains[i], cfg.rician_gamma, &mut self.channel_rngs[i])?,
                ChannelMode::Fixed => self.mean_gains[i],
            });
            let lambda = cfg.arrival_mean_lambda.at(i);
            arrivals.push(match cfg.arrival_mode {
                ArrivalMode::Fixed => lambda,
                ArrivalMode::Stochastic if lambda > 0.0 => Exp::new(1.0 / lambda)
                    .map_err(|e| Error::domain(format!("arrival law: {e}")))?
                    .sample(&mut self.arrival_rngs[i]),
                ArrivalMode::Stochastic => 0.0,
            });
        }
        let min_chi = self.states.iter().map(|s| s.min_chi()).collect();
        Ok(SlotObservation { gains, arrivals, min_chi })
    }

    /// Plans with the policy for `obs` without touching the queues.
    pub fn plan(&mut self, obs: &SlotObservation) -> Result<SlotPlan> {
        baselines::plan(
            self.policy,
            &self.states,
            obs,
            &self.cfg,
            &self.bcd,
            self.prev.as_ref(),
            &mut self.policy_rng,
        )
    }

    /// Executes `plan` against `obs` and advances the slot counter.
    pub fn apply(&mut self, obs: &SlotObservation, plan: &SlotPlan) -> Result<SlotMetrics> {
        let tds = apply_decision(&mut self.states, obs, &plan.decision, &self.cfg)?;
        let metrics = SlotMetrics {
            slot: self.slot,
            tds,
            rounds: plan.rounds,
            extraction_flags: plan.extraction_flags,
            clamp_events: plan.clamp_events,
            rate_shortfalls: plan.rate_shortfalls,
        };
        self.prev = Some(plan.decision.clone());
        self.slot += 1;
        Ok(metrics)
    }

    /// One full slot: observe, plan, apply. A failure carries a dump of the
    /// slot's queues and observation.
    pub fn step(&mut self) -> Result<(SlotDecision, SlotMetrics)> {
        let slot = self.slot;
        let obs = self.observe()?;
        let plan = self.plan(&obs).map_err(|e| self.slot_error(slot, &obs, e))?;
        let metrics = self.apply(&obs, &plan).map_err(|e| self.slot_error(slot, &obs, e))?;
        Ok((plan.decision, metrics))
    }

    fn slot_error(&self, slot: usize, obs: &SlotObservation, source: Error) -> Error {
        let dump = serde_json::to_string_pretty(&serde_json::json!({
            "policy": self.policy.kind.name(),
            "states": self.states,
            "observation": obs,
            "previous_decision": self.prev,
        }))
        .unwrap_or_else(|e| format!("<unserializable state: {e}>"));
        Error::Slot {
            slot,
            dump,
            source: Box::new(source),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::PolicyKind;

    fn obs(cfg: &SystemConfig, gain: f64) -> SlotObservation {
        SlotObservation {
            gains: vec![gain; cfg.num_tds],
            arrivals: vec![0.0; cfg.num_tds],
            min_chi: vec![1.0; cfg.num_tds],
        }
    }

    #[test]
    fn weights_at_zero_state() {
        let cfg = SystemConfig::default();
        let w = compute_weights(&TdState::default(), 1e-11, 0, &cfg);
        assert_eq!((w.w1, w.w3, w.w4), (0.0, 0.0, 0.0));
        assert!(w.w2 > 0.0);
        assert_eq!(w.w2, 2.0 * w.c_max);
    }

    #[test]
    fn weights_by_hand() {
        let cfg = SystemConfig::default();
        let s = TdState { q_local: 1e6, x_q: 2e6, ..Default::default() };
        let w = compute_weights(&s, 1e-11, 0, &cfg);
        assert_eq!(w.w1, 4e6);
        assert_eq!(w.w3, 2e6);
        assert_eq!(w.w4, 2e6);
        let r_max = cfg.bandwidth * (1.0 + 1e-11 * 0.3 / cfg.noise_power()).log2();
        let c_max = 1e-3 * r_max / 0.3f64.powi(4);
        assert!((w.c_max - c_max).abs() <= 1e-9 * c_max);
        assert!((w.w2 - (2e6 + 2e6 + 2.0 * c_max)).abs() <= 1e-6);
    }

    #[test]
    fn empty_system_stays_idle() {
        let cfg = SystemConfig::default();
        let states = vec![TdState::default(); cfg.num_tds];
        let plan = plan_slot(&states, &obs(&cfg, 1e-11), &cfg, &BcdConfig::default(), PlanVariant::FULL, None).unwrap();
        for t in &plan.decision.tds {
            assert_eq!(t.f_local, 0.0);
            assert_eq!(t.r_uplink, 0.0);
            assert_eq!(t.p_downlink, 0.0);
            assert_eq!(t.f_remote, 0.0);
        }
    }

    #[test]
    fn loaded_system_plan_is_feasible_and_monotone() {
        let cfg = SystemConfig::default();
        let states: Vec<TdState> = (0..cfg.num_tds)
            .map(|i| TdState {
                q_local: 3e6 + 1e5 * i as f64,
                q_remote: 1e6,
                q_down: 2e4,
                x_q: 1e6,
                x_r: 5e6,
                ..Default::default()
            })
            .collect();
        let o = SlotObservation {
            gains: (0..cfg.num_tds).map(|i| 3e-11 / (1.0 + i as f64)).collect(),
            arrivals: vec![3e6; cfg.num_tds],
            min_chi: vec![0.5; cfg.num_tds],
        };
        let plan = plan_slot(&states, &o, &cfg, &BcdConfig::default(), PlanVariant::FULL, None).unwrap();
        plan.decision.check_feasible(&cfg, &o.gains).unwrap();
        for pair in plan.objective_trace.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-9 * pair[0].abs());
        }
        assert!(plan.decision.tds.iter().any(|t| t.f_local > 0.0));
        assert!(plan.decision.tds.iter().any(|t| t.tau_u > 0.0 && t.r_uplink > 0.0));
        assert!(plan.decision.tds.iter().any(|t| t.tau_d > 0.0 && t.p_downlink > 0.0));
        assert!(plan.decision.tds.iter().all(|t| t.f_remote > 0.0));
    }

    #[test]
    fn streams_are_distinct_and_reproducible() {
        use rand::Rng;
        let a: u64 = stream_rng(1, "arrival", 0).gen();
        let b: u64 = stream_rng(1, "arrival", 1).gen();
        let c: u64 = stream_rng(1, "channel", 0).gen();
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, stream_rng(1, "arrival", 0).gen::<u64>());
    }

    #[test]
    fn zero_arrivals_keep_the_system_empty() {
        let mut cfg = SystemConfig::default();
        cfg.arrival_mean_lambda = crate::config::PerTd::Uniform(0.0);
        cfg.horizon = 50;
        let mut sim = Simulator::new(&cfg, Policy::new(PolicyKind::Drmsa), BcdConfig::default()).unwrap();
        for _ in 0..50 {
            let (_, m) = sim.step().unwrap();
            assert!(m.energy() <= 1e-9);
            assert_eq!(m.q_total(), 0.0);
        }
    }

    #[test]
    fn virtual_queue_uses_next_total_backlog() {
        let mut cfg = SystemConfig::default();
        cfg.num_tds = 1;
        cfg.distances = vec![];
        cfg.validate().unwrap();
        let mut states = vec![TdState { q_local: 4e7, x_q: 1e6, ..Default::default() }];
        let o = SlotObservation { gains: vec![1e-11], arrivals: vec![2e6], min_chi: vec![1.0] };
        let d = SlotDecision {
            tds: vec![TdDecision { f_local: 7e8, ..Default::default() }],
        };
        let m = apply_decision(&mut states, &o, &d, &cfg).unwrap();
        // Q^L' = 2e6 + 4e7 - 1e7 = 3.2e7; X^q' = 1e6 + 3.2e7 - 2e7
        assert_eq!(m[0].q_local, 3.2e7);
        assert_eq!(m[0].x_q, 1.3e7);
        assert_eq!(m[0].proc_bits, 1e7);
        assert_eq!(m[0].x_r, 0.0);
    }
}
