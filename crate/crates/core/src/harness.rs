//! Seeded multi-slot runs, parameter sweeps and their on-disk outputs.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{Policy, PolicyKind};
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::scheduler::{BcdConfig, SlotMetrics, Simulator};

/// Slots excluded from the "converged" averages.
pub const WARMUP_SLOTS: usize = 2000;

/// Column order of the trace CSV.
pub const TRACE_HEADER: &str = "slot,td,policy,energy_total,energy_local,energy_uplink,energy_remote,energy_downlink,\
q_local,q_remote,q_down,x_q,x_r,beta,tau_u,tau_d,f_local,f_remote,p_uplink,p_downlink,proc_bits";

/// One device in one slot. Queue values are after the slot's update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub slot: usize,
    pub td: usize,
    pub policy: PolicyKind,
    pub energy_total: f64,
    pub energy_local: f64,
    pub energy_uplink: f64,
    pub energy_remote: f64,
    pub energy_downlink: f64,
    pub q_local: f64,
    pub q_remote: f64,
    pub q_down: f64,
    pub x_q: f64,
    pub x_r: f64,
    pub beta: f64,
    pub tau_u: f64,
    pub tau_d: f64,
    pub f_local: f64,
    pub f_remote: f64,
    pub p_uplink: f64,
    pub p_downlink: f64,
    pub proc_bits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub config_hash: String,
    pub seed: u64,
    pub policy: PolicyKind,
    pub rows: Vec<TraceRow>,
}

impl Trace {
    fn push_slot(&mut self, m: &SlotMetrics) {
        for (td, t) in m.tds.iter().enumerate() {
            let d = &t.decision;
            self.rows.push(TraceRow {
                slot: m.slot,
                td,
                policy: self.policy,
                energy_total: t.energy.total(),
                energy_local: t.energy.local,
                energy_uplink: t.energy.uplink,
                energy_remote: t.energy.remote,
                energy_downlink: t.energy.downlink,
                q_local: t.q_local,
                q_remote: t.q_remote,
                q_down: t.q_down,
                x_q: t.x_q,
                x_r: t.x_r,
                beta: d.beta,
                tau_u: d.tau_u,
                tau_d: d.tau_d,
                f_local: d.f_local,
                f_remote: d.f_remote,
                p_uplink: d.p_uplink,
                p_downlink: d.p_downlink,
                proc_bits: t.proc_bits,
            });
        }
    }
}

/// Time averages of one run. Energy is summed over devices; backlog and
/// rate are per device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub policy: PolicyKind,
    pub seed: u64,
    pub config_hash: String,
    pub num_tds: usize,
    pub slots: usize,
    /// System J/s over the whole horizon.
    pub energy: f64,
    /// `energy / N`.
    pub energy_per_td: f64,
    /// bits per device, after each slot's update.
    pub q_total: f64,
    /// bits/s per device.
    pub rate: f64,
    /// Same three averages over slots `>= WARMUP_SLOTS`; zero if none.
    pub post_energy: f64,
    pub post_energy_per_td: f64,
    pub post_q_total: f64,
    pub post_rate: f64,
    pub post_slots: usize,
    /// Device-mean `X^q(T) / T` and `X^r(T) / T`.
    pub x_q_ratio: f64,
    pub x_r_ratio: f64,
    /// Device-mean `X^q(T) + X^r(T)`.
    pub x_backlog: f64,
    pub q_violation: bool,
    pub rate_violation: bool,
    pub post_q_violation: bool,
    pub post_rate_violation: bool,
    pub extraction_flags: usize,
    pub clamp_events: usize,
    pub rate_shortfalls: usize,
}

/// Running sums behind a [`Summary`].
#[derive(Debug, Clone, Default)]
struct Accumulator {
    slots: usize,
    energy: f64,
    q_total: f64,
    bits: f64,
    post_slots: usize,
    post_energy: f64,
    post_q_total: f64,
    post_bits: f64,
    x_q: f64,
    x_r: f64,
    extraction_flags: usize,
    clamp_events: usize,
    rate_shortfalls: usize,
}

impl Accumulator {
    fn push(&mut self, m: &SlotMetrics) {
        let (e, q, b) = (m.energy(), m.q_total(), m.proc_bits());
        self.slots += 1;
        self.energy += e;
        self.q_total += q;
        self.bits += b;
        if m.slot >= WARMUP_SLOTS {
            self.post_slots += 1;
            self.post_energy += e;
            self.post_q_total += q;
            self.post_bits += b;
        }
        self.x_q = m.tds.iter().map(|t| t.x_q).sum();
        self.x_r = m.tds.iter().map(|t| t.x_r).sum();
        self.extraction_flags += m.extraction_flags;
        self.clamp_events += m.clamp_events;
        self.rate_shortfalls += m.rate_shortfalls;
    }

    fn finish(&self, cfg: &SystemConfig, policy: PolicyKind, seed: u64) -> Summary {
        let n = cfg.num_tds as f64;
        let tau = cfg.slot_tau;
        let mean = |sum: f64, count: usize| if count == 0 { 0.0 } else { sum / (count as f64 * n) };
        let energy_per_td = mean(self.energy, self.slots) / tau;
        let q_total = mean(self.q_total, self.slots);
        let rate = mean(self.bits, self.slots) / tau;
        let post_energy_per_td = mean(self.post_energy, self.post_slots) / tau;
        let post_q_total = mean(self.post_q_total, self.post_slots);
        let post_rate = mean(self.post_bits, self.post_slots) / tau;
        let horizon = if self.slots == 0 { 1.0 } else { self.slots as f64 };
        let any = self.slots > 0;
        let post = self.post_slots > 0;
        Summary {
            policy,
            seed,
            config_hash: cfg.hash_hex(),
            num_tds: cfg.num_tds,
            slots: self.slots,
            energy: energy_per_td * n,
            energy_per_td,
            q_total,
            rate,
            post_energy: post_energy_per_td * n,
            post_energy_per_td,
            post_q_total,
            post_rate,
            post_slots: self.post_slots,
            x_q_ratio: self.x_q / n / horizon,
            x_r_ratio: self.x_r / n / horizon,
            x_backlog: (self.x_q + self.x_r) / n,
            q_violation: any && q_total > cfg.q_avg,
            rate_violation: any && rate < cfg.r_avg,
            post_q_violation: post && post_q_total > cfg.q_avg,
            post_rate_violation: post && post_rate < cfg.r_avg,
            extraction_flags: self.extraction_flags,
            clamp_events: self.clamp_events,
            rate_shortfalls: self.rate_shortfalls,
        }
    }
}

/// Runs `cfg.horizon` slots and hands the simulator and every slot's metrics
/// to `observe`. The summary hash covers `cfg` with `seed` applied.
pub fn run_with(
    cfg: &SystemConfig,
    policy: Policy,
    seed: u64,
    bcd: BcdConfig,
    mut observe: impl FnMut(&Simulator, &SlotMetrics),
) -> Result<Summary> {
    let mut cfg = cfg.clone();
    cfg.seed = seed;
    let mut sim = Simulator::new(&cfg, policy, bcd)?;
    let mut acc = Accumulator::default();
    for _ in 0..cfg.horizon {
        let (_, m) = sim.step()?;
        acc.push(&m);
        observe(&sim, &m);
    }
    Ok(acc.finish(&cfg, policy.kind, seed))
}

/// Full run with a per-device trace.
pub fn run(cfg: &SystemConfig, policy: Policy, seed: u64) -> Result<(Trace, Summary)> {
    let mut trace = Trace {
        config_hash: String::new(),
        seed,
        policy: policy.kind,
        rows: Vec::with_capacity(cfg.horizon * cfg.num_tds),
    };
    let summary = run_with(cfg, policy, seed, BcdConfig::default(), |_, m| trace.push_slot(m))?;
    trace.config_hash = summary.config_hash.clone();
    Ok((trace, summary))
}

/// Run that keeps only the summary.
pub fn run_summary(cfg: &SystemConfig, policy: Policy, seed: u64) -> Result<Summary> {
    run_with(cfg, policy, seed, BcdConfig::default(), |_, _| {})
}

/// Parameter sweep: every value x policy x seed offset is one run with seed
/// `cfg.seed + offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    /// One of `V`, `arrival_mean_lambda`, `Q_avg`, `R_avg`, `beta_min`,
    /// `num_tds`, `p_exp`.
    pub param: String,
    pub values: Vec<f64>,
    pub policies: Vec<PolicyKind>,
    #[serde(default = "default_offsets")]
    pub seed_offsets: Vec<u64>,
    /// Overrides the config horizon when set.
    #[serde(default)]
    pub slots: Option<usize>,
}

fn default_offsets() -> Vec<u64> {
    vec![0]
}

impl SweepSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: SweepSpec = toml::from_str(text)?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    /// Named sweeps over the figure axes: `v`, `lambda`, `qavg`, `ravg`,
    /// `beta_min`, `num_tds`, `p_exp`.
    pub fn preset(name: &str) -> Result<Self> {
        use PolicyKind::*;
        let compare = vec![Drmsa, Ns, Nl, Myopic];
        let (param, values, policies) = match name {
            "v" => ("V", vec![1e15, 1e16, 1e17], compare),
            "lambda" => ("arrival_mean_lambda", vec![2e6, 2.5e6, 3e6, 3.5e6], compare),
            // operating point of the queue-length comparison, far below the default Q_avg
            "qavg" => ("Q_avg", vec![3e6, 3.25e6, 3.5e6, 3.75e6, 4e6], compare),
            "ravg" => ("R_avg", vec![2e6, 2.5e6, 3e6, 3.5e6, 4e6], compare),
            "beta_min" => ("beta_min", vec![1.0, 0.8, 0.6, 0.4, 0.3], vec![Drmsa]),
            "num_tds" => ("num_tds", vec![6.0, 8.0, 10.0, 12.0], compare),
            "p_exp" => ("p_exp", vec![0.5, 1.0, 1.5, 2.0], vec![Drmsa]),
            other => return Err(Error::config("sweep", format!("unknown preset `{other}`"))),
        };
        Ok(SweepSpec {
            param: param.to_string(),
            values,
            policies,
            seed_offsets: vec![0],
            slots: None,
        })
    }

    pub fn validate(&self, cfg: &SystemConfig) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::config("values", "sweep needs at least one value"));
        }
        if self.policies.is_empty() {
            return Err(Error::config("policies", "sweep needs at least one policy"));
        }
        if self.seed_offsets.is_empty() {
            return Err(Error::config("seed_offsets", "sweep needs at least one replication"));
        }
        for &v in &self.values {
            cfg.with_param(&self.param, v)?;
        }
        Ok(())
    }

    fn cells(&self) -> Vec<(f64, PolicyKind, u64)> {
        let mut out = Vec::new();
        for &v in &self.values {
            for &p in &self.policies {
                for &o in &self.seed_offsets {
                    out.push((v, p, o));
                }
            }
        }
        out
    }
}

/// One cell of a sweep; failed cells keep their error text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub param: String,
    pub value: f64,
    pub policy: PolicyKind,
    pub seed: u64,
    pub summary: Option<Summary>,
    pub error: Option<String>,
}

/// Runs every cell in parallel; the result is in (value, policy, offset)
/// order regardless of scheduling.
pub fn sweep(spec: &SweepSpec, cfg: &SystemConfig) -> Result<Vec<SweepCell>> {
    spec.validate(cfg)?;
    let cells = spec.cells();
    Ok(cells
        .par_iter()
        .map(|&(value, kind, offset)| {
            let seed = cfg.seed.wrapping_add(offset);
            let result = cfg.with_param(&spec.param, value).and_then(|mut c| {
                if let Some(s) = spec.slots {
                    c.horizon = s;
                }
                run_summary(&c, Policy::new(kind), seed)
            });
            let (summary, error) = match result {
                Ok(s) => (Some(s), None),
                Err(e) => (None, Some(e.to_string())),
            };
            SweepCell {
                param: spec.param.clone(),
                value,
                policy: kind,
                seed,
                summary,
                error,
            }
        })
        .collect())
}

#[derive(Debug, Serialize)]
struct SweepRow<'a> {
    param: &'a str,
    value: f64,
    policy: PolicyKind,
    seed: u64,
    energy: Option<f64>,
    energy_per_td: Option<f64>,
    q_total: Option<f64>,
    rate: Option<f64>,
    post_energy: Option<f64>,
    post_energy_per_td: Option<f64>,
    post_q_total: Option<f64>,
    post_rate: Option<f64>,
    x_q_ratio: Option<f64>,
    x_r_ratio: Option<f64>,
    x_backlog: Option<f64>,
    error: &'a str,
}

fn csv_error(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes the sweep as a long-format CSV, one row per cell.
pub fn write_sweep(cells: &[SweepCell], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(csv_error(path))?;
    for c in cells {
        let s = c.summary.as_ref();
        w.serialize(SweepRow {
            param: &c.param,
            value: c.value,
            policy: c.policy,
            seed: c.seed,
            energy: s.map(|s| s.energy),
            energy_per_td: s.map(|s| s.energy_per_td),
            q_total: s.map(|s| s.q_total),
            rate: s.map(|s| s.rate),
            post_energy: s.map(|s| s.post_energy),
            post_energy_per_td: s.map(|s| s.post_energy_per_td),
            post_q_total: s.map(|s| s.post_q_total),
            post_rate: s.map(|s| s.post_rate),
            x_q_ratio: s.map(|s| s.x_q_ratio),
            x_r_ratio: s.map(|s| s.x_r_ratio),
            x_backlog: s.map(|s| s.x_backlog),
            error: c.error.as_deref().unwrap_or(""),
        })
        .map_err(csv_error(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes `trace.csv` and reads it back.
pub fn write_trace(trace: &Trace, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(csv_error(path))?;
    for row in &trace.rows {
        w.serialize(row).map_err(csv_error(path))?;
    }
    if trace.rows.is_empty() {
        w.write_record(TRACE_HEADER.split(',')).map_err(csv_error(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_trace(path: impl AsRef<Path>) -> Result<Vec<TraceRow>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(csv_error(path))?;
    r.deserialize().collect::<std::result::Result<Vec<TraceRow>, _>>().map_err(csv_error(path))
}

/// Paths written by [`write_outputs`].
#[derive(Debug, Clone, PartialEq)]
pub struct OutputPaths {
    pub trace: PathBuf,
    pub summary: PathBuf,
    pub config: PathBuf,
}

/// Writes `trace.csv`, `summary.json` and `config.toml` into `out_dir`.
pub fn write_outputs(trace: &Trace, summary: &Summary, cfg: &SystemConfig, out_dir: impl AsRef<Path>) -> Result<OutputPaths> {
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let paths = OutputPaths {
        trace: dir.join("trace.csv"),
        summary: dir.join("summary.json"),
        config: dir.join("config.toml"),
    };
    write_trace(trace, &paths.trace)?;

    let file = File::create(&paths.summary).map_err(|e| Error::io(&paths.summary, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, summary)?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| Error::io(&paths.summary, e))?;

    fs::write(&paths.config, cfg.to_toml_string()).map_err(|e| Error::io(&paths.config, e))?;
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SystemConfig {
        let mut cfg = SystemConfig::default();
        cfg.num_tds = 3;
        cfg.horizon = 40;
        cfg
    }

    #[test]
    fn zero_horizon_gives_empty_trace_and_zero_summary() {
        let mut cfg = small();
        cfg.horizon = 0;
        let (trace, s) = run(&cfg, Policy::new(PolicyKind::Drmsa), 1).unwrap();
        assert!(trace.rows.is_empty());
        assert_eq!((s.energy, s.q_total, s.rate, s.x_q_ratio, s.x_backlog), (0.0, 0.0, 0.0, 0.0, 0.0));
        assert!(!s.q_violation && !s.rate_violation);
    }

    #[test]
    fn trace_has_one_row_per_device_and_slot() {
        let cfg = small();
        let (trace, s) = run(&cfg, Policy::new(PolicyKind::Drmsa), 1).unwrap();
        assert_eq!(trace.rows.len(), 40 * 3);
        assert_eq!(s.slots, 40);
        assert!(trace.rows.iter().all(|r| r.energy_total.is_finite() && r.q_local.is_finite()));
        assert_eq!(trace.rows[4].slot, 1);
        assert_eq!(trace.rows[4].td, 1);
    }

    #[test]
    fn preset_names_resolve() {
        for p in ["v", "lambda", "qavg", "ravg", "beta_min", "num_tds", "p_exp"] {
            SweepSpec::preset(p).unwrap().validate(&SystemConfig::default()).unwrap();
        }
        assert!(SweepSpec::preset("fig99").is_err());
    }

    #[test]
    fn sweep_spec_rejects_bad_values() {
        let cfg = SystemConfig::default();
        let spec = SweepSpec {
            param: "beta_min".into(),
            values: vec![-0.5],
            policies: vec![PolicyKind::Drmsa],
            seed_offsets: vec![0],
            slots: None,
        };
        assert!(spec.validate(&cfg).is_err());
        let spec = SweepSpec { values: vec![], ..spec };
        assert!(spec.validate(&cfg).is_err());
    }
}
