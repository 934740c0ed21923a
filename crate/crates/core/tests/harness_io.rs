use approx::assert_relative_eq;
use sha2::{Digest, Sha256};

use semantic_mec::baselines::{Policy, PolicyKind};
use semantic_mec::config::PerTd;
use semantic_mec::harness::{self, read_trace, write_outputs, SweepSpec, Summary, TRACE_HEADER};
use semantic_mec::{load_config, SystemConfig};

fn short(slots: usize) -> SystemConfig {
    let mut cfg = SystemConfig::default();
    cfg.horizon = slots;
    cfg.seed = 21;
    cfg
}

#[test]
fn outputs_round_trip() {
    let cfg = short(150);
    let (trace, summary) = harness::run(&cfg, Policy::new(PolicyKind::Drmsa), cfg.seed).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let paths = write_outputs(&trace, &summary, &cfg, dir.path()).unwrap();

    let text = std::fs::read_to_string(&paths.trace).unwrap();
    assert_eq!(text.lines().next().unwrap(), TRACE_HEADER);
    assert_eq!(text.lines().count(), 1 + cfg.horizon * cfg.num_tds);
    let rows = read_trace(&paths.trace).unwrap();
    assert_eq!(rows, trace.rows);

    let back: Summary = serde_json::from_str(&std::fs::read_to_string(&paths.summary).unwrap()).unwrap();
    assert_eq!(back, summary);

    let reloaded = load_config(&paths.config).unwrap();
    assert_eq!(reloaded, cfg);
    assert_eq!(reloaded.hash_hex(), summary.config_hash);
    let independent = hex::encode(Sha256::digest(serde_json::to_vec(&cfg).unwrap()));
    assert_eq!(summary.config_hash, independent);
    assert_eq!(trace.config_hash, summary.config_hash);
}

#[test]
fn ns_summary_hashes_the_config_it_was_given() {
    let cfg = short(20);
    let (_, summary) = harness::run(&cfg, Policy::new(PolicyKind::Ns), cfg.seed).unwrap();
    assert_eq!(summary.config_hash, cfg.hash_hex());
}

#[test]
fn empty_trace_still_has_a_header() {
    let cfg = short(0);
    let (trace, summary) = harness::run(&cfg, Policy::new(PolicyKind::Drmsa), 1).unwrap();
    assert!(trace.rows.is_empty());
    let dir = tempfile::tempdir().unwrap();
    let paths = write_outputs(&trace, &summary, &cfg, dir.path()).unwrap();
    assert_eq!(std::fs::read_to_string(&paths.trace).unwrap().trim_end(), TRACE_HEADER);
    assert!(read_trace(&paths.trace).unwrap().is_empty());
}

#[test]
fn same_seed_same_trace() {
    let cfg = short(120);
    for kind in [PolicyKind::Drmsa, PolicyKind::Myopic] {
        let a = harness::run(&cfg, Policy::new(kind), 4).unwrap();
        let b = harness::run(&cfg, Policy::new(kind), 4).unwrap();
        assert_eq!(a, b);
    }
    let c = harness::run(&cfg, Policy::new(PolicyKind::Drmsa), 5).unwrap();
    let a = harness::run(&cfg, Policy::new(PolicyKind::Drmsa), 4).unwrap();
    assert_ne!(a.0.rows, c.0.rows);
}

#[test]
fn summary_agrees_with_trace_rows() {
    let mut cfg = short(harness::WARMUP_SLOTS + 200);
    cfg.num_tds = 3;
    cfg.distances.clear();
    let (trace, s) = harness::run(&cfg, Policy::new(PolicyKind::Drmsa), 8).unwrap();
    let n = cfg.num_tds as f64;
    let tau = cfg.slot_tau;
    let stats = |from: usize| {
        let rows: Vec<_> = trace.rows.iter().filter(|r| r.slot >= from).collect();
        let slots = rows.len() as f64 / n;
        let e: f64 = rows.iter().map(|r| r.energy_total).sum();
        let q: f64 = rows.iter().map(|r| r.q_local + r.q_remote + r.q_down).sum();
        let b: f64 = rows.iter().map(|r| r.proc_bits).sum();
        (e / slots / tau, q / slots / n, b / slots / n / tau, slots as usize)
    };
    let (e, q, r, slots) = stats(0);
    assert_eq!(slots, s.slots);
    assert_relative_eq!(s.energy, e, max_relative = 1e-12);
    assert_relative_eq!(s.energy_per_td * n, e, max_relative = 1e-12);
    assert_relative_eq!(s.q_total, q, max_relative = 1e-12);
    assert_relative_eq!(s.rate, r, max_relative = 1e-12);
    let (e, q, r, slots) = stats(harness::WARMUP_SLOTS);
    assert_eq!(slots, s.post_slots);
    assert_eq!(slots, 200);
    assert_relative_eq!(s.post_energy, e, max_relative = 1e-12);
    assert_relative_eq!(s.post_q_total, q, max_relative = 1e-12);
    assert_relative_eq!(s.post_rate, r, max_relative = 1e-12);

    let last: Vec<_> = trace.rows.iter().filter(|r| r.slot == cfg.horizon - 1).collect();
    let x_q: f64 = last.iter().map(|r| r.x_q).sum();
    let x_r: f64 = last.iter().map(|r| r.x_r).sum();
    assert_relative_eq!(s.x_backlog, (x_q + x_r) / n, max_relative = 1e-12);
    assert_relative_eq!(s.x_q_ratio, x_q / n / cfg.horizon as f64, max_relative = 1e-12);
}

#[test]
fn no_arrivals_cost_nothing() {
    let mut cfg = short(1000);
    cfg.arrival_mean_lambda = PerTd::Uniform(0.0);
    for kind in [PolicyKind::Drmsa, PolicyKind::Ns, PolicyKind::Nl, PolicyKind::Exh] {
        let s = harness::run_summary(&cfg, Policy { kind, exh_restarts: 3 }, 2).unwrap();
        assert!(s.energy <= 1e-9, "{kind:?}: {}", s.energy);
        assert_eq!(s.q_total, 0.0);
        assert_eq!(s.rate, 0.0);
    }
}

#[test]
fn myopic_device_spend_ignores_arrivals() {
    // only the server side sees the queues, through the extraction factors it holds
    let busy = short(300);
    let mut idle = busy.clone();
    idle.arrival_mean_lambda = PerTd::Uniform(0.0);
    let (a, _) = harness::run(&busy, Policy::new(PolicyKind::Myopic), 2).unwrap();
    let (b, _) = harness::run(&idle, Policy::new(PolicyKind::Myopic), 2).unwrap();
    for (x, y) in a.rows.iter().zip(&b.rows) {
        assert!(y.energy_local + y.energy_uplink > 0.0);
        assert_eq!((x.energy_local, x.energy_uplink, x.beta, x.tau_u), (y.energy_local, y.energy_uplink, y.beta, y.tau_u));
    }
}

#[test]
fn sweep_writes_one_row_per_cell() {
    let cfg = short(40);
    let spec = SweepSpec::from_toml_str(
        r#"
        param = "V"
        values = [1e15, 1e17]
        policies = ["drmsa", "ns"]
        seed_offsets = [0, 1, 2]
        "#,
    )
    .unwrap();
    let cells = harness::sweep(&spec, &cfg).unwrap();
    assert_eq!(cells.len(), 12);
    assert!(cells.iter().all(|c| c.error.is_none()));
    assert_eq!(cells[0].seed, cfg.seed);
    assert_eq!(cells[2].seed, cfg.seed + 2);
    let again = harness::run_summary(&cfg.with_param("V", 1e17).unwrap(), Policy::new(PolicyKind::Ns), cfg.seed + 1).unwrap();
    let cell = cells.iter().find(|c| c.value == 1e17 && c.policy == PolicyKind::Ns && c.seed == cfg.seed + 1).unwrap();
    assert_eq!(cell.summary.as_ref(), Some(&again));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    harness::write_sweep(&cells, &path).unwrap();
    let mut r = csv::Reader::from_path(&path).unwrap();
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(&header[..5], ["param", "value", "policy", "seed", "energy"]);
    assert!(header.iter().any(|h| h == "post_energy"));
    assert_eq!(r.records().count(), 12);
}

#[test]
fn bad_sweep_parameter_is_rejected() {
    let spec = SweepSpec::from_toml_str("param = \"bandwidth\"\nvalues = [1.0]\npolicies = [\"drmsa\"]\n").unwrap();
    assert!(harness::sweep(&spec, &short(5)).is_err());
    assert!(SweepSpec::preset("nope").is_err());
}
