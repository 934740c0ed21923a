//! A full run written to disk: trace.csv, summary.json and config.toml.

use semantic_mec::baselines::{Policy, PolicyKind};
use semantic_mec::harness::{read_trace, run, write_outputs};
use semantic_mec::SystemConfig;

fn main() -> semantic_mec::Result<()> {
    let mut cfg = SystemConfig::default();
    cfg.horizon = 3000;
    let (trace, summary) = run(&cfg, Policy::new(PolicyKind::Drmsa), cfg.seed)?;
    let dir = std::env::temp_dir().join("mec-sim-example");
    let paths = write_outputs(&trace, &summary, &cfg, &dir)?;
    println!("{} rows in {}", read_trace(&paths.trace)?.len(), paths.trace.display());
    println!(
        "energy {:.3} J/s (post warm-up {:.3}), backlog {:.3e} bits, rate {:.3e} bits/s",
        summary.energy, summary.post_energy, summary.q_total, summary.rate
    );
    Ok(())
}
