//! Every policy on the same seed and horizon.

use semantic_mec::baselines::{Policy, PolicyKind};
use semantic_mec::harness::run_summary;
use semantic_mec::SystemConfig;

fn main() -> semantic_mec::Result<()> {
    let mut cfg = SystemConfig::default();
    cfg.horizon = 4000;
    println!("{:>7} {:>10} {:>12} {:>12} {:>10}", "policy", "E (J/s)", "Q (bits)", "rate", "x_q/T");
    for kind in PolicyKind::ALL {
        let policy = Policy { kind, exh_restarts: 10 };
        let s = run_summary(&cfg, policy, cfg.seed)?;
        println!(
            "{:>7} {:>10.4} {:>12.4e} {:>12.4e} {:>10.3e}",
            kind, s.post_energy, s.post_q_total, s.post_rate, s.x_q_ratio
        );
    }
    Ok(())
}
