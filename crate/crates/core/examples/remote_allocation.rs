//! The server CPU split on its own: devices with heavier queue weights get
//! more cycles, and the total never exceeds the server budget.

use semantic_mec::queueing::TdState;
use semantic_mec::scheduler::{compute_weights, remote_ratios};
use semantic_mec::solvers::solve_remote_allocation;
use semantic_mec::SystemConfig;

fn main() -> semantic_mec::Result<()> {
    let mut cfg = SystemConfig::default();
    cfg.num_tds = 4;
    cfg.distances = vec![150.0; 4];
    // small enough to bind
    cfg.f_mec = 2e8;
    cfg.validate()?;
    let states: Vec<TdState> = [1e6, 5e6, 2e7, 8e7]
        .iter()
        .map(|&q| TdState { q_remote: q, x_q: 1e8, ..Default::default() })
        .collect();
    let weights: Vec<_> = states.iter().enumerate().map(|(n, s)| compute_weights(s, 1e-11, n, &cfg)).collect();
    let (g, h) = remote_ratios(&[0.5; 4], &cfg)?;
    let q: Vec<f64> = states.iter().map(|s| s.q_remote).collect();
    let sol = solve_remote_allocation(&weights, &q, &g, &h, &cfg)?;
    for (s, f) in states.iter().zip(&sol.f_remote) {
        println!("Q^O {:.1e} bits -> f {:.3e} Hz", s.q_remote, f);
    }
    println!("sum {:.3e} of {:.3e}, multiplier {:.3e}", sol.f_remote.iter().sum::<f64>(), cfg.f_mec, sol.nu);
    Ok(())
}
