//! One slot of the controller by hand: observe, plan, inspect, apply.

use semantic_mec::baselines::{Policy, PolicyKind};
use semantic_mec::scheduler::{BcdConfig, Simulator};
use semantic_mec::SystemConfig;

fn main() -> semantic_mec::Result<()> {
    let mut cfg = SystemConfig::default();
    cfg.num_tds = 3;
    cfg.distances = vec![130.0, 190.0, 250.0];
    let mut sim = Simulator::new(&cfg, Policy::new(PolicyKind::Drmsa), BcdConfig::default())?;

    // a few slots so the buffers hold something
    for _ in 0..20 {
        sim.step()?;
    }
    let obs = sim.observe()?;
    let plan = sim.plan(&obs)?;
    let trace: Vec<String> = plan.objective_trace.iter().map(|j| format!("{j:.6e}")).collect();
    println!("{} rounds, objective {}", plan.rounds, trace.join(" -> "));
    for (n, (d, w)) in plan.decision.tds.iter().zip(&plan.weights).enumerate() {
        println!(
            "td {n}: beta {:.3} tau_u {:.3} tau_d {:.3} f_L {:.3e} p_U {:.3} p_D {:.3} f_M {:.3e} | w1 {:.2e} w2 {:.2e}",
            d.beta, d.tau_u, d.tau_d, d.f_local, d.p_uplink, d.p_downlink, d.f_remote, w.w1, w.w2
        );
    }
    plan.decision.check_feasible(sim.config(), &obs.gains)?;
    let m = sim.apply(&obs, &plan)?;
    println!("slot {} energy {:.4} J, backlog {:.3e} bits", m.slot, m.energy(), m.q_total());
    Ok(())
}
