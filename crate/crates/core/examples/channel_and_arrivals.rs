//! Mean path-loss gains, Rician draws around them, and the simulator's own
//! per-slot observations.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use semantic_mec::baselines::{Policy, PolicyKind};
use semantic_mec::model::{path_loss_gain, sample_channel};
use semantic_mec::scheduler::{BcdConfig, Simulator};
use semantic_mec::SystemConfig;

fn main() -> semantic_mec::Result<()> {
    let cfg = SystemConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for d in [120.0, 180.0, 255.0] {
        let mean = path_loss_gain(d, &cfg)?;
        let draws: Vec<f64> = (0..10_000).map(|_| sample_channel(mean, cfg.rician_gamma, &mut rng)).collect::<Result<_, _>>()?;
        let avg = draws.iter().sum::<f64>() / draws.len() as f64;
        println!("{d:>5} m: mean gain {mean:.3e}, sample mean {avg:.3e}");
    }

    let mut sim = Simulator::new(&cfg, Policy::new(PolicyKind::Drmsa), BcdConfig::default())?;
    for _ in 0..3 {
        let obs = sim.observe()?;
        let show = |v: &[f64]| v.iter().take(3).map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(" ");
        println!("gains {}  arrivals {}", show(&obs.gains), show(&obs.arrivals));
        let plan = sim.plan(&obs)?;
        sim.apply(&obs, &plan)?;
    }
    Ok(())
}
