//! The V preset over three seeds, shortened, written as sweep CSV.

use semantic_mec::harness::{sweep, write_sweep, SweepSpec};
use semantic_mec::SystemConfig;

fn main() -> semantic_mec::Result<()> {
    let cfg = SystemConfig::default();
    let mut spec = SweepSpec::preset("v")?;
    spec.policies.truncate(1);
    spec.seed_offsets = vec![0, 1, 2];
    spec.slots = Some(4000);
    let cells = sweep(&spec, &cfg)?;
    for c in &cells {
        if let Some(s) = &c.summary {
            println!("V {:.0e} seed {}: E {:.3} J/s, x_q+x_r {:.3e}", c.value, c.seed, s.post_energy, s.x_backlog);
        }
    }
    let path = std::env::temp_dir().join("sweep_v.csv");
    write_sweep(&cells, &path)?;
    println!("wrote {}", path.display());
    Ok(())
}
