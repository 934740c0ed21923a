use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use semantic_mec::baselines::{Policy, PolicyKind};
use semantic_mec::harness::{self, SweepSpec};
use semantic_mec::verify;
use semantic_mec::{load_config, Result, SystemConfig};

/// Semantic-aware MEC resource allocation simulator.
#[derive(Parser)]
#[command(name = "mec-sim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one policy and write trace.csv, summary.json and config.toml.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "drmsa")]
        algo: PolicyKind,
        /// Restarts per slot for `exh`.
        #[arg(long, default_value_t = 50)]
        restarts: usize,
    },
    /// Run a parameter sweep and write sweep.csv.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Sweep spec (TOML) or a preset name: v, lambda, qavg, ravg, beta_min, num_tds, p_exp.
        #[arg(long)]
        sweep: String,
    },
    /// Check every per-slot solver against its brute-force oracle.
    Verify {
        #[arg(long, default_value_t = verify::DEFAULT_INSTANCES)]
        instances: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args)]
struct Common {
    /// TOML config; missing keys take the reference defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config horizon.
    #[arg(long)]
    slots: Option<usize>,
}

impl Common {
    fn config(&self) -> Result<SystemConfig> {
        let mut cfg = match &self.config {
            Some(p) => load_config(p)?,
            None => SystemConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(t) = self.slots {
            cfg.horizon = t;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { common, algo, restarts } => {
            let cfg = common.config()?;
            let policy = Policy { kind: algo, exh_restarts: restarts };
            let (trace, summary) = harness::run(&cfg, policy, cfg.seed)?;
            let paths = harness::write_outputs(&trace, &summary, &cfg, &common.out)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
            eprintln!("wrote {}", paths.trace.display());
            Ok(true)
        }
        Command::Sweep { common, sweep } => {
            let cfg = common.config()?;
            let mut spec = if std::path::Path::new(&sweep).exists() {
                SweepSpec::load(&sweep)?
            } else {
                SweepSpec::preset(&sweep)?
            };
            if common.slots.is_some() {
                spec.slots = common.slots;
            }
            let cells = harness::sweep(&spec, &cfg)?;
            std::fs::create_dir_all(&common.out).map_err(|e| semantic_mec::Error::Io { path: common.out.clone(), source: e })?;
            let path = common.out.join("sweep.csv");
            harness::write_sweep(&cells, &path)?;
            println!("{:>12} {:>7} {:>5} {:>10} {:>12} {:>12} {:>12}", spec.param, "policy", "seed", "E (J/s)", "Q (bits)", "rate (b/s)", "x_q+x_r");
            for c in &cells {
                match &c.summary {
                    Some(s) => {
                        // short runs never leave the warm-up window
                        let (e, q, r) = if s.post_slots > 0 {
                            (s.post_energy, s.post_q_total, s.post_rate)
                        } else {
                            (s.energy, s.q_total, s.rate)
                        };
                        println!(
                            "{:>12.4e} {:>7} {:>5} {:>10.4} {:>12.4e} {:>12.4e} {:>12.4e}",
                            c.value, c.policy, c.seed, e, q, r, s.x_backlog
                        )
                    }
                    None => println!("{:>12.4e} {:>7} {:>5} error: {}", c.value, c.policy, c.seed, c.error.as_deref().unwrap_or("")),
                }
            }
            eprintln!("wrote {}", path.display());
            Ok(cells.iter().all(|c| c.error.is_none()))
        }
        Command::Verify { instances, seed } => {
            let reports = verify::run_all(instances, seed)?;
            for r in &reports {
                println!("{r}");
            }
            Ok(reports.iter().all(|r| r.passed()))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
