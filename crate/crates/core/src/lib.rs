//! Online resource allocation for semantic-aware multi-user mobile edge
//! computing.
//!
//! Each slot, terminal devices choose local CPU speed, uplink rate,
//! extraction factor and an uplink/downlink time split, while the edge
//! server splits its CPU and downlink power. The controller minimizes a
//! drift-plus-penalty bound built from the physical queues and two virtual
//! queues, trading energy (weighted by `V`) against backlog.
//!
//! * [`model`]: channel, rate, power, semantic and energy formulas.
//! * [`queueing`]: per-device queue dynamics and the extraction-factor ledger.
//! * [`solvers`]: closed-form per-slot subproblem solvers.
//! * [`scheduler`]: block coordinate descent per slot and the simulator loop.
//! * [`baselines`]: comparison policies.
//! * [`oracle`]: brute-force checkers used by the tests and `verify`.
//! * [`harness`]: runs, sweeps and CSV output.

pub mod baselines;
pub mod config;
pub mod error;
pub mod harness;
pub mod model;
pub mod oracle;
pub mod queueing;
pub mod scheduler;
pub mod solvers;
pub mod verify;

pub use config::{load_config, SystemConfig};
pub use error::{Error, Result};
