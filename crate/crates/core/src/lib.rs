//! Context-aware energy management for energy-harvesting sensor nodes.
//!
//! A node chooses, for every decision window, how often to sample and how
//! often to transmit. The choice trades the Value of Information of the data
//! it produces against the State of Energy left in its battery. This crate
//! holds the pure algorithmic core:
//!
//! - [`voi`]: threat rating, process fidelity, cost of update delay and the
//!   combined, context-weighted Value of Information.
//! - [`energy`]: Coulomb-counting battery model, OCV curve, consumption
//!   profile, solar harvest and State of Energy.
//! - [`mpc`]: the discounted finite-horizon program, its constraint set, a
//!   projected-gradient solver and an exhaustive grid oracle.
//! - [`sim`]: receding-horizon hindcasts, static duty-cycle baselines and
//!   trace statistics.
//! - [`scenario`]: the canonical synthetic flood / irradiance dataset.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, configuration
//! and the command line live in the `ctxnode` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod energy;
mod error;
pub(crate) mod math;
pub mod mpc;
pub mod scenario;
pub mod sim;
pub mod voi;

pub use energy::{BatteryModel, EnergyProfile, HarvestModel, OcvCurve, SocState, SocTransition};
pub use error::{Error, Result};
pub use mpc::{Beliefs, Decision, MpcConfig, NodeModel, Plan, SolverOptions, Weights};
pub use sim::{Dataset, NodeState, SimOptions, TraceRecord, TraceSummary};
pub use voi::{VoiBreakdown, VoiParams};

/// Seconds per hour. Frequencies are per hour, durations in seconds.
pub const SECONDS_PER_HOUR: f64 = 3600.0;
