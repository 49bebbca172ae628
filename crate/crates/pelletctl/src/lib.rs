//! Closed-loop simulation and verification of a spiking (integrate-and-fire)
//! pellet-injection controller for plasma density regulation.
//!
//! The plant is a first-order density model that decays exponentially between
//! pellets; each pellet raises the density by a fixed increment `alpha`. The
//! controller accumulates the positive part of the density error in a neuron
//! potential `xi` and fires a pellet at the next launch slot (period `t_c`)
//! once `xi` reaches the threshold `delta`.
//!
//! The crate is organised as:
//! - [`params`]: parameter validation and the admissibility bounds on `t_c`
//!   and `delta` (contraction ratio, maximum inter-pellet dwell time);
//! - [`flow`]: exact closed-form propagation of the state between slots;
//! - [`controller`]: the skip/pellet decision and jump maps at a slot;
//! - [`simulator`]: event-driven closed-loop simulation producing hybrid-time
//!   indexed trajectories;
//! - [`verifier`]: quantified pass/fail checks of the practical-stability
//!   guarantees (envelope, dwell time, contraction, ultimate bound);
//! - [`oracle`]: independent fixed-step RK4/Euler integration used to
//!   cross-validate the analytic engine;
//! - [`scenario`] and [`io`]: config parsing and CSV/report emission for the
//!   `pelletctl` CLI.

pub mod controller;
pub mod flow;
pub mod io;
pub mod oracle;
pub mod params;
pub mod scenario;
pub mod simulator;
pub mod verifier;

pub use controller::{JumpEvent, JumpKind, TieBreak};
pub use flow::HybridState;
pub use params::{DerivedConstants, SystemParams, ValidatedParams};
pub use simulator::{simulate, SimOptions, Trajectory};
pub use verifier::{BoundEnvelope, CheckResult, VerificationReport};
