//! Seeded Monte Carlo experiments: acceptance estimation, verifiability
//! bounds against combinatorial oracles, blindness audits, teleportation
//! equivalence, loss overhead, and transcript persistence.

pub mod config;
pub mod experiments;
pub mod instances;
pub mod stats;
pub mod transcript;

pub use config::{AdversarySpec, CodeChoice, ExperimentKind, RunConfig};
pub use experiments::*;
pub use stats::{Estimate, TrialStats};
