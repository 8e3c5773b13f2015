//! Desk-scale simulator of a fault-tolerant verifiable blind quantum
//! computing protocol built from three pieces: a remote logical-state
//! preparation gadget driven by X/Z measurements on Bell-pair halves, a CSS
//! code layer with purely classical error correction, and a trap-based
//! delegated-computation run with accept/reject verification.
//!
//! The crate is organized to mirror the protocol:
//!
//! - [`qsim`] — dense statevector/density-matrix substrate (≤ 16 qubits);
//! - [`css`] — CSS codes, transversal measurement, classical decoding, and
//!   the remote-preparation loop at the physical level;
//! - [`gadget`] — the five-qubit preparation gadget with its postselection
//!   rule and the analytic state table it must reproduce;
//! - [`fkproto`] — graph states, measurement patterns, trap verification and
//!   the composed protocol;
//! - [`adversary`] — deviation and noise models plugged into every stage;
//! - [`harness`] — seeded Monte Carlo experiments, statistics, transcripts.

pub mod adversary;
pub mod css;
pub mod error;
pub mod fkproto;
pub mod gadget;
pub mod harness;
pub mod qsim;
pub mod rng;

pub use error::{Error, Result};
pub use rng::RandomStream;
