//! Simulation and analysis of quantum bit commitment with reverse quantum
//! communication: the acceptor (Bob) prepares and sends BB84 photons, the
//! committer (Alice) measures them and binds her bit with a classical
//! exclusion announcement.
//!
//! - [`quantum`]: dense state vectors, density matrices and ensemble steering.
//! - [`protocol`]: the commit/unveil state machine and Bob's verification.
//! - [`strategies`]: honest and adversarial parties, including the
//!   entanglement steering attack.
//! - [`harness`]: seeded experiments, exact enumeration oracles and reports.

pub mod harness;
pub mod protocol;
pub mod quantum;
pub mod strategies;
