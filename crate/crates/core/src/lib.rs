//! Simulation and numerical verification of an identification protocol
//! whose public key is a set of single-qubit phase states.
//!
//! - [`qla`]: dense complex linear algebra, POVMs and density operators
//! - [`protocol`]: key generation, public-key copies and the verification run
//! - [`adversary`]: black-box extraction and individual-attack strategies
//! - [`bounds`]: analytic break-probability bounds
//! - [`oracle`]: independent numerical checks of the attack analysis
//! - [`suite`]: the verification checks bundled for reporting

pub mod adversary;
pub mod bounds;
pub mod montecarlo;
pub mod oracle;
pub mod protocol;
pub mod qla;
pub mod rng;
pub mod suite;
