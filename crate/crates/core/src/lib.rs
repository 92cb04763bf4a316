//! Uhlmann holonomy invariants along paths of density operators, their
//! off-diagonal generalizations `X^(l)`, and nodal-point diagnosis.
//!
//! The numerical pipeline runs bottom-up: [`linalg`] primitives, [`state`]
//! amplitudes and gauges, unitary paths in [`evolution`], discrete parallel
//! transport in [`transport`], and the invariants and phase functional in
//! [`offdiag`]. [`compare`] sets the interferometric phase beside the
//! holonomy, and [`scenarios`] holds the two-qubit Bell-state spin-flip
//! example with its closed forms. [`scenario_file`], [`report`] and [`cli`]
//! form the batch front end, and [`verify`] is the seeded property suite.

pub mod cli;
pub mod compare;
pub mod error;
pub mod evolution;
pub mod linalg;
pub mod offdiag;
pub mod random;
pub mod report;
pub mod scenario_file;
pub mod scenarios;
pub mod state;
pub mod transport;
pub mod verify;

pub use error::{Error, Result};
