//! Simulation and feasibility analysis for small spherical rocket-hopping
//! robots: rocket performance, 6-DOF ballistic-hop dynamics under
//! reaction-wheel PD control, potential-field navigation with stereo
//! camera sensing, and relay-chain mission sizing for cave surveys.
//!
//! Everything is deterministic: the same inputs (and seeds) produce the
//! same outputs bit for bit. Grid evaluations and multi-start planner
//! sweeps run data-parallel when the default `parallel` feature is
//! enabled; `*_serial` variants and the non-parallel build produce
//! identical numbers.

pub mod constants;
pub mod dynamics;
pub mod error;
pub mod mission;
pub mod navigation;
pub mod propulsion;

pub use error::{Error, Result};
