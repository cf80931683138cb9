//! Scenario loading, file export and command implementations for the
//! `adaptctl` binary. Everything here is a thin std layer over `adapt-core`:
//! the scenario JSON and rule files are parsed into core model types, the
//! commands wire them into the controller and simulator, and the export
//! module writes the byte-deterministic trace, summary and plot artifacts.

pub mod commands;
pub mod export;
pub mod plot;
pub mod scenario;

pub use scenario::{Scenario, ScenarioError};
