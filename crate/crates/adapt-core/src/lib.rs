//! Core engine for fuzzy feedforward-feedback adaptation.
//!
//! The crate models monitored quantities, non-functional requirements and
//! task configurations as linguistic variables, connects them through typed
//! rule bases (`UPD`, `ENA`, `COR`) and runs a two-loop controller on top:
//! a fuzzy feedforward pass that derives desired satisfaction degrees and
//! task configurations from the monitored context, and a crisp feedback pass
//! that readapts configurations with a bounded downhill-simplex search when
//! the weighted satisfaction deviation drops below a threshold.
//!
//! The crate is `no_std`-compatible (with `alloc`); disable the default
//! `std` feature and enable `libm` to use it without the standard library.
//! All operations are pure and deterministic: identical inputs produce
//! bit-identical outputs, which the simulation layer relies on for
//! reproducible traces.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("adapt-core needs either the `std` feature or the `libm` feature");

pub mod controller;
pub mod fuzzy;
pub mod inference;
mod math;
pub mod model;
pub mod numfmt;
pub mod optim;
pub mod rulebase;
pub mod sim;
#[cfg(test)]
pub(crate) mod testutil;
