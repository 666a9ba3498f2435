//! Agent-based simulator of protected-urea adoption across a heterogeneous
//! dairy-farm population on a small-world social network.
//!
//! Farms are agents whose yearly switch from calcium ammonium nitrate to
//! protected urea is driven by peer influence, structural scale effects, and
//! policy shifts (carbon tax or subsidy). The crate layers emissions
//! accounting, policy cash flows, abatement economics, calibration against
//! observed adoption, and Monte Carlo uncertainty analysis on top of that
//! state machine, and ships a thin CLI plus runnable examples for each major
//! capability.
//!
//! The `examples/` directory is the quickest way in:
//!
//! ```bash
//! cargo run --release --example policy_comparison   # scenario timing + abatement
//! cargo run --release --example calibrate_omega     # back-testing + network value
//! cargo run --release --example full_study          # everything, with artifacts
//! ```
//!
//! See the README for the full example list, the CLI surface, and the
//! configuration dictionary.

pub mod calibrate;
pub mod config;
pub mod dynamics;
pub mod economics;
pub mod emissions;
pub mod error;
pub mod montecarlo;
pub mod network;
pub mod pipeline;
pub mod policy;
pub mod population;
pub mod seed;
pub mod stats;

pub use error::{Error, Result};
