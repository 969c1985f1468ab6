//! Experiment runner behind the `awva` binary.
//!
//! Every command reads a [`RunConfig`], writes one or more CSV tables with a
//! commented provenance header into the output directory, and finishes with a
//! JSON summary. Randomness derives from the master seed through labelled
//! [`awva_core::RandomStream`]s, so results do not depend on worker count.

pub mod commands;
pub mod config;
mod error;
pub mod output;

pub use commands::{
    adaptive, fisher_surface, shift_surface, sweep_n, RunOptions, SweepRow, TrialOutcome,
};
pub use config::{GridSpec, RunConfig};
pub use error::CliError;
