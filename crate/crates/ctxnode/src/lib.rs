//! File formats, run configuration, hindcast drivers and the command line
//! for the `ctxnode` energy-management controller.
//!
//! The algorithms live in [`ctxnode_core`]. This crate adds:
//!
//! - [`config`]: the JSON run configuration and its validation.
//! - [`timeseries`]: CSV and NASA POWER ingestion, resampled to the window
//!   grid.
//! - [`ocv`]: OCV table files.
//! - [`trace`]: trace, summary and VoI-curve CSV output.
//! - [`run`]: simulate, baseline and sweep drivers.
//! - [`cli`]: the `ctxnode` command.

pub mod cli;
pub mod config;
mod error;
pub mod ocv;
pub mod run;
pub mod timeseries;
pub mod trace;

pub use ctxnode_core as core;
pub use error::{Error, Result};
