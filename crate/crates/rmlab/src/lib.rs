//! Experiment front end for rmlab-core: spec files, CSV reports, a
//! deterministic parallel driver, and the subcommand implementations.

pub mod commands;
pub mod driver;
pub mod report;
pub mod selftest;
pub mod specio;
