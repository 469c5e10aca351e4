//! Command-line driver for `baryiter-core`: the reference sidecar, trace
//! documents, golden tables and argument handling.

pub mod cli;
pub mod references;
pub mod report;
pub mod tables;
