//! Conditional independence testing for categorical data: delimited file
//! input and output, synthetic data, parallel batch screening, timing
//! benchmarks and the `catci` command line.
//!
//! The statistics themselves live in [`catci_core`], re-exported here as
//! [`core`].

pub use catci_core as core;

pub mod batch;
pub mod bench;
pub mod cli;
pub mod io;
pub mod report;
