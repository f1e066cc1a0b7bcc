//! IO, configuration, pipeline composition, and the latency benchmark for
//! the `seqvpr` command-line tool. The algorithms live in `seqvpr-core`;
//! this crate owns everything that touches files, JSON, and the clock.

pub mod bench;
pub mod config;
pub mod errors;
pub mod io;
pub mod pipeline;
pub mod report;

pub use errors::CliError;
