//! Benchmark harness: file formats, image metrics, reports and the commands
//! of the `tnnr-bench` binary.

pub mod cli;
pub mod error;
pub mod io;
pub mod metrics;
pub mod report;
pub mod texture;

pub use error::BenchError;
