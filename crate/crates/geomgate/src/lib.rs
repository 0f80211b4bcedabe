//! Command-line driver, file formats and parallel scans for `geomgate-core`.

pub mod cli;
pub mod config;
pub mod io;
pub mod scan;
pub mod verify;
