//! Pulse-level simulation of nonadiabatic geometric gates on two-level
//! Rydberg atoms.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of its inputs; file formats, the CLI and parallel scan drivers
//! live in the `geomgate` crate.
//!
//! Conventions used throughout:
//!
//! * one-qubit basis `{|g>, |r>}` with `|g>` at index 0 (north pole of the
//!   Bloch sphere, `sigma_z |g> = +|g>`);
//! * two-qubit basis `{|gg>, |gr>, |rg>, |rr>}`, first atom is the slow index;
//! * angular frequencies in rad/us, times in us, angles in rad.
#![no_std]

extern crate alloc;

pub mod analysis;
pub mod evolve;
pub mod linalg;
pub mod onequbit;
pub mod openquantum;
pub mod pulses;
pub mod twoqubit;

pub use num_complex::Complex64;

/// Version tag echoed into scan metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
