//! Library surface of the command-line front end, exposed so integration
//! tests can drive experiments without spawning the binary.

pub mod config;
pub mod error;
pub mod ops;
