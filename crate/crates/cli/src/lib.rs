//! Command implementations behind the `transferlab` binary.

pub mod commands;
pub mod table;
