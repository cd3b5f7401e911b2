//! Command implementations behind the `rigidlab` binary.

pub mod commands;
pub mod format;
pub mod mine;
pub mod report;
