//! File formats, subcommand implementations and benchmark output for
//! `pencilkit-core`.

pub mod bench;
pub mod commands;
pub mod formats;
