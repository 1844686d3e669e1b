//! Configuration files, figure presets and CSV output.

pub mod config;
pub mod output;
pub mod presets;
