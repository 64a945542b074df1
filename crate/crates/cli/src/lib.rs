//! Command-line front end of the STAR-RIS NOMA simulator: scenario files,
//! sweeps, figure presets and their CSV/JSON output.

pub mod commands;
pub mod error;
pub mod manifest;
pub mod output;
pub mod overrides;
pub mod presets;
pub mod values;

pub use error::CliError;
