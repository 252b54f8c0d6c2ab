//! Command-line companion to `simdiag-core`: matrix, problem, certificate
//! and model file formats, deterministic run reports, and the command
//! implementations behind the `simdiag` binary.
//!
//! Exit-code contract, shared by every subcommand: 0 means SD (or a valid
//! certificate / successful reformulation), 1 means not SD (or an invalid
//! certificate), 2 means the question could not be decided at the working
//! tolerances, 3 means the run itself was malformed (usage, IO, parsing,
//! shape mismatches).

pub mod commands;
pub mod formats;
pub mod report;

use std::fmt;

/// An exit-code-3 failure: bad usage, unreadable files, parse errors, or
/// inputs whose shapes do not line up.
#[derive(Debug)]
pub struct CliError {
    pub message: String,
}

impl CliError {
    pub fn new(message: impl Into<String>) -> Self {
        CliError {
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<simdiag_core::Error> for CliError {
    fn from(e: simdiag_core::Error) -> Self {
        CliError::new(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::new(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::new(e.to_string())
    }
}
