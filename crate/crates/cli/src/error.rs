//! Error type shared by the command line layer.

use std::error::Error;
use std::fmt;
use std::io;

/// Anything that stops a subcommand before it can render a verdict.
/// Document and Io problems are the caller's to fix; Solver failures mean
/// the instance defeated the numerical layer.
#[derive(Debug)]
pub enum CliError {
    /// Malformed JSON, or a document that fails schema validation. The
    /// message starts with the path of the offending field.
    Document(String),
    /// The solver could not produce the requested object.
    Solver(String),
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Document(s) => write!(f, "document: {s}"),
            CliError::Solver(s) => write!(f, "solver: {s}"),
            CliError::Io(s) => write!(f, "io: {s}"),
        }
    }
}

impl Error for CliError {}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> CliError {
        CliError::Io(e.to_string())
    }
}
