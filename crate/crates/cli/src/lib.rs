//! Library surface of the command line front end: the document schema, the
//! deterministic report renderer, and the subcommand implementations. The
//! binary in main.rs is a thin argument-parsing shell over this.

pub mod commands;
pub mod doc;
pub mod error;
pub mod report;
