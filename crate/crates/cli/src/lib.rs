//! Library side of the command-line front end: configuration, the shared
//! integration loop, subcommand implementations, and output formats.

pub mod commands;
pub mod config;
pub mod output;
