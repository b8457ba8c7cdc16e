//! Command-line front end: presentation documents and the `bartor` subcommands.

pub mod app;
pub mod document;

pub use app::{run, Outcome};
