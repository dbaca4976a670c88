//! Command-line front end for the `kothe` library.

pub mod app;
pub mod gen;
pub mod suites;

pub use app::{run_args, Cli, Output};
