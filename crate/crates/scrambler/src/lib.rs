//! File formats, report rendering and parallel drivers for the `scrambler`
//! command-line tool.

pub mod error;
pub mod measure_spec;
pub mod parallel;
pub mod report;
pub mod trajectory;
pub mod tree_file;

pub use error::{exit, CliError, Result};
