//! Command-line driver: configuration, dispatch, CSV/JSON artifacts and run
//! manifests for `coflow-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod json;
pub mod output;
pub mod run;

pub use cli::main_with;
pub use config::RunConfig;
pub use error::CliError;
