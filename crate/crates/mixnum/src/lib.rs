//! Runner for the `mixnum-core` kernels: rustfft/rayon backends, scenario
//! files with overrides, result files and the `mixnum` command line.

pub mod backend;
pub mod config;
pub mod error;
pub mod io;
pub mod run;
pub mod selftest;

pub use backend::{std_engine, RayonExecutor, RustFftBackend, StdEngine};
pub use config::{load_scenario, LoadedScenario};
pub use error::{CliError, CliResult};
pub use mixnum_core;
