//! Scenario files, presets, sweeps and CSV emission for the `squeezenm`
//! command line tool.

pub mod compare;
pub mod error;
pub mod presets;
pub mod run;
pub mod scenario;

pub use error::{CliError, Result};
pub use run::{run_scenario, RunOptions, RunReport};
pub use scenario::{load_scenario, parse_scenario, Engine, Scenario};
