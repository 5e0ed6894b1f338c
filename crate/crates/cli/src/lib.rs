//! Command-line layer: scenario documents, the subcommands and CSV output.

pub mod commands;
pub mod document;
pub mod error;
pub mod output;

pub use commands::{cmd_analyze, cmd_fit_alpha, cmd_measure_mobility, cmd_plan, cmd_simulate, SimFlags};
pub use document::{EngineChoice, ScenarioDocument};
pub use error::{CliError, CliResult};
pub use output::ResultRow;
