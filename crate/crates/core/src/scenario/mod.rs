//! Config-driven scenario runs.

pub mod config;
pub mod identities;
pub mod output;
pub mod run;

pub use config::{InitialState, ScenarioConfig};
pub use identities::{check_random_states, IdentityReport};
pub use output::{read_series_csv, write_outputs, CsvSeries, OutputFiles};
pub use run::{run_scenario, IdentityResiduals, Scenario, ScenarioResult};

/// Reads and validates a scenario file.
pub fn load_config(path: &std::path::Path) -> crate::Result<ScenarioConfig> {
    ScenarioConfig::load(path)
}
