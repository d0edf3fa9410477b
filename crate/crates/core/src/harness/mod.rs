//! Scenario configuration, closed-loop runs and controller comparisons.

mod compare;
mod config;
mod run;
#[cfg(test)]
mod scenarios;

pub use compare::{compare, mean_change, write_comparison_csv, ComparisonRow};
pub use config::{preset, ControllerVariant, ScenarioConfig, Seeds, PRESETS};
pub use run::{preview_field, run, RunRecord, StepRow, CSV_HEADER};
