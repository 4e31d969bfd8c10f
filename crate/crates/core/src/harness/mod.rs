//! Experiment grid runner, CLI parsing and plotting.

pub mod cli;
pub mod grid;
pub mod plots;
pub mod svg;

pub use cli::{parse_cli, parse_config_str, wants_help, USAGE};
pub use grid::{
    mean_std, run_cell, run_grid, trace_csv, DataConfig, ExperimentSpec, GridCell, GridOutput, ModelVariant,
    RunRecord, RunStatus, SummaryCell, SummaryTable, TRACE_HEADER,
};
pub use plots::{emit_fit_plot, emit_trajectory_plot, fit_chart, trajectory_chart};
