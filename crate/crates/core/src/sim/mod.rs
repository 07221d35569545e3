//! Run configuration, the step loop with its artifacts, presets and
//! multi-run studies.

pub mod config;
pub mod presets;
pub mod run;
pub mod studies;

pub use config::{RunConfig, DEFAULT_LB, OUTPUT_DIR_ENV};
pub use presets::{preset, presets, Preset, PresetKind, CONVERGENCE_DTS};
pub use run::{drive, run, run_in_memory, RunOutcome, RunReport, RunSink, Snapshot, SNAPSHOT_VERSION};
pub use studies::{
    convergence, cost_scaling, stability_sweep, write_convergence, write_cost, write_sweep, CostBudget, CostReport,
    CostSample, SweepColumn, SweepReport,
};
