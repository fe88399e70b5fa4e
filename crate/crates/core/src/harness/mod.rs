//! Experiment sweeps comparing the DQN fleet with MAX-SINR on paired traces.

pub mod plan;
pub mod report;
pub mod run;

pub use plan::{CellSpec, ExperimentPlan, Policy, TraceSource};
pub use report::{emit_diagnostics, emit_report, parse_results_csv, render_report, results_csv};
pub use run::{handover_delta, run_experiment, CellChecks, CellResult, EpisodeStats, HandoverDelta, ResultRow};
