//! Closed-loop scenarios, traces, metrics and the reproduction suite.

mod metrics;
mod run;
mod scenario;
mod suite;
mod trace;

pub use metrics::{itae, realized_cost, recovery_time, speed_stats, Signal, SpeedStats};
pub use run::{build_controller, run_scenario, run_scenario_with, RunAbort};
pub use scenario::{ControllerSpec, InitialState, Profile, ResolvedScenario, Scenario, SensorSpec, SpeedUnit};
pub use trace::{SimTrace, TraceRecord, CSV_COLUMNS};
pub use suite::{
    evaluate_criteria, suite_scenarios, reproduce_paper_suite, trace_metrics, CriterionResult, RunMetrics, SuiteConfig,
    SuiteReport, SuiteScenario, WeightChoice, CONTROLLERS, METRIC_COLUMNS, PUBLISHED_REALIZED_COST,
    PUBLISHED_TORQUE_ITAE,
};
