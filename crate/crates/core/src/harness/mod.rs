//! Experiment configuration, scenario runners and result serialization.

mod config;
mod report;
mod scenarios;
mod verify;

pub use config::{
    parse_config, parse_config_str, ClassicalConfig, CouplingConfig, ExperimentConfig, Format, ModelConfig,
    OutputConfig, PlanPoint, ReplicaConfig, ReplicaModeName, Scenario, SweepConfig, SweepParam, SystemConfig,
    DEFAULT_MAX_DIM,
};
pub use report::{emit, CheckRecord, ClassicalRecord, Dims, GapRecord, Records, Report, ThetaRecord, Tolerances};
pub use scenarios::{build_system, guard, run_scenario, theta_table, tolerances, RunOptions, THETA_POINTS};
pub use verify::{run_checks, PROPERTY_TRIALS};
