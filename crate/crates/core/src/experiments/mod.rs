//! Scenario configuration, experiment runners and their file outputs.

pub mod config;
pub mod cost;
pub mod output;
pub mod runner;

pub use config::SystemConfig;
pub use cost::CostModel;
pub use runner::{run_complexity, run_convergence, run_oracle_compare, run_sinr_sweep};
