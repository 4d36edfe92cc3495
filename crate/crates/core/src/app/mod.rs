//! Scenarios, the time loop, output files and refinement studies behind the CLI.

pub mod config;
pub mod convergence;
pub mod mms;
pub mod output;
pub mod run;
pub mod scenario;
pub mod studies;

pub use config::{MeshSource, RunConfig, ScenarioId};
pub use convergence::{convergence_orders, orders_at_ratio, ConvergenceTable};
pub use run::{run, RunSummary, Simulation};
pub use scenario::{build_scenario, FieldErrors, Scenario};
pub use studies::{run_study, Study};
