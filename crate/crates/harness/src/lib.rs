//! Scenario runner for the partial-collapse reversal experiments: single-qubit
//! evolution (fig2), process tomography (fig3), entangled-state evolution
//! (fig4) and the CHSH test, emitted as JSON or CSV reports.

pub mod config;
pub mod error;
pub mod report;
pub mod scenarios;

pub use config::{NoiseSpec, OutputFormat, Scenario, ScenarioConfig};
pub use error::{HarnessError, Result};
pub use report::{RunReport, SoftCheck};
pub use scenarios::{run, run_chsh, run_fig2, run_fig3, run_fig4, run_scenario};
