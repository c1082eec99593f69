//! Agent-based simulator of tertiary-education enrollment decisions.
//!
//! Seniors (working adults) live on a segregated 20x20 world and hatch
//! students. Each student sits an exam, checks a budget of grants, parental
//! endowment, work income and loans, forms wage expectations from the seniors
//! in their social circle, and enrolls with a logistic probability of a
//! preference that mixes the expected consumption premium with disposition,
//! peer influence, openness and centrality. Enrolled students graduate after
//! five ticks and join the educated workforce.
//!
//! The crate is organized bottom-up:
//!
//! - [`params`]: every exogenous constant, loadable from TOML
//! - [`population`], [`network`], [`economics`], [`decision`]: model components
//! - [`engine`]: the per-tick scheduler and [`engine::run`]
//! - [`experiments`], [`stats`]: Monte Carlo, scenarios, OAT sweeps, Welch tests
//! - [`io`]: config files and CSV output

pub mod decision;
pub mod economics;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod io;
pub mod network;
pub mod params;
pub mod population;
pub mod stats;

/// Random stream of one replication.
pub type SimRng = rand_chacha::ChaCha8Rng;

pub use engine::{run, Simulation, TickReport};
pub use error::{ConfigError, Error};
pub use experiments::{monte_carlo, oat_sensitivity, Metric, RunSummary, ScenarioSpec, SweepSpec};
pub use params::SimulationParams;
