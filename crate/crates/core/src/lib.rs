//! Multi-target RSSI tracking of VHF radio tags from a UAV.
//!
//! Each tag is tracked by an independent bootstrap particle filter fed by
//! received-signal-strength readings. The UAV path is chosen by a
//! receding-horizon planner that maximizes the expected Rényi divergence
//! between the predicted prior and simulated posteriors. The `sim` module
//! wires everything into a 1 Hz world loop and a seeded Monte Carlo harness.

pub mod config;
pub mod error;
pub mod exec;
pub mod filter;
pub mod geometry;
pub mod planner;
pub mod rf;
pub mod rng;
pub mod sim;

pub use config::{MotionModel, PlannerConfig, Policy, PruneFocus, ScenarioConfig, SimConfig};
pub use error::{Error, Result};
pub use exec::Exec;
pub use geometry::{Area, Position3, UavState};
pub use rf::{AntennaPattern, MeasurementModel, ModelKind, PropagationParams};
