//! Magnetic beamforming for multi-user MIMO resonant wireless power transfer.

pub mod beamforming;
pub mod circuit;
pub mod error;
pub mod estimation;
pub mod geometry;
pub mod reference;
pub mod region;
pub mod scenario;
pub mod synth;

pub use circuit::{
    build_impedance, ActiveConstraints, Excitation, ImpedanceModel, SlackReport, C64,
};
pub use error::{Error, Result, ScenarioError};
pub use scenario::{LoadAccounting, Scenario, Violation};
