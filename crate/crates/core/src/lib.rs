//! Simulation of wave-disturbed station keeping for a small underwater
//! vehicle in the vertical plane (surge, heave, pitch).
//!
//! The pipeline is: an irregular sea generated from a JONSWAP spectrum
//! ([`wave`]), wave loads on the vehicle ([`disturbance`]), 3-DoF rigid-body
//! dynamics ([`vehicle`]), an EKF state estimate ([`estimator`]), a cascaded
//! PD controller with optional wave feed-forward and thrust allocation
//! ([`controller`]), mission metrics ([`metrics`]) and the closed-loop
//! scenario runner ([`harness`]).

pub mod controller;
pub mod disturbance;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod metrics;
pub mod vehicle;
pub mod wave;

use rand::SeedableRng;

pub use controller::{Gains, StationKeepingController, ThrustAllocator, ThrusterConfig};
pub use disturbance::{wave_load, DisturbanceLoad};
pub use error::{Error, Result};
pub use estimator::{Ekf, EkfState, NoiseConfig};
pub use harness::{compare, preset, run, ControllerVariant, RunRecord, ScenarioConfig, Seeds};
pub use metrics::{power, summarize, RunSummary};
pub use vehicle::{BodyVelocity, Pose, VehicleModel, VehicleParams, VehicleState};
pub use wave::{FluidState, SpectrumParams, WaveComponent, WaveField};

/// Random generator used for every stochastic input (wave phases, sensor
/// noise, preview corruption).
pub type SimRng = rand_chacha::ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}
