//! Secrecy-capacity simulation and optimization for a UAV downlink assisted
//! by an intelligent reflecting surface (IRS), in the presence of multiple
//! non-colluding eavesdroppers.
//!
//! A UAV transmits to a vehicle on a road while `K` eavesdropper vehicles
//! listen; an IRS with `M` passive elements adds a steerable reflected path.
//! The crate models the links (path loss + Rayleigh fading), composes the
//! effective channels, and maximizes `max(0, rate_user - max_k rate_eve)`
//! over transmit power and IRS phase shifts by alternate optimization.
//! A Monte Carlo harness runs seeded paired trials and parameter sweeps;
//! a brute-force grid oracle validates the optimizer on small instances.
//!
//! Modules follow the pipeline:
//!
//! * [`channel`]: geometry, path loss, fading draws
//! * [`irs`]: reflection state and effective-channel composition
//! * [`secrecy`]: rates and secrecy capacity
//! * [`optimizer`]: alternate optimization and the grid oracle
//! * [`montecarlo`]: seeded trials, baselines, sweeps, CSV
//! * [`config`]: scenario file loading and defaults
//! * [`rng`]: reproducible per-trial stream derivation

pub mod channel;
pub mod config;
pub mod error;
pub mod irs;
pub mod montecarlo;
pub mod optimizer;
pub mod rng;
pub mod secrecy;

pub use channel::{ChannelRealization, FadingParams, Position3D, Topology};
pub use config::ScenarioConfig;
pub use error::{Error, Result};
pub use irs::{PhaseProfile, Receiver};
pub use montecarlo::{Baseline, BaselineSet, SweepResult, SweepSpec, SweptField};
pub use optimizer::{OptimizationTrace, OptimizerConfig};
pub use secrecy::SecrecyOutcome;
