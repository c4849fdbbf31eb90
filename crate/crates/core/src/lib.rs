//! Simulator for gravity-induced entanglement between two Stern–Gerlach
//! interferometers mounted on mechanically constrained (pendulum) platforms.
//!
//! The crate compares the entangling phase accumulated under free fall with
//! the phase accumulated when the centre-of-mass motion is a pendulum, and
//! checks how large the constraint-induced corrections to phase and
//! visibility are.

// Input checks are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod constants;
pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod gravity_phase;
pub mod interferometer;
pub mod noise;
pub mod ode;
pub mod output;
pub mod protocol;
pub mod quadrature;
pub mod sweep;
pub mod verify;

pub use constants::{default_constants, PhysicalConstants, Tolerances};
pub use dynamics::{PendulumConfig, Trajectory, TrajectoryModel};
pub use entanglement::{TwoQubitState, VisibilityResult};
pub use error::{Error, Result};
pub use gravity_phase::{Branch, ConstrainedPhaseComparison, ExperimentGeometry, PhaseMatrix};
pub use interferometer::{BranchPairTrajectory, InterferometerSpec, ScheduleSegment};
pub use noise::{NoiseParams, RegimeReport, RegimeThresholds};
pub use config::RunConfig;
pub use protocol::{simulate, ProtocolResult};
pub use sweep::{run_sweep, Observable, ResultRecord, SweepSpec};
pub use verify::{verify, VerificationReport};
