//! Temporally continuous trajectory representations for planar rigid motion.
//!
//! A trajectory is a time-varying SE2 transform, parameterized either as a
//! discrete sequence of timestamped waypoints ([`WaypointTrack`], with linear
//! interpolation in between) or as low-order polynomials in normalized time
//! for each of the four channels `(cx, cy, sin θ, cos θ)` ([`PolyTraj`]).
//! Polynomials admit closed-form least-squares fitting to labeled bounding
//! boxes ([`fit`]), analytic velocity/acceleration ([`kinematics`]), and a
//! probabilistic extension with per-channel Laplace distributions whose scale
//! is an exponential of a polynomial ([`laplace`]).
//!
//! The remaining modules supply the evaluation stack: displacement and
//! heading-error metrics ([`metrics`]), physical-feasibility statistics
//! ([`kinematics`]), and a seeded synthetic-trajectory generator ([`synth`])
//! used by the benchmark harness.

pub mod error;
pub mod fit;
pub mod kinematics;
pub mod laplace;
pub mod metrics;
pub mod se2;
pub mod synth;
pub mod traj;

pub use error::{Error, Result};
pub use se2::{OrientedBox, SE2Pose};
pub use traj::{ModeSet, PolyTraj, PoseProvider, WaypointTrack};
