//! Runtime verification of planned trajectories for an autonomous race
//! vehicle.
//!
//! The crate classifies every trajectory candidate handed from the planner
//! to the controller as safe or unsafe, and selects a fallback action when a
//! candidate fails. It is `no_std` (with `alloc`) so the same code can run
//! on the vehicle and in desk replay.
//!
//! * _[geometry]_ and _[track]_ hold the planar primitives: oriented vehicle
//!   footprints, polylines with a segment grid, and the track-relative
//!   (arc length, lateral offset) frame.
//! * _[trajectory]_ and _[vehicle]_ hold the inputs under verification.
//! * _[checks]_ holds one evaluation metric per safety criterion, each
//!   reporting a signed margin.
//! * _[supervisor]_ aggregates the checks into a verdict and runs the
//!   emergency-trajectory fallback state machine.
//! * _[scenario]_ replays scenarios, derives ground-truth safety envelopes,
//!   grades verdict timelines and injects faults.
//!
//! File formats, the command line front end and wall-clock measurement live
//! in the `trajsup` companion crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod checks;
pub mod error;
pub mod geometry;
pub mod math;
pub mod scenario;
pub mod supervisor;
pub mod track;
pub mod trajectory;
pub mod vehicle;

pub use self::checks::{CheckId, CheckResult, Friction, RssParameters, RuleSet};
pub use self::error::{Error, Result};
pub use self::geometry::{ConvexPolygon, Pose, Vec2};
pub use self::supervisor::{
    Action, PerceptionSnapshot, Supervisor, SupervisorConfig, SupervisorState, Verdict,
};
pub use self::track::{FrenetPosition, Polyline, TrackMap};
pub use self::trajectory::{Trajectory, TrajectoryKind, TrajectoryPoint, Violation};
pub use self::vehicle::{EngineCurve, ObjectState, PoseReference, VehicleParameters};

/// Gravitational acceleration [m/s²].
pub const G: f64 = 9.81;
