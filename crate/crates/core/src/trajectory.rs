//! Trajectories under verification and their input hygiene.

use alloc::vec::Vec;
use core::fmt;

use crate::geometry::{Pose, Vec2};

/// Final speed at or below which an emergency trajectory counts as stopped.
pub const STANDSTILL_SPEED: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrajectoryPoint {
    /// Offset from trajectory start [s].
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub psi: f64,
    /// Path curvature [1/m].
    pub kappa: f64,
    /// Longitudinal velocity [m/s].
    pub v: f64,
    /// Longitudinal acceleration [m/s²].
    pub ax: f64,
}

impl TrajectoryPoint {
    pub fn pose(&self) -> Pose {
        Pose::new(self.x, self.y, self.psi)
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    fn is_finite(&self) -> bool {
        [
            self.t, self.x, self.y, self.psi, self.kappa, self.v, self.ax,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrajectoryKind {
    Driving,
    Emergency,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
    pub kind: TrajectoryKind,
}

impl Trajectory {
    pub fn new(kind: TrajectoryKind, points: Vec<TrajectoryPoint>) -> Self {
        Self { points, kind }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Checks every structural invariant; an empty list means valid.
    pub fn validate(&self) -> Vec<Violation> {
        validate_trajectory(self)
    }

    /// True when the checks can evaluate the points numerically, even if
    /// some semantic invariant is violated.
    pub fn is_evaluable(&self) -> bool {
        !self.points.is_empty() && self.points.iter().all(TrajectoryPoint::is_finite)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    TooFewPoints,
    NonFinite,
    NegativeTime,
    NegativeVelocity,
    NonMonotoneTime,
    EmergencyNotStopping,
}

impl ViolationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationKind::TooFewPoints => "TooFewPoints",
            ViolationKind::NonFinite => "NonFinite",
            ViolationKind::NegativeTime => "NegativeTime",
            ViolationKind::NegativeVelocity => "NegativeVelocity",
            ViolationKind::NonMonotoneTime => "NonMonotoneTime",
            ViolationKind::EmergencyNotStopping => "EmergencyNotStopping",
        }
    }
}

/// One broken invariant and the point index it was found at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Violation {
    pub kind: ViolationKind,
    pub index: usize,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.kind.as_str(), self.index)
    }
}

pub fn validate_trajectory(traj: &Trajectory) -> Vec<Violation> {
    validate_as(traj, traj.kind)
}

/// Validates `traj` against the invariants of the role `kind`, regardless of
/// the kind it is tagged with.
pub fn validate_as(traj: &Trajectory, kind: TrajectoryKind) -> Vec<Violation> {
    let mut out = Vec::new();
    let pts = &traj.points;
    if pts.len() < 2 {
        out.push(Violation {
            kind: ViolationKind::TooFewPoints,
            index: pts.len(),
        });
    }
    for (i, p) in pts.iter().enumerate() {
        if !p.is_finite() {
            out.push(Violation {
                kind: ViolationKind::NonFinite,
                index: i,
            });
            continue;
        }
        if p.t < 0.0 {
            out.push(Violation {
                kind: ViolationKind::NegativeTime,
                index: i,
            });
        }
        if p.v < 0.0 {
            out.push(Violation {
                kind: ViolationKind::NegativeVelocity,
                index: i,
            });
        }
        // NaN compares false, so non-finite neighbours are reported once above
        if i > 0 && pts[i - 1].t.is_finite() && !(p.t > pts[i - 1].t) {
            out.push(Violation {
                kind: ViolationKind::NonMonotoneTime,
                index: i,
            });
        }
    }
    if kind == TrajectoryKind::Emergency {
        if let Some(last) = pts.last() {
            if !(last.v <= STANDSTILL_SPEED) {
                out.push(Violation {
                    kind: ViolationKind::EmergencyNotStopping,
                    index: pts.len() - 1,
                });
            }
        }
    }
    out
}
