//! Combined acceleration against the friction circle.

use alloc::vec::Vec;

use super::{CheckId, CheckResult, MinTracker};
use crate::math;
use crate::trajectory::{Trajectory, TrajectoryPoint};
use crate::vehicle::VehicleParameters;
use crate::G;

/// Friction coefficient available along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub enum Friction {
    /// One track-wide value.
    Uniform(f64),
    /// One value per trajectory point; points past the end reuse the last
    /// value.
    PerPoint(Vec<f64>),
}

impl Friction {
    pub fn at(&self, i: usize) -> f64 {
        match self {
            Friction::Uniform(mu) => *mu,
            Friction::PerPoint(v) => v.get(i).or(v.last()).copied().unwrap_or(f64::NAN),
        }
    }
}

impl From<f64> for Friction {
    fn from(mu: f64) -> Self {
        Friction::Uniform(mu)
    }
}

/// Total acceleration force acting on the vehicle at `point` [N]; the
/// lateral part is `v²·κ`.
pub fn combined_accel_force(point: &TrajectoryPoint, mass: f64) -> f64 {
    let a_lat = point.v * point.v * point.kappa;
    mass * math::sqrt(point.ax * point.ax + a_lat * a_lat)
}

/// Friction-circle check without aerodynamic downforce. The margin is
/// `(μ·m·g − F_a) / (m·g)`, i.e. remaining grip in units of g.
pub fn check_friction(traj: &Trajectory, mu: &Friction, params: &VehicleParameters) -> CheckResult {
    let m = params.mass;
    let mut worst = MinTracker::new();
    for (i, p) in traj.points.iter().enumerate() {
        let f_max = mu.at(i) * m * G;
        let f_a = combined_accel_force(p, m);
        worst.push(i, (f_max - f_a) / (m * G));
    }
    CheckResult::from_margin(CheckId::CombinedAccel, worst.value, worst.index)
}
