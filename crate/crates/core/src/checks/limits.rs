//! Curvature and longitudinal acceleration against physical vehicle limits.

use super::{CheckId, CheckResult, MinTracker};
use crate::trajectory::Trajectory;
use crate::vehicle::VehicleParameters;

/// Safe iff every point satisfies `|κ|·R_min ≤ 1` and
/// `−a_brake_max ≤ ax ≤ engine(v)`. The margin is the smallest of the three
/// slacks, each normalized by its limit, so a fully slack point scores 1.
pub fn check_dynamic_limits(traj: &Trajectory, params: &VehicleParameters) -> CheckResult {
    let mut worst = MinTracker::new();
    for (i, p) in traj.points.iter().enumerate() {
        let curvature = 1.0 - p.kappa.abs() * params.turn_radius_min;
        let brake = (p.ax + params.a_brake_max) / params.a_brake_max;
        let a_max = params.engine.max_accel(p.v);
        // a zero engine limit is normalized per 1 m/s² so the sign survives
        let accel = (a_max - p.ax) / if a_max > 0.0 { a_max } else { 1.0 };
        worst.push(i, curvature.min(brake).min(accel));
    }
    CheckResult::from_margin(CheckId::DynamicLimits, worst.value, worst.index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::{TrajectoryKind, TrajectoryPoint};
    use crate::vehicle::test_vehicle;
    use alloc::vec::Vec;

    fn traj(v: f64, kappa: f64, ax: f64) -> Trajectory {
        let points: Vec<_> = (0..5)
            .map(|i| TrajectoryPoint {
                t: i as f64 * 0.1,
                x: i as f64 * v * 0.1,
                v,
                kappa,
                ax,
                ..Default::default()
            })
            .collect();
        Trajectory::new(TrajectoryKind::Driving, points)
    }

    #[test]
    fn curvature_above_reciprocal_radius() {
        let r = check_dynamic_limits(&traj(5.0, 0.25, 0.0), &test_vehicle());
        assert!(!r.safe);
        assert!((r.margin + 0.25).abs() < 1e-12);
        assert!(check_dynamic_limits(&traj(5.0, 0.2, 0.0), &test_vehicle()).safe);
        assert!(check_dynamic_limits(&traj(5.0, -0.2, 0.0), &test_vehicle()).safe);
    }

    #[test]
    fn straight_constant_velocity_is_fully_slack() {
        let r = check_dynamic_limits(&traj(30.0, 0.0, 0.0), &test_vehicle());
        assert!(r.safe);
        assert_eq!(r.margin, 1.0);
    }

    #[test]
    fn engine_curve_limits_acceleration() {
        // test engine allows 6 m/s² at 40 m/s
        let r = check_dynamic_limits(&traj(40.0, 0.0, 8.0), &test_vehicle());
        assert!(!r.safe);
        assert!((r.margin - (6.0 - 8.0) / 6.0).abs() < 1e-12);
        assert!(check_dynamic_limits(&traj(40.0, 0.0, 6.0), &test_vehicle()).safe);
    }

    #[test]
    fn braking_limit() {
        assert!(check_dynamic_limits(&traj(20.0, 0.0, -10.0), &test_vehicle()).safe);
        let r = check_dynamic_limits(&traj(20.0, 0.0, -12.0), &test_vehicle());
        assert!(!r.safe);
        assert!((r.margin + 0.2).abs() < 1e-12);
    }
}
