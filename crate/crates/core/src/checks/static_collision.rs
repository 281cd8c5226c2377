//! Forward collision check of the footprint against the track bounds.

use super::{CheckId, CheckResult, MinTracker};
use crate::error::Result;
use crate::track::TrackMap;
use crate::trajectory::Trajectory;
use crate::vehicle::{footprint, VehicleParameters};

/// Smallest bound clearance of the footprint along the trajectory [m].
pub fn check_static_collision(
    traj: &Trajectory,
    map: &TrackMap,
    params: &VehicleParameters,
) -> Result<CheckResult> {
    let mut worst = MinTracker::new();
    for (i, p) in traj.points.iter().enumerate() {
        map.project(params.center_of(p.pose()))?;
        worst.push(
            i,
            map.signed_distance_to_bounds(&footprint(p.pose(), params)),
        );
    }
    Ok(CheckResult::from_margin(
        CheckId::StaticCollision,
        worst.value,
        worst.index,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::track::straight_track;
    use crate::trajectory::{TrajectoryKind, TrajectoryPoint};
    use crate::vehicle::test_vehicle;
    use alloc::vec::Vec;

    fn traj(y: f64) -> Trajectory {
        let points: Vec<_> = (0..20)
            .map(|i| TrajectoryPoint {
                t: i as f64 * 0.1,
                x: i as f64 * 2.0,
                y,
                v: 20.0,
                ..Default::default()
            })
            .collect();
        Trajectory::new(TrajectoryKind::Driving, points)
    }

    fn square_vehicle() -> VehicleParameters {
        VehicleParameters {
            length: 2.0,
            ..test_vehicle()
        }
    }

    #[test]
    fn centered_on_straight() {
        let map = straight_track(-20.0, 100.0, 2.0, 5.0).unwrap();
        let r = check_static_collision(&traj(0.0), &map, &square_vehicle()).unwrap();
        assert!(r.safe);
        assert!((r.margin - 4.0).abs() < 1e-12);
    }

    #[test]
    fn shifted_onto_bound() {
        let map = straight_track(-20.0, 100.0, 2.0, 5.0).unwrap();
        let r = check_static_collision(&traj(5.0), &map, &square_vehicle()).unwrap();
        assert!(!r.safe);
        assert!((r.margin + 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_point_interior() {
        let map = straight_track(-20.0, 100.0, 2.0, 5.0).unwrap();
        let mut tr = traj(1.0);
        tr.points.truncate(1);
        assert!(
            check_static_collision(&tr, &map, &test_vehicle())
                .unwrap()
                .safe
        );
    }

    #[test]
    fn leaving_corridor_is_an_error() {
        let map = straight_track(-20.0, 100.0, 2.0, 5.0).unwrap();
        assert!(check_static_collision(&traj(80.0), &map, &test_vehicle()).is_err());
    }
}
