//! The trajectory has to start where the vehicle actually is.

use super::{CheckId, CheckResult, MinTracker};
use crate::geometry::Vec2;
use crate::trajectory::Trajectory;

/// `threshold` minus the smallest distance between `ego` and the first
/// `match_window` trajectory points.
pub fn check_pose_match(
    traj: &Trajectory,
    ego: Vec2,
    threshold: f64,
    match_window: usize,
) -> CheckResult {
    let mut nearest = MinTracker::new();
    for (i, p) in traj.points.iter().take(match_window.max(1)).enumerate() {
        nearest.push(i, p.position().distance(ego));
    }
    if nearest.index.is_none() {
        return CheckResult::failed(CheckId::PoseMatch);
    }
    CheckResult::from_margin(CheckId::PoseMatch, threshold - nearest.value, nearest.index)
}
