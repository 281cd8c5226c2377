//! Rules of conduct expressed as per-point scalar constraints.

use super::{CheckId, CheckResult, MinTracker, UNBOUNDED_MARGIN};
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleSet {
    /// Speed limit [m/s]; `None` disables it.
    pub v_max: Option<f64>,
    /// The rear vehicle is responsible for collisions; consumed by the
    /// dynamic-object check.
    pub rear_responsibility: bool,
}

impl Default for RuleSet {
    fn default() -> Self {
        Self {
            v_max: None,
            rear_responsibility: true,
        }
    }
}

pub fn check_rules(traj: &Trajectory, rules: &RuleSet) -> CheckResult {
    let Some(v_max) = rules.v_max else {
        return CheckResult::from_margin(CheckId::Rules, UNBOUNDED_MARGIN, None);
    };
    let mut worst = MinTracker::new();
    for (i, p) in traj.points.iter().enumerate() {
        worst.push(i, (v_max - p.v) / v_max);
    }
    CheckResult::from_margin(CheckId::Rules, worst.value, worst.index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::{TrajectoryKind, TrajectoryPoint};
    use alloc::vec::Vec;

    fn traj(vs: &[f64]) -> Trajectory {
        let points: Vec<_> = vs
            .iter()
            .enumerate()
            .map(|(i, &v)| TrajectoryPoint {
                t: i as f64 * 0.1,
                v,
                ..Default::default()
            })
            .collect();
        Trajectory::new(TrajectoryKind::Driving, points)
    }

    fn limit(v: f64) -> RuleSet {
        RuleSet {
            v_max: Some(v),
            ..Default::default()
        }
    }

    #[test]
    fn slack_below_limit() {
        let r = check_rules(&traj(&[70.0, 75.0, 72.0]), &limit(80.0));
        assert!(r.safe);
        assert_eq!(r.margin, 5.0 / 80.0);
        assert_eq!(r.worst_index, Some(1));
    }

    #[test]
    fn single_point_over_limit() {
        assert!(!check_rules(&traj(&[70.0, 81.0]), &limit(80.0)).safe);
    }

    #[test]
    fn no_rules_enabled() {
        let r = check_rules(&traj(&[300.0]), &RuleSet::default());
        assert!(r.safe);
        assert_eq!(r.margin, f64::MAX);
    }
}
