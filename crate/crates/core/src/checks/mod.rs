//! One evaluation metric per trajectory safety criterion.
//!
//! Every check returns a [`CheckResult`] carrying a signed margin (units per
//! check) and a Boolean. Checks are pure functions of their inputs.
//!
//! | id           | criterion                               | margin unit        |
//! |--------------|-----------------------------------------|--------------------|
//! | `s_stat`     | no contact with static objects (bounds) | m                  |
//! | `r_lon`      | longitudinal worst-case gap to traffic  | m                  |
//! | `r_lat`      | lateral worst-case gap to traffic       | m                  |
//! | `pose_match` | trajectory starts at the ego pose       | m                  |
//! | `a_comb`     | combined acceleration within friction   | g (dimensionless)  |
//! | `dyn_limits` | curvature and acceleration limits       | normalized slack   |
//! | `rules`      | rules of conduct                        | normalized slack   |

mod dynamic;
mod friction;
mod limits;
mod pose;
mod rss;
mod rules;
mod static_collision;

use core::fmt;
use core::str::FromStr;

pub use self::dynamic::{check_dynamic_objects, DynamicPair};
pub use self::friction::{check_friction, combined_accel_force, Friction};
pub use self::limits::check_dynamic_limits;
pub use self::pose::check_pose_match;
pub use self::rss::{rss_lat_min_gap, rss_lon_min_gap, RssParameters};
pub use self::rules::{check_rules, RuleSet};
pub use self::static_collision::check_static_collision;

/// Margin reported when a check has nothing to bound it (no objects, no
/// enabled rules).
pub const UNBOUNDED_MARGIN: f64 = f64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CheckId {
    StaticCollision,
    RssLongitudinal,
    RssLateral,
    PoseMatch,
    CombinedAccel,
    DynamicLimits,
    Rules,
}

impl CheckId {
    /// All checks in report column order.
    pub const ALL: [CheckId; 7] = [
        CheckId::StaticCollision,
        CheckId::RssLongitudinal,
        CheckId::RssLateral,
        CheckId::PoseMatch,
        CheckId::CombinedAccel,
        CheckId::DynamicLimits,
        CheckId::Rules,
    ];

    pub const fn as_str(self) -> &'static str {
        match self {
            CheckId::StaticCollision => "s_stat",
            CheckId::RssLongitudinal => "r_lon",
            CheckId::RssLateral => "r_lat",
            CheckId::PoseMatch => "pose_match",
            CheckId::CombinedAccel => "a_comb",
            CheckId::DynamicLimits => "dyn_limits",
            CheckId::Rules => "rules",
        }
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnknownCheck;

impl FromStr for CheckId {
    type Err = UnknownCheck;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CheckId::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or(UnknownCheck)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckResult {
    pub id: CheckId,
    /// Signed margin; non-negative means within the bound.
    pub margin: f64,
    pub safe: bool,
    /// Trajectory point that determined the outcome, where applicable.
    pub worst_index: Option<usize>,
}

impl CheckResult {
    /// Result whose classification follows the margin sign (ties safe).
    pub fn from_margin(id: CheckId, margin: f64, worst_index: Option<usize>) -> Self {
        Self {
            id,
            margin,
            safe: margin >= 0.0,
            worst_index,
        }
    }

    /// Result for an input the check could not evaluate.
    pub fn failed(id: CheckId) -> Self {
        Self {
            id,
            margin: f64::NAN,
            safe: false,
            worst_index: None,
        }
    }
}

/// Tracks the minimum of a per-point quantity and where it occurred.
#[derive(Debug, Clone, Copy)]
pub(crate) struct MinTracker {
    pub value: f64,
    pub index: Option<usize>,
}

impl MinTracker {
    pub fn new() -> Self {
        Self {
            value: UNBOUNDED_MARGIN,
            index: None,
        }
    }

    pub fn push(&mut self, index: usize, v: f64) {
        // NaN is treated as the worst possible value
        if v < self.value || v.is_nan() && !self.value.is_nan() || self.index.is_none() {
            self.value = v;
            self.index = Some(index);
        }
    }
}
