//! Per-step aggregation of check results and the emergency-trajectory
//! fallback.
//!
//! Every step both the driving and the emergency candidate are verified.
//! Only when both are safe is the driving trajectory released and the new
//! emergency trajectory stored. Otherwise the emergency trajectory stored at
//! the last fully safe step is executed; with nothing stored the supervisor
//! demands a full-brake fault reaction.

use alloc::vec::Vec;

use crate::checks::{
    check_dynamic_limits, check_dynamic_objects, check_friction, check_pose_match, check_rules,
    check_static_collision, CheckId, CheckResult, Friction, RssParameters, RuleSet,
};
use crate::error::Error;
use crate::geometry::Pose;
use crate::track::TrackMap;
use crate::trajectory::{validate_as, Trajectory, TrajectoryKind, Violation};
use crate::vehicle::{ObjectState, VehicleParameters};

/// Perception input of one step.
#[derive(Debug, Clone, PartialEq)]
pub struct PerceptionSnapshot {
    /// Absolute timestamp [s].
    pub t_abs: f64,
    pub ego_pose: Pose,
    pub objects: Vec<ObjectState>,
    pub mu: Friction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    ExecuteDriving,
    ExecuteStoredEmergency,
    FullBrakeFault,
}

impl Action {
    pub fn as_str(self) -> &'static str {
        match self {
            Action::ExecuteDriving => "execute_driving",
            Action::ExecuteStoredEmergency => "execute_stored_emergency",
            Action::FullBrakeFault => "full_brake_fault",
        }
    }
}

/// Set of enabled checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CheckSet(u8);

impl CheckSet {
    pub const ALL: CheckSet = CheckSet(0x7f);
    pub const NONE: CheckSet = CheckSet(0);

    fn bit(id: CheckId) -> u8 {
        1 << CheckId::ALL.iter().position(|&c| c == id).unwrap_or(0)
    }

    pub fn contains(self, id: CheckId) -> bool {
        self.0 & Self::bit(id) != 0
    }

    pub fn with(self, id: CheckId) -> Self {
        CheckSet(self.0 | Self::bit(id))
    }

    pub fn without(self, id: CheckId) -> Self {
        CheckSet(self.0 & !Self::bit(id))
    }
}

impl Default for CheckSet {
    fn default() -> Self {
        CheckSet::ALL
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupervisorConfig {
    /// Maximum distance between ego pose and a matched trajectory point [m].
    pub pose_threshold: f64,
    /// Number of leading trajectory points considered for pose matching.
    pub match_window: usize,
    /// Re-run the time-independent checks on the stored emergency trajectory
    /// before falling back to it.
    pub reverify_stored_emergency: bool,
    pub enabled: CheckSet,
}

impl Default for SupervisorConfig {
    fn default() -> Self {
        Self {
            pose_threshold: 1.0,
            match_window: 3,
            reverify_stored_emergency: false,
            enabled: CheckSet::ALL,
        }
    }
}

/// Verification outcome for one trajectory candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateVerdict {
    /// One result per check, in [`CheckId::ALL`] order.
    pub checks: Vec<CheckResult>,
    pub violations: Vec<Violation>,
    /// Evaluation error (e.g. leaving the projection corridor).
    pub error: Option<Error>,
    pub safe: bool,
}

impl CandidateVerdict {
    pub fn check(&self, id: CheckId) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.id == id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub t_abs: f64,
    pub driving: CandidateVerdict,
    pub emergency: CandidateVerdict,
    /// Snapshot-level input error; rates the step unsafe.
    pub input_error: Option<Error>,
    /// Both candidates safe.
    pub s_tot: bool,
    pub action: Action,
}

impl Verdict {
    /// Smaller margin of the two candidates for one check.
    pub fn min_margin(&self, id: CheckId) -> f64 {
        let m = |c: &CandidateVerdict| c.check(id).map_or(f64::NAN, |r| r.margin);
        let (a, b) = (m(&self.driving), m(&self.emergency));
        if a.is_nan() || b.is_nan() {
            f64::NAN
        } else {
            a.min(b)
        }
    }

    /// True when the check rated either candidate unsafe.
    pub fn check_fired(&self, id: CheckId) -> bool {
        let fired = |c: &CandidateVerdict| c.check(id).is_none_or(|r| !r.safe);
        fired(&self.driving) || fired(&self.emergency)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SupervisorState {
    /// Last emergency trajectory that was rated safe together with its
    /// driving trajectory.
    pub stored_emergency: Option<Trajectory>,
    pub last_t_abs: Option<f64>,
}

/// Returns the empty state.
pub fn reset(_state: SupervisorState) -> SupervisorState {
    SupervisorState::default()
}

/// Static configuration of one supervisor: track, vehicle and rules.
#[derive(Debug, Clone, PartialEq)]
pub struct Supervisor {
    pub map: TrackMap,
    pub vehicle: VehicleParameters,
    pub rss: RssParameters,
    pub rules: RuleSet,
    pub config: SupervisorConfig,
}

impl Supervisor {
    pub fn new(
        map: TrackMap,
        vehicle: VehicleParameters,
        rss: RssParameters,
        rules: RuleSet,
    ) -> Self {
        Self {
            map,
            vehicle,
            rss,
            rules,
            config: SupervisorConfig::default(),
        }
    }

    pub fn with_config(mut self, config: SupervisorConfig) -> Self {
        self.config = config;
        self
    }

    /// Runs all seven checks on one candidate.
    pub fn evaluate_candidate(
        &self,
        snap: &PerceptionSnapshot,
        traj: &Trajectory,
        role: TrajectoryKind,
    ) -> CandidateVerdict {
        let violations = validate_as(traj, role);
        if !traj.is_evaluable() {
            return CandidateVerdict {
                checks: CheckId::ALL
                    .iter()
                    .map(|&id| CheckResult::failed(id))
                    .collect(),
                violations,
                error: None,
                safe: false,
            };
        }

        let mut error = None;
        let s_stat = match check_static_collision(traj, &self.map, &self.vehicle) {
            Ok(r) => r,
            Err(e) => {
                error = Some(e);
                CheckResult::failed(CheckId::StaticCollision)
            }
        };
        let (r_lon, r_lat) = match check_dynamic_objects(
            traj,
            &snap.objects,
            &self.map,
            &self.vehicle,
            &self.rss,
            &self.rules,
        ) {
            Ok(p) => (p.r_lon, p.r_lat),
            Err(e) => {
                error.get_or_insert(e);
                (
                    CheckResult::failed(CheckId::RssLongitudinal),
                    CheckResult::failed(CheckId::RssLateral),
                )
            }
        };
        let checks = alloc::vec![
            s_stat,
            r_lon,
            r_lat,
            check_pose_match(
                traj,
                snap.ego_pose.position(),
                self.config.pose_threshold,
                self.config.match_window,
            ),
            check_friction(traj, &snap.mu, &self.vehicle),
            check_dynamic_limits(traj, &self.vehicle),
            check_rules(traj, &self.rules),
        ];
        let enabled = self.config.enabled;
        let safe = violations.is_empty()
            && error.is_none()
            && checks.iter().all(|c| c.safe || !enabled.contains(c.id));
        CandidateVerdict {
            checks,
            violations,
            error,
            safe,
        }
    }

    /// Time-independent checks on a previously stored emergency trajectory.
    fn stored_still_valid(&self, snap: &PerceptionSnapshot, traj: &Trajectory) -> bool {
        let enabled = self.config.enabled;
        let ok = |r: CheckResult| r.safe || !enabled.contains(r.id);
        check_static_collision(traj, &self.map, &self.vehicle).is_ok_and(ok)
            && ok(check_friction(traj, &snap.mu, &self.vehicle))
            && ok(check_dynamic_limits(traj, &self.vehicle))
            && ok(check_rules(traj, &self.rules))
    }

    fn snapshot_error(&self, state: &SupervisorState, snap: &PerceptionSnapshot) -> Option<Error> {
        let stale = state.last_t_abs.is_some_and(|last| !(snap.t_abs > last));
        if !snap.t_abs.is_finite() || stale {
            return Some(Error::InvalidParameter {
                name: "t_abs",
                reason: alloc::format!("timestamp {} does not advance", snap.t_abs),
            });
        }
        let pose = snap.ego_pose;
        if !(pose.x.is_finite() && pose.y.is_finite() && pose.psi.is_finite()) {
            return Some(Error::InvalidParameter {
                name: "ego_pose",
                reason: "non-finite ego pose".into(),
            });
        }
        snap.objects.iter().find_map(|o| o.validate().err())
    }

    /// Verifies both candidates of one step and selects the action.
    pub fn evaluate_step(
        &self,
        state: SupervisorState,
        snap: &PerceptionSnapshot,
        driving: &Trajectory,
        emergency: &Trajectory,
    ) -> (Verdict, SupervisorState) {
        let input_error = self.snapshot_error(&state, snap);
        let d = self.evaluate_candidate(snap, driving, TrajectoryKind::Driving);
        let e = self.evaluate_candidate(snap, emergency, TrajectoryKind::Emergency);
        let s_tot = input_error.is_none() && d.safe && e.safe;

        let mut next = state;
        if snap.t_abs.is_finite() {
            next.last_t_abs = Some(next.last_t_abs.map_or(snap.t_abs, |l| l.max(snap.t_abs)));
        }
        let action = if s_tot {
            next.stored_emergency = Some(emergency.clone());
            Action::ExecuteDriving
        } else {
            match &next.stored_emergency {
                Some(stored)
                    if !self.config.reverify_stored_emergency
                        || self.stored_still_valid(snap, stored) =>
                {
                    Action::ExecuteStoredEmergency
                }
                Some(_) => {
                    next.stored_emergency = None;
                    Action::FullBrakeFault
                }
                None => Action::FullBrakeFault,
            }
        };
        (
            Verdict {
                t_abs: snap.t_abs,
                driving: d,
                emergency: e,
                input_error,
                s_tot,
                action,
            },
            next,
        )
    }
}
