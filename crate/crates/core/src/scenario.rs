//! Scenario replay and grading against ground truth.
//!
//! Collision scenarios are graded against a safety envelope: the supervisor
//! may fire no earlier than when another vehicle enters the ego's braking
//! distance, and must fire no later than the first frame from which full
//! braking can no longer avoid a collision with a constant-velocity object.
//! Frames before the envelope must be rated safe, frames after it unsafe.
//!
//! Non-collision faults are graded frame by frame against a direct
//! evaluation of the violated constraint.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::checks::{check_dynamic_objects, combined_accel_force, CheckId};
use crate::error::{Error, Result};
use crate::geometry::{Pose, Vec2};
use crate::math;
use crate::supervisor::{reset, PerceptionSnapshot, Supervisor, SupervisorState, Verdict};
use crate::trajectory::{validate_as, Trajectory, TrajectoryKind};
use crate::vehicle::footprint;
use crate::G;

/// Default step of the envelope simulation [s].
pub const ENVELOPE_DT: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFrame {
    pub snapshot: PerceptionSnapshot,
    pub driving: Trajectory,
    pub emergency: Trajectory,
}

impl ScenarioFrame {
    pub fn t_abs(&self) -> f64 {
        self.snapshot.t_abs
    }
}

/// What a fault scenario is expected to trip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FaultTarget {
    Check(CheckId),
    /// Input hygiene (e.g. an emergency trajectory that does not stop).
    InputValidation,
}

impl fmt::Display for FaultTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FaultTarget::Check(id) => f.write_str(id.as_str()),
            FaultTarget::InputValidation => f.write_str("input"),
        }
    }
}

impl FromStr for FaultTarget {
    type Err = String;

    fn from_str(s: &str) -> core::result::Result<Self, String> {
        if s == "input" {
            return Ok(FaultTarget::InputValidation);
        }
        s.parse::<CheckId>()
            .map(FaultTarget::Check)
            .map_err(|_| format!("unknown check `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Expected {
    NoFire,
    FireInEnvelope,
    FireSpecificCheck(FaultTarget),
}

impl fmt::Display for Expected {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expected::NoFire => f.write_str("no-fire"),
            Expected::FireInEnvelope => f.write_str("fire-in-envelope"),
            Expected::FireSpecificCheck(t) => write!(f, "fire-check:{t}"),
        }
    }
}

impl FromStr for Expected {
    type Err = String;

    fn from_str(s: &str) -> core::result::Result<Self, String> {
        match s {
            "no-fire" => Ok(Expected::NoFire),
            "fire-in-envelope" => Ok(Expected::FireInEnvelope),
            _ => match s.strip_prefix("fire-check:") {
                Some(t) => t.parse().map(Expected::FireSpecificCheck),
                None => Err(format!("unknown expectation `{s}`")),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    /// Track, vehicle, worst-case parameters, rules and check configuration.
    pub supervisor: Supervisor,
    pub frames: Vec<ScenarioFrame>,
    pub expected: Expected,
}

impl Scenario {
    /// Checks frame ordering and parameter ranges.
    pub fn validate(&self) -> Result<()> {
        self.supervisor.vehicle.validate()?;
        self.supervisor.rss.validate()?;
        if self.frames.is_empty() {
            return Err(Error::InvalidScenario {
                frame: 0,
                reason: "scenario has no frames".into(),
            });
        }
        for (i, f) in self.frames.iter().enumerate() {
            if !f.t_abs().is_finite() {
                return Err(Error::InvalidScenario {
                    frame: i,
                    reason: "non-finite timestamp".into(),
                });
            }
            if i > 0 && !(f.t_abs() > self.frames[i - 1].t_abs()) {
                return Err(Error::InvalidScenario {
                    frame: i,
                    reason: format!(
                        "timestamp {} does not increase past {}",
                        f.t_abs(),
                        self.frames[i - 1].t_abs()
                    ),
                });
            }
        }
        Ok(())
    }

    /// Iterator feeding the frames through one freshly reset supervisor.
    pub fn replay_iter(&self) -> Replay<'_> {
        Replay {
            scenario: self,
            state: reset(SupervisorState::default()),
            next: 0,
        }
    }
}

/// Sequential replay of a scenario; yields one verdict per frame.
pub struct Replay<'a> {
    scenario: &'a Scenario,
    state: SupervisorState,
    next: usize,
}

impl Iterator for Replay<'_> {
    type Item = Verdict;

    fn next(&mut self) -> Option<Verdict> {
        let frame = self.scenario.frames.get(self.next)?;
        self.next += 1;
        let state = core::mem::take(&mut self.state);
        let (verdict, state) = self.scenario.supervisor.evaluate_step(
            state,
            &frame.snapshot,
            &frame.driving,
            &frame.emergency,
        );
        self.state = state;
        Some(verdict)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.scenario.frames.len() - self.next;
        (n, Some(n))
    }
}

/// Replays all frames in order.
pub fn replay(scenario: &Scenario) -> Vec<Verdict> {
    scenario.replay_iter().collect()
}

/// Interval within which the first unsafe rating is accepted. Infinite
/// bounds mean the supervisor must never fire.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SafetyEnvelope {
    pub t_earliest: f64,
    pub t_latest: f64,
}

impl SafetyEnvelope {
    pub const NO_FIRE: SafetyEnvelope = SafetyEnvelope {
        t_earliest: f64::INFINITY,
        t_latest: f64::INFINITY,
    };

    pub fn is_no_fire(&self) -> bool {
        self.t_latest == f64::INFINITY
    }
}

/// Point along a trajectory's path at arc distance `d`, continuing on the
/// final curvature past the last point.
struct PathFollower {
    pts: Vec<(f64, Pose)>,
    end_kappa: f64,
}

impl PathFollower {
    fn new(traj: &Trajectory) -> Self {
        let mut pts: Vec<(f64, Pose)> = Vec::with_capacity(traj.points.len());
        let mut acc = 0.0;
        for p in &traj.points {
            if let Some(&(_, last)) = pts.last() {
                let step = last.position().distance(p.position());
                if step == 0.0 {
                    continue;
                }
                acc += step;
            }
            pts.push((acc, p.pose()));
        }
        Self {
            pts,
            end_kappa: traj.points.last().map_or(0.0, |p| p.kappa),
        }
    }

    fn at(&self, d: f64) -> Pose {
        let (d_end, end) = self.pts[self.pts.len() - 1];
        if d >= d_end {
            let e = d - d_end;
            let k = self.end_kappa;
            if k.abs() < 1e-9 {
                let dir = Vec2::from_angle(end.psi);
                return Pose::new(end.x + dir.x * e, end.y + dir.y * e, end.psi);
            }
            let psi = end.psi + k * e;
            return Pose::new(
                end.x + (math::sin(psi) - math::sin(end.psi)) / k,
                end.y - (math::cos(psi) - math::cos(end.psi)) / k,
                psi,
            );
        }
        let i = self.pts.partition_point(|&(s, _)| s <= d).max(1) - 1;
        let (s0, a) = self.pts[i];
        let (s1, b) = self.pts[i + 1];
        let t = (d - s0) / (s1 - s0);
        let dir = b.position() - a.position();
        Pose::new(a.x + dir.x * t, a.y + dir.y * t, math::atan2(dir.y, dir.x))
    }
}

/// Whether full braking from this frame still collides with some object
/// held at constant velocity. Objects lying entirely behind the ego's rear
/// at the start are ignored: running into a braking vehicle from behind is
/// the rear vehicle's responsibility.
pub fn braking_collides(supervisor: &Supervisor, frame: &ScenarioFrame, dt: f64) -> bool {
    let Some(first) = frame.driving.points.first() else {
        return false;
    };
    let params = &supervisor.vehicle;
    let a = params.a_brake_max;
    let v0 = first.v;
    let t_stop = v0 / a;
    let path = PathFollower::new(&frame.driving);
    let start = path.at(0.0);
    let start_center = params.center_of(start);
    let start_heading = Vec2::from_angle(start.psi);
    let rear = -0.5 * params.length;
    let relevant: Vec<_> = frame
        .snapshot
        .objects
        .iter()
        .filter(|o| {
            o.footprint()
                .vertices()
                .iter()
                .any(|&v| (v - start_center).dot(start_heading) >= rear)
        })
        .map(|o| (Vec2::from_angle(o.psi) * o.v, o.footprint()))
        .collect();
    if relevant.is_empty() {
        return false;
    }
    let steps = math::floor(t_stop / dt) as usize + 1;
    for k in 0..=steps {
        let tau = (k as f64 * dt).min(t_stop);
        let ego = footprint(path.at(v0 * tau - 0.5 * a * tau * tau), params);
        if relevant
            .iter()
            .any(|(vel, fp)| ego.overlaps(&fp.translated(*vel * tau)))
        {
            return true;
        }
    }
    false
}

/// Whether some object ahead is within the ego's braking distance
/// (bumper to bumper along the track).
pub fn object_within_braking_distance(supervisor: &Supervisor, frame: &ScenarioFrame) -> bool {
    let Some(first) = frame.driving.points.first() else {
        return false;
    };
    let params = &supervisor.vehicle;
    let map = &supervisor.map;
    let Ok(ego) = map.project(params.center_of(frame.snapshot.ego_pose)) else {
        return false;
    };
    let braking = first.v * first.v / (2.0 * params.a_brake_max);
    frame.snapshot.objects.iter().any(|o| {
        map.project(Vec2::new(o.x, o.y)).is_ok_and(|f| {
            let ds = map.signed_gap(ego.s, f.s);
            ds > 0.0 && ds - 0.5 * (params.length + o.length) <= braking
        })
    })
}

/// Ground-truth envelope of a dynamic-collision scenario, simulated at
/// `dt`.
pub fn ground_truth_envelope_with_dt(scenario: &Scenario, dt: f64) -> Result<SafetyEnvelope> {
    if scenario
        .frames
        .iter()
        .all(|f| f.snapshot.objects.is_empty())
    {
        return Err(Error::NotApplicable("scenario contains no other vehicles"));
    }
    let sup = &scenario.supervisor;
    let latest = scenario
        .frames
        .iter()
        .find(|f| braking_collides(sup, f, dt))
        .map(ScenarioFrame::t_abs);
    let Some(t_latest) = latest else {
        return Ok(SafetyEnvelope::NO_FIRE);
    };
    let t_earliest = scenario
        .frames
        .iter()
        .find(|f| object_within_braking_distance(sup, f))
        .map_or(t_latest, |f| f.t_abs().min(t_latest));
    Ok(SafetyEnvelope {
        t_earliest,
        t_latest,
    })
}

pub fn ground_truth_envelope(scenario: &Scenario) -> Result<SafetyEnvelope> {
    ground_truth_envelope_with_dt(scenario, ENVELOPE_DT)
}

#[derive(Debug, Clone, PartialEq)]
pub enum GradeReason {
    Passed,
    /// Unsafe rating before the earliest allowed time.
    Premature {
        t: f64,
    },
    /// No unsafe rating by the latest required time.
    Missed,
    /// Safe rating after the latest required time.
    Relapsed {
        t: f64,
    },
    /// The targeted check never fired.
    NeverFired,
    /// The oracle says the constraint is violated but the verdict disagrees.
    MissedFrame {
        t: f64,
    },
    /// The targeted check fired where the oracle sees no violation.
    SpuriousFrame {
        t: f64,
    },
}

impl fmt::Display for GradeReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GradeReason::Passed => f.write_str("passed"),
            GradeReason::Premature { t } => write!(f, "premature: unsafe at t={t} before envelope"),
            GradeReason::Missed => f.write_str("missed: no fire by latest detection time"),
            GradeReason::Relapsed { t } => write!(f, "relapsed: safe at t={t} after envelope"),
            GradeReason::NeverFired => f.write_str("missed: targeted check never fired"),
            GradeReason::MissedFrame { t } => write!(f, "missed: violation at t={t} not detected"),
            GradeReason::SpuriousFrame { t } => {
                write!(
                    f,
                    "spurious: targeted check fired at t={t} without violation"
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradeOutcome {
    pub pass: bool,
    pub reason: GradeReason,
    /// Time of the first unsafe rating.
    pub first_fire: Option<f64>,
}

fn outcome(verdicts: &[Verdict], reason: GradeReason) -> GradeOutcome {
    GradeOutcome {
        pass: reason == GradeReason::Passed,
        reason,
        first_fire: verdicts.iter().find(|v| !v.s_tot).map(|v| v.t_abs),
    }
}

/// Grades a verdict timeline against an envelope.
pub fn grade(verdicts: &[Verdict], envelope: &SafetyEnvelope) -> GradeOutcome {
    if let Some(v) = verdicts
        .iter()
        .find(|v| v.t_abs < envelope.t_earliest && !v.s_tot)
    {
        return outcome(verdicts, GradeReason::Premature { t: v.t_abs });
    }
    if !envelope.is_no_fire() {
        let fired_in_time = verdicts
            .iter()
            .any(|v| !v.s_tot && v.t_abs <= envelope.t_latest);
        if !fired_in_time {
            return outcome(verdicts, GradeReason::Missed);
        }
        if let Some(v) = verdicts
            .iter()
            .find(|v| v.t_abs > envelope.t_latest && v.s_tot)
        {
            return outcome(verdicts, GradeReason::Relapsed { t: v.t_abs });
        }
    }
    outcome(verdicts, GradeReason::Passed)
}

/// Direct evaluation of whether `target` is violated in a frame.
pub fn constraint_violated(sup: &Supervisor, frame: &ScenarioFrame, target: FaultTarget) -> bool {
    let cands = [
        (&frame.driving, TrajectoryKind::Driving),
        (&frame.emergency, TrajectoryKind::Emergency),
    ];
    let params = &sup.vehicle;
    let any_point = |f: &dyn Fn(usize, &crate::TrajectoryPoint) -> bool| {
        cands
            .iter()
            .any(|(t, _)| t.points.iter().enumerate().any(|(i, p)| f(i, p)))
    };
    let id = match target {
        FaultTarget::InputValidation => {
            return cands.iter().any(|(t, k)| !validate_as(t, *k).is_empty());
        }
        FaultTarget::Check(id) => id,
    };
    match id {
        CheckId::CombinedAccel => any_point(&|i, p| {
            combined_accel_force(p, params.mass) > frame.snapshot.mu.at(i) * params.normal_force()
        }),
        CheckId::StaticCollision => any_point(&|_, p| {
            sup.map
                .signed_distance_to_bounds(&footprint(p.pose(), params))
                < 0.0
        }),
        CheckId::Rules => sup
            .rules
            .v_max
            .is_some_and(|v_max| any_point(&|_, p| p.v > v_max)),
        CheckId::PoseMatch => cands.iter().any(|(t, _)| {
            let ego = frame.snapshot.ego_pose.position();
            t.points
                .iter()
                .take(sup.config.match_window.max(1))
                .all(|p| p.position().distance(ego) > sup.config.pose_threshold)
        }),
        CheckId::DynamicLimits => any_point(&|_, p| {
            p.kappa.abs() * params.turn_radius_min > 1.0
                || p.ax < -params.a_brake_max
                || p.ax > params.engine.max_accel(p.v)
        }),
        CheckId::RssLongitudinal | CheckId::RssLateral => cands.iter().any(|(t, _)| {
            check_dynamic_objects(
                t,
                &frame.snapshot.objects,
                &sup.map,
                params,
                &sup.rss,
                &sup.rules,
            )
            .map_or(true, |p| p.first_danger.is_some())
        }),
    }
}

/// Grades a fault scenario frame by frame against the direct oracle.
pub fn grade_specific(
    scenario: &Scenario,
    verdicts: &[Verdict],
    target: FaultTarget,
) -> GradeOutcome {
    let fired = |v: &Verdict| match target {
        FaultTarget::Check(id) => v.check_fired(id),
        FaultTarget::InputValidation => {
            !v.driving.violations.is_empty() || !v.emergency.violations.is_empty()
        }
    };
    let mut any = false;
    for (frame, v) in scenario.frames.iter().zip(verdicts) {
        let violated = constraint_violated(&scenario.supervisor, frame, target);
        if violated {
            any = true;
            if v.s_tot || !fired(v) {
                return outcome(verdicts, GradeReason::MissedFrame { t: v.t_abs });
            }
        } else if fired(v) {
            return outcome(verdicts, GradeReason::SpuriousFrame { t: v.t_abs });
        }
    }
    if !any || !verdicts.iter().any(|v| !v.s_tot) {
        return outcome(verdicts, GradeReason::NeverFired);
    }
    outcome(verdicts, GradeReason::Passed)
}

/// Envelope used to grade a scenario, if it is graded by envelope.
pub fn envelope_for(scenario: &Scenario) -> Result<Option<SafetyEnvelope>> {
    match scenario.expected {
        Expected::NoFire => Ok(Some(SafetyEnvelope::NO_FIRE)),
        Expected::FireInEnvelope => ground_truth_envelope(scenario).map(Some),
        Expected::FireSpecificCheck(_) => Ok(None),
    }
}

/// Grades a replay according to the scenario's expectation.
pub fn grade_scenario(scenario: &Scenario, verdicts: &[Verdict]) -> Result<GradeOutcome> {
    match scenario.expected {
        Expected::FireSpecificCheck(target) => Ok(grade_specific(scenario, verdicts, target)),
        _ => {
            let env = envelope_for(scenario)?.unwrap_or(SafetyEnvelope::NO_FIRE);
            Ok(grade(verdicts, &env))
        }
    }
}

/// Faults that turn an all-safe scenario into one a specific check must
/// catch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fault {
    /// Scales every driving-trajectory velocity; curvature is kept, so
    /// lateral demand grows with the square of the scale.
    FrictionExceed { scale: f64 },
    /// Shifts the driving trajectory along the track normal [m, left
    /// positive].
    BoundCollision { offset: f64 },
    /// Adds to every driving-trajectory velocity [m/s].
    RuleViolation { dv: f64 },
    /// Moves the reported ego pose sideways relative to its heading [m].
    PoseMismatch { offset: f64 },
    /// Adds to every driving-trajectory acceleration [m/s²].
    EngineOverdrive { dax: f64 },
    /// Sets the final emergency-trajectory speed [m/s].
    EmergencyNotStopping { final_speed: f64 },
}

impl Fault {
    pub fn tag(&self) -> &'static str {
        match self {
            Fault::FrictionExceed { .. } => "friction-exceed",
            Fault::BoundCollision { .. } => "bound-collision",
            Fault::RuleViolation { .. } => "rule-violation",
            Fault::PoseMismatch { .. } => "pose-mismatch",
            Fault::EngineOverdrive { .. } => "engine-overdrive",
            Fault::EmergencyNotStopping { .. } => "emergency-not-stopping",
        }
    }

    pub fn target(&self) -> FaultTarget {
        match self {
            Fault::FrictionExceed { .. } => FaultTarget::Check(CheckId::CombinedAccel),
            Fault::BoundCollision { .. } => FaultTarget::Check(CheckId::StaticCollision),
            Fault::RuleViolation { .. } => FaultTarget::Check(CheckId::Rules),
            Fault::PoseMismatch { .. } => FaultTarget::Check(CheckId::PoseMatch),
            Fault::EngineOverdrive { .. } => FaultTarget::Check(CheckId::DynamicLimits),
            Fault::EmergencyNotStopping { .. } => FaultTarget::InputValidation,
        }
    }

    /// True for parameters that leave the scenario unchanged.
    pub fn is_identity(&self) -> bool {
        match *self {
            Fault::FrictionExceed { scale } => scale == 1.0,
            Fault::BoundCollision { offset } | Fault::PoseMismatch { offset } => offset == 0.0,
            Fault::RuleViolation { dv } => dv == 0.0,
            Fault::EngineOverdrive { dax } => dax == 0.0,
            // the emergency speed is overwritten, so there is no neutral value
            Fault::EmergencyNotStopping { .. } => false,
        }
    }
}

/// Applies `fault` to every frame. Identity parameters return the scenario
/// unchanged; otherwise the expectation becomes the fault's target check
/// and the fault tag is appended to the name.
pub fn inject_fault(scenario: &Scenario, fault: Fault) -> Scenario {
    if fault.is_identity() {
        return scenario.clone();
    }
    let mut out = scenario.clone();
    out.name = format!("{}_{}", scenario.name, fault.tag());
    out.expected = Expected::FireSpecificCheck(fault.target());
    let map = &scenario.supervisor.map;
    for frame in &mut out.frames {
        match fault {
            Fault::FrictionExceed { scale } => {
                frame.driving.points.iter_mut().for_each(|p| p.v *= scale)
            }
            Fault::RuleViolation { dv } => frame.driving.points.iter_mut().for_each(|p| p.v += dv),
            Fault::EngineOverdrive { dax } => {
                frame.driving.points.iter_mut().for_each(|p| p.ax += dax)
            }
            Fault::BoundCollision { offset } => {
                for p in &mut frame.driving.points {
                    let normal = match map.project_with_heading(p.position()) {
                        Ok((_, heading)) => Vec2::from_angle(heading).perp(),
                        Err(_) => Vec2::from_angle(p.psi).perp(),
                    };
                    p.x += normal.x * offset;
                    p.y += normal.y * offset;
                }
            }
            Fault::PoseMismatch { offset } => {
                let pose = &mut frame.snapshot.ego_pose;
                let normal = Vec2::from_angle(pose.psi).perp();
                pose.x += normal.x * offset;
                pose.y += normal.y * offset;
            }
            Fault::EmergencyNotStopping { final_speed } => {
                if let Some(last) = frame.emergency.points.last_mut() {
                    last.v = final_speed;
                }
            }
        }
    }
    out
}

/// Friction demand of a trajectory point as a fraction of the available
/// grip.
pub fn friction_usage(p: &crate::TrajectoryPoint, mu: f64) -> f64 {
    math::sqrt(p.ax * p.ax + (p.v * p.v * p.kappa) * (p.v * p.v * p.kappa)) / (mu * G)
}
