//! Synthesized scenario corpus.
//!
//! The shipped files under `fixtures/` are generated by these functions and
//! checked against them in tests. Regenerate with
//! `TRAJSUP_REGEN_FIXTURES=1 cargo test -p trajsup --test fixtures`.
//!
//! | scenario | track | content | expected |
//! |----------|-------|---------|----------|
//! | `cutoff` | straight | object beside and slightly behind dips toward the ego, overtakes, cuts in and brakes | fire in envelope |
//! | `cut_in_brake` | straight | object ahead in the next lane cuts in and brakes | fire in envelope |
//! | `rear_exemption` | straight | object just behind with lateral overlap, ego ahead | no fire |
//! | `lap` | oval | one lap at 80 % friction usage | no fire |
//! | `lap_*` | oval | the lap with one injected fault | targeted check fires |

use std::f64::consts::PI;
use std::path::Path;

use trajsup_core::scenario::{inject_fault, Expected, Fault, Scenario, ScenarioFrame};
use trajsup_core::track::TrackSample;
use trajsup_core::{
    EngineCurve, Friction, ObjectState, PerceptionSnapshot, Pose, PoseReference, RssParameters,
    RuleSet, Supervisor, TrackMap, Trajectory, TrajectoryKind, TrajectoryPoint, VehicleParameters,
};

use crate::error::{IoError, IoResult};
use crate::scenario_io::{write_scenario, ObjectLimits, ScenarioFile};
use crate::track_io::{infer_closed, write_track};

pub const STRAIGHT_TRACK: &str = "straight_800.csv";
pub const OVAL_TRACK: &str = "oval.csv";

/// Oval geometry: straight length and curve radius [m].
pub const OVAL_STRAIGHT: f64 = 200.0;
pub const OVAL_RADIUS: f64 = 60.0;
/// Lap speed giving 80 % friction usage in the curves at mu = 1.
pub const LAP_SPEED: f64 = 21.7;

const OBJECTS: ObjectLimits = ObjectLimits {
    a_brake_max: 10.0,
    a_accel_max: 2.0,
};

fn round(x: f64, digits: i32) -> f64 {
    let k = 10f64.powi(digits);
    let r = (x * k).round() / k;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn r4(x: f64) -> f64 {
    round(x, 4)
}

pub fn vehicle() -> VehicleParameters {
    VehicleParameters {
        mass: 800.0,
        length: 4.8,
        width: 2.0,
        reaction_time: 0.3,
        a_brake_max: 10.0,
        engine: EngineCurve::new(vec![(0.0, 8.0), (40.0, 6.0), (80.0, 2.0)]).expect("valid curve"),
        turn_radius_min: 5.0,
        reference: PoseReference::Center,
    }
}

pub fn rss() -> RssParameters {
    RssParameters {
        rho: 0.3,
        a_r_acc: 2.0,
        a_r_br: 10.0,
        a_f_br: 10.0,
        lat_rho: 0.2,
        a_lat_acc: 2.0,
        a_lat_br: 4.0,
        mu_lat_margin: 0.1,
    }
}

pub fn rules() -> RuleSet {
    RuleSet {
        v_max: Some(80.0),
        rear_responsibility: true,
    }
}

pub fn straight_samples() -> Vec<TrackSample> {
    (0..=80)
        .map(|i| {
            let x = 10.0 * i as f64;
            TrackSample {
                s: x,
                x,
                y: 0.0,
                n_left: 7.5,
                n_right: 7.5,
            }
        })
        .collect()
}

pub fn oval_length() -> f64 {
    2.0 * OVAL_STRAIGHT + 2.0 * PI * OVAL_RADIUS
}

/// Pose and curvature on the oval's center line, driven counter-clockwise
/// from the start of the lower straight.
pub fn oval_pose(s: f64) -> (Pose, f64) {
    let (l, r) = (OVAL_STRAIGHT, OVAL_RADIUS);
    let arc = PI * r;
    let s = s.rem_euclid(oval_length());
    if s < l {
        (Pose::new(s, -r, 0.0), 0.0)
    } else if s < l + arc {
        let a = -PI / 2.0 + (s - l) / r;
        (
            Pose::new(l + r * a.cos(), r * a.sin(), a + PI / 2.0),
            1.0 / r,
        )
    } else if s < 2.0 * l + arc {
        (Pose::new(l - (s - l - arc), r, PI), 0.0)
    } else {
        let a = PI / 2.0 + (s - 2.0 * l - arc) / r;
        (Pose::new(r * a.cos(), r * a.sin(), a + PI / 2.0), 1.0 / r)
    }
}

pub fn oval_samples() -> Vec<TrackSample> {
    let n = (oval_length() / 2.0).ceil() as usize;
    let step = oval_length() / n as f64;
    (0..n)
        .map(|i| {
            let s = i as f64 * step;
            let (p, _) = oval_pose(s);
            TrackSample {
                s: r4(s),
                x: r4(p.x),
                y: r4(p.y),
                n_left: 5.0,
                n_right: 5.0,
            }
        })
        .collect()
}

fn track_map(samples: &[TrackSample]) -> TrackMap {
    TrackMap::from_samples(samples, infer_closed(samples)).expect("fixture track is valid")
}

fn point(t: f64, pose: Pose, kappa: f64, v: f64, ax: f64) -> TrajectoryPoint {
    TrajectoryPoint {
        t: round(t, 6),
        x: r4(pose.x),
        y: r4(pose.y),
        psi: round(pose.psi, 6),
        kappa: round(kappa, 6),
        v: r4(v),
        ax: r4(ax),
    }
}

/// Constant-speed driving trajectory along `path` (arc distance to pose and
/// curvature).
fn cruise(path: &dyn Fn(f64) -> (Pose, f64), v: f64, n: usize, dt: f64) -> Trajectory {
    let pts = (0..n)
        .map(|i| {
            let t = i as f64 * dt;
            let (pose, kappa) = path(v * t);
            point(t, pose, kappa, v, 0.0)
        })
        .collect();
    Trajectory::new(TrajectoryKind::Driving, pts)
}

/// Braking to standstill at `decel` along `path`, sampled every `dt` and at
/// the stopping time.
fn brake(path: &dyn Fn(f64) -> (Pose, f64), v: f64, decel: f64, dt: f64) -> Trajectory {
    let t_stop = v / decel;
    let mut times: Vec<f64> = (0..)
        .map(|i| i as f64 * dt)
        .take_while(|t| *t < t_stop - 1e-9)
        .collect();
    times.push(t_stop);
    let pts = times
        .iter()
        .map(|&t| {
            let (pose, kappa) = path(v * t - 0.5 * decel * t * t);
            let moving = t < t_stop;
            let vt = if moving { v - decel * t } else { 0.0 };
            point(t, pose, kappa, vt, if moving { -decel } else { 0.0 })
        })
        .collect();
    Trajectory::new(TrajectoryKind::Emergency, pts)
}

fn straight_path(x0: f64) -> impl Fn(f64) -> (Pose, f64) {
    move |d| (Pose::new(x0 + d, 0.0, 0.0), 0.0)
}

fn smoothstep(t: f64, a: f64, b: f64) -> (f64, f64) {
    if t <= a {
        (0.0, 0.0)
    } else if t >= b {
        (1.0, 0.0)
    } else {
        let u = (t - a) / (b - a);
        (u * u * (3.0 - 2.0 * u), 6.0 * u * (1.0 - u) / (b - a))
    }
}

/// Object on the straight track from its longitudinal position and speed
/// and its lateral offset and rate.
fn straight_object(id: u32, s: f64, v_s: f64, n: f64, v_n: f64) -> ObjectState {
    ObjectState {
        id,
        x: r4(s),
        y: r4(n),
        psi: round(v_n.atan2(v_s), 6),
        v: r4(v_s.hypot(v_n)),
        length: 4.8,
        width: 2.0,
        a_brake_max: OBJECTS.a_brake_max,
        a_accel_max: OBJECTS.a_accel_max,
    }
}

fn straight_scenario(name: &str, expected: Expected, frames: Vec<ScenarioFrame>) -> ScenarioFile {
    ScenarioFile {
        scenario: Scenario {
            name: name.into(),
            supervisor: Supervisor::new(track_map(&straight_samples()), vehicle(), rss(), rules()),
            frames,
            expected,
        },
        track_path: format!("../tracks/{STRAIGHT_TRACK}"),
        objects: OBJECTS,
    }
}

fn ego_frame(
    t: f64,
    x: f64,
    v: f64,
    objects: Vec<ObjectState>,
    horizon: usize,
    decel: f64,
) -> ScenarioFrame {
    let path = straight_path(x);
    ScenarioFrame {
        snapshot: PerceptionSnapshot {
            t_abs: t,
            ego_pose: Pose::new(r4(x), 0.0, 0.0),
            objects,
            mu: Friction::Uniform(1.0),
        },
        driving: cruise(&path, v, horizon, 0.1),
        emergency: brake(&path, v, decel, 0.25),
    }
}

/// Cut-off: ego at 30 m/s; an object beside and 7 m behind dips laterally
/// toward the ego (exempt: the ego is ahead), overtakes to 30 m ahead, cuts
/// into the ego lane and brakes at 6 m/s² from 12 s. 15 s at 10 Hz.
pub fn cutoff() -> ScenarioFile {
    const V: f64 = 30.0;
    let frames = (0..=150)
        .map(|k| {
            let t = k as f64 / 10.0;
            let x = 50.0 + V * t;
            let (dip_in, dip_in_r) = smoothstep(t, 0.1, 0.5);
            let (dip_out, dip_out_r) = smoothstep(t, 1.2, 2.2);
            let (cut, cut_r) = smoothstep(t, 9.0, 11.0);
            let n = 3.0 - 1.2 * dip_in + 2.7 * dip_out - 4.5 * cut;
            let v_n = -1.2 * dip_in_r + 2.7 * dip_out_r - 4.5 * cut_r;
            let (pass, pass_r) = smoothstep(t, 2.5, 8.5);
            let (s, v_s) = if t <= 12.0 {
                (x - 7.0 + 37.0 * pass, V + 37.0 * pass_r)
            } else {
                let u = t - 12.0;
                (50.0 + V * 12.0 + 30.0 + V * u - 3.0 * u * u, V - 6.0 * u)
            };
            let obj = straight_object(1, s, v_s, n, v_n);
            ego_frame(t, x, V, vec![obj], 30, 8.0)
        })
        .collect();
    straight_scenario("cutoff", Expected::FireInEnvelope, frames)
}

/// Cut-in: ego at 20 m/s; an object 20 m ahead in the next lane at equal
/// speed moves into the ego lane over 1-3 s and brakes at 5 m/s² from 3 s.
/// 6 s at 10 Hz.
pub fn cut_in_brake() -> ScenarioFile {
    const V: f64 = 20.0;
    let frames = (0..=60)
        .map(|k| {
            let t = k as f64 / 10.0;
            let x = 30.0 + V * t;
            let (cut, cut_r) = smoothstep(t, 1.0, 3.0);
            let u = (t - 3.0).max(0.0);
            let obj = straight_object(
                2,
                x + 20.0 - 2.5 * u * u,
                V - 5.0 * u,
                4.0 - 4.0 * cut,
                -4.0 * cut_r,
            );
            ego_frame(t, x, V, vec![obj], 30, 8.0)
        })
        .collect();
    straight_scenario("cut_in_brake", Expected::FireInEnvelope, frames)
}

/// Ego 1.7 m (bumper to bumper) ahead of an object whose footprint overlaps
/// laterally; both at 30 m/s. 1 s at 10 Hz.
pub fn rear_exemption() -> ScenarioFile {
    const V: f64 = 30.0;
    let frames = (0..=10)
        .map(|k| {
            let t = k as f64 / 10.0;
            let x = 50.0 + V * t;
            let obj = straight_object(3, x - 6.5, V, 1.5, 0.0);
            ego_frame(t, x, V, vec![obj], 30, 8.0)
        })
        .collect();
    straight_scenario("rear_exemption", Expected::NoFire, frames)
}

/// One lap of the oval at [`LAP_SPEED`], one frame per second; emergency
/// trajectories brake at 3.5 m/s² along the lap.
pub fn lap() -> ScenarioFile {
    let samples = oval_samples();
    let v = LAP_SPEED;
    let lap_time = oval_length() / v;
    let frames = (0..)
        .map(|k| k as f64)
        .take_while(|t| *t <= lap_time)
        .map(|t| {
            let s0 = 10.0 + v * t;
            let path = move |d: f64| oval_pose(s0 + d);
            let (pose, _) = oval_pose(s0);
            ScenarioFrame {
                snapshot: PerceptionSnapshot {
                    t_abs: t,
                    ego_pose: Pose::new(r4(pose.x), r4(pose.y), round(pose.psi, 6)),
                    objects: Vec::new(),
                    mu: Friction::Uniform(1.0),
                },
                driving: cruise(&path, v, 30, 0.1),
                emergency: brake(&path, v, 3.5, 0.5),
            }
        })
        .collect();
    ScenarioFile {
        scenario: Scenario {
            name: "lap".into(),
            supervisor: Supervisor::new(track_map(&samples), vehicle(), rss(), rules()),
            frames,
            expected: Expected::NoFire,
        },
        track_path: format!("../tracks/{OVAL_TRACK}"),
        objects: OBJECTS,
    }
}

/// Faults injected into the lap, with the resulting scenario names.
pub fn lap_faults() -> Vec<(&'static str, Fault)> {
    vec![
        ("lap_friction_exceed", Fault::FrictionExceed { scale: 1.3 }),
        ("lap_bound_left", Fault::BoundCollision { offset: 6.0 }),
        ("lap_bound_right", Fault::BoundCollision { offset: -6.0 }),
        ("lap_rule_violation", Fault::RuleViolation { dv: 60.0 }),
        ("lap_pose_mismatch", Fault::PoseMismatch { offset: 2.0 }),
        ("lap_engine_overdrive", Fault::EngineOverdrive { dax: 8.0 }),
        (
            "lap_emergency_not_stopping",
            Fault::EmergencyNotStopping { final_speed: 5.0 },
        ),
    ]
}

/// All shipped scenarios, in file-name order.
pub fn corpus() -> Vec<ScenarioFile> {
    let base = lap();
    let mut out = vec![cut_in_brake(), cutoff()];
    out.push(base.clone());
    for (name, fault) in lap_faults() {
        let mut scenario = inject_fault(&base.scenario, fault);
        scenario.name = name.into();
        out.push(ScenarioFile {
            scenario,
            ..base.clone()
        });
    }
    out.push(rear_exemption());
    out.sort_by(|a, b| a.scenario.name.cmp(&b.scenario.name));
    out
}

/// File contents of the shipped fixtures, relative to the fixture root.
pub fn fixture_files() -> Vec<(String, String)> {
    let mut out = vec![
        (format!("tracks/{OVAL_TRACK}"), write_track(&oval_samples())),
        (
            format!("tracks/{STRAIGHT_TRACK}"),
            write_track(&straight_samples()),
        ),
    ];
    out.extend(
        corpus()
            .iter()
            .map(|f| (format!("corpus/{}.scn", f.scenario.name), write_scenario(f))),
    );
    out
}

/// Writes all fixtures below `root`.
pub fn write_fixtures(root: &Path) -> IoResult<()> {
    for (rel, text) in fixture_files() {
        let path = root.join(rel);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| IoError::io(dir, e))?;
        }
        std::fs::write(&path, text).map_err(|e| IoError::io(&path, e))?;
    }
    Ok(())
}
