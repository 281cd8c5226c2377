//! Acceptance criteria. Runs without the libtest harness and prints one
//! PASS/FAIL line per criterion.

use std::path::PathBuf;
use std::time::Instant;

use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, TestRunner};

use trajsup::fixtures::{self, oval_pose, oval_samples, LAP_SPEED};
use trajsup::report::{run_scenario, scores_csv, LatencyStats};
use trajsup::scenario_io::{load_scenario, ScenarioFile};
use trajsup_core::checks::{check_friction, rss_lon_min_gap};
use trajsup_core::scenario::{
    friction_usage, ground_truth_envelope, replay, Expected, FaultTarget,
};
use trajsup_core::{
    Action, CheckId, Friction, ObjectState, PerceptionSnapshot, Pose, RssParameters,
    SupervisorState, TrackMap, Trajectory, TrajectoryKind, TrajectoryPoint, G,
};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/corpus")
}

fn load(name: &str) -> ScenarioFile {
    load_scenario(&corpus_dir().join(format!("{name}.scn")), &[]).expect("shipped scenario loads")
}

fn load_corpus() -> Vec<ScenarioFile> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "scn"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| load_scenario(p, &[]).unwrap())
        .collect()
}

/// Largest lead of the rear vehicle over the front one in the worst-case
/// maneuver, integrated at 1 ms. This is the smallest safe initial gap.
fn simulated_min_gap(v_f: f64, v_r: f64, rss: &RssParameters) -> f64 {
    const DT: f64 = 1e-3;
    let rho_steps = (rss.rho / DT).round() as usize;
    let step = |x: &mut f64, v: &mut f64, a: f64| {
        if *v + a * DT < 0.0 {
            *x += *v * *v / (2.0 * -a);
            *v = 0.0;
        } else {
            *x += *v * DT + 0.5 * a * DT * DT;
            *v += a * DT;
        }
    };
    let (mut x_f, mut v_f) = (0.0, v_f);
    let (mut x_r, mut v_r) = (0.0, v_r);
    let mut lead: f64 = 0.0;
    let mut k = 0;
    while k < rho_steps || v_r > 0.0 || v_f > 0.0 {
        let a_r = if k < rho_steps {
            rss.a_r_acc
        } else {
            -rss.a_r_br
        };
        step(&mut x_r, &mut v_r, a_r);
        step(&mut x_f, &mut v_f, -rss.a_f_br);
        lead = lead.max(x_r - x_f);
        k += 1;
    }
    lead
}

fn rss_grid() -> Check {
    let start = Instant::now();
    let speeds: Vec<f64> = (0..=8).map(|i| i as f64 * 5.0).collect();
    let accels = [4.0, 8.0, 12.0];
    let mut combos = 0;
    let mut worst: f64 = 0.0;
    for &rho in &[0.0, 0.25, 0.5, 1.0] {
        for &a_r_acc in &accels {
            for &a_r_br in &accels {
                // The closed form assumes the rear vehicle brakes no harder
                // than the front one.
                for &a_f_br in accels.iter().filter(|&&a| a >= a_r_br) {
                    let rss = RssParameters {
                        rho,
                        a_r_acc,
                        a_r_br,
                        a_f_br,
                        lat_rho: 0.2,
                        a_lat_acc: 2.0,
                        a_lat_br: 4.0,
                        mu_lat_margin: 0.1,
                    };
                    for &v_f in &speeds {
                        for &v_r in &speeds {
                            let d = rss_lon_min_gap(v_f, v_r, &rss);
                            let sim = simulated_min_gap(v_f, v_r, &rss);
                            worst = worst.max((d - sim).abs());
                            combos += 1;
                        }
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    ensure(combos >= 1000, || format!("only {combos} combinations"))?;
    ensure(worst <= 0.1, || format!("max deviation {worst:.4} m"))?;
    ensure(elapsed < 30.0, || format!("took {elapsed:.1} s"))?;
    Ok(format!(
        "{combos} combinations, max deviation {worst:.2e} m, {elapsed:.2} s"
    ))
}

fn friction_exact() -> Check {
    let vehicle = fixtures::vehicle();
    let mut runner = TestRunner::deterministic();
    let point =
        (0.0..30.0f64, -0.012..0.012f64, -9.0..9.0f64).prop_map(|(v, kappa, ax)| TrajectoryPoint {
            v,
            kappa,
            ax,
            ..Default::default()
        });
    let traj = (prop::collection::vec(point, 2..20), 0.6..1.6f64);
    let mut unsafe_count = 0;
    for _ in 0..100 {
        let (mut pts, mu) = traj.new_tree(&mut runner).unwrap().current();
        for (i, p) in pts.iter_mut().enumerate() {
            p.t = i as f64 * 0.1;
        }
        let traj = Trajectory::new(TrajectoryKind::Driving, pts);
        let got = check_friction(&traj, &Friction::Uniform(mu), &vehicle);
        let m = vehicle.mass;
        let (want, idx) = traj
            .points
            .iter()
            .map(|p| {
                let a_lat = p.v * p.v * p.kappa;
                let force = m * (p.ax * p.ax + a_lat * a_lat).sqrt();
                (mu * m * G - force) / (m * G)
            })
            .enumerate()
            .fold(
                (f64::INFINITY, 0),
                |(w, wi), (i, x)| if x < w { (x, i) } else { (w, wi) },
            );
        ensure(got.margin.to_bits() == want.to_bits(), || {
            format!("margin {} != {}", got.margin, want)
        })?;
        ensure(got.worst_index == Some(idx), || {
            "worst index differs".into()
        })?;
        ensure(got.safe == (want >= 0.0), || {
            "classification differs".into()
        })?;
        unsafe_count += usize::from(!got.safe);
    }

    let worked = |ax: f64, mu: f64| {
        let p = TrajectoryPoint {
            ax,
            ..Default::default()
        };
        let traj = Trajectory::new(
            TrajectoryKind::Driving,
            vec![p, TrajectoryPoint { t: 0.1, ..p }],
        );
        check_friction(&traj, &Friction::Uniform(mu), &vehicle)
    };
    let m = vehicle.mass;
    let hard = worked(10.0, 1.0);
    let soft = worked(5.0, 0.6);
    // demand 10 m/s² against 1.0·9.81, and 5 m/s² against 0.6·9.81 = 5.886
    ensure(
        !hard.safe && hard.margin == (1.0 * m * G - m * 10.0) / (m * G),
        || format!("10 vs 9.81: {hard:?}"),
    )?;
    ensure(
        soft.safe && soft.margin == (0.6 * m * G - m * 5.0) / (m * G),
        || format!("5 vs 5.886: {soft:?}"),
    )?;
    Ok(format!(
        "100 trajectories bit-exact ({unsafe_count} unsafe); 10 vs 9.81 unsafe, 5 vs 5.886 safe"
    ))
}

fn cutoff_pattern() -> Check {
    let start = Instant::now();
    let file = load("cutoff");
    let verdicts = replay(&file.scenario);
    let env = ground_truth_envelope(&file.scenario).map_err(|e| e.to_string())?;
    for v in verdicts.iter().filter(|v| v.t_abs < env.t_earliest) {
        ensure(v.s_tot, || {
            format!("unsafe at {} before t_earliest {}", v.t_abs, env.t_earliest)
        })?;
    }
    let first = verdicts
        .iter()
        .find(|v| !v.s_tot)
        .ok_or("never fired")?
        .t_abs;
    ensure(env.t_earliest <= first && first <= env.t_latest, || {
        format!(
            "first fire {first} outside [{}, {}]",
            env.t_earliest, env.t_latest
        )
    })?;
    for v in verdicts.iter().filter(|v| v.t_abs > env.t_latest) {
        ensure(!v.s_tot, || {
            format!("safe at {} after t_latest {}", v.t_abs, env.t_latest)
        })?;
    }
    let dip = verdicts.iter().find(|v| {
        v.t_abs < env.t_earliest
            && v.s_tot
            && v.min_margin(CheckId::RssLongitudinal) < 0.0
            && v.min_margin(CheckId::RssLateral) < 0.0
    });
    let dip = dip
        .ok_or("no exempted frame with negative RSS margins")?
        .t_abs;
    let elapsed = start.elapsed().as_secs_f64();
    ensure(elapsed < 5.0, || format!("took {elapsed:.1} s"))?;
    Ok(format!(
        "exempt dip at {dip} s, envelope [{}, {}] s, first fire {first} s, {elapsed:.2} s",
        env.t_earliest, env.t_latest
    ))
}

fn rear_exemption() -> Check {
    let mut file = load("rear_exemption");
    let verdicts = replay(&file.scenario);
    ensure(verdicts.iter().all(|v| v.s_tot), || {
        "exempt scenario fired".into()
    })?;
    let negative = verdicts
        .iter()
        .filter(|v| {
            v.min_margin(CheckId::RssLongitudinal) < 0.0 && v.min_margin(CheckId::RssLateral) < 0.0
        })
        .count();
    ensure(negative > 0, || "RSS margins never negative".into())?;
    file.scenario.supervisor.rules.rear_responsibility = false;
    let flipped = replay(&file.scenario);
    ensure(flipped.iter().all(|v| !v.s_tot), || {
        "not unsafe without the rule".into()
    })?;
    Ok(format!(
        "{negative}/{} frames with negative RSS margins rated safe; all unsafe without the rule",
        verdicts.len()
    ))
}

fn no_fire_lap() -> Check {
    let file = load("lap");
    let verdicts = replay(&file.scenario);
    for v in &verdicts {
        for cand in [&v.driving, &v.emergency] {
            ensure(cand.safe && cand.violations.is_empty(), || {
                format!("fired at {}", v.t_abs)
            })?;
            ensure(cand.checks.iter().all(|c| c.safe), || {
                format!("check fired at {}", v.t_abs)
            })?;
        }
        ensure(v.s_tot && v.action == Action::ExecuteDriving, || {
            format!("fired at {}", v.t_abs)
        })?;
    }
    let mut usage: f64 = 0.0;
    for f in &file.scenario.frames {
        let mu = f.snapshot.mu.at(0);
        for p in f.driving.points.iter().chain(&f.emergency.points) {
            usage = usage.max(friction_usage(p, mu));
        }
    }
    ensure(usage <= 0.9, || format!("friction usage {usage:.3}"))?;
    Ok(format!(
        "{} frames, zero fires, peak friction usage {:.1} %",
        verdicts.len(),
        usage * 100.0
    ))
}

fn fault_corpus() -> Check {
    let corpus = load_corpus();
    let mut categories = std::collections::BTreeSet::new();
    let mut failed = Vec::new();
    for f in &corpus {
        let run = run_scenario(&f.scenario).map_err(|e| e.to_string())?;
        if !run.report.outcome.pass {
            failed.push(f.scenario.name.clone());
        }
        match f.scenario.expected {
            Expected::FireSpecificCheck(FaultTarget::Check(id)) => {
                categories.insert(id.as_str().to_string());
            }
            Expected::FireSpecificCheck(FaultTarget::InputValidation) => {
                categories.insert("emergency_not_stopping".into());
            }
            Expected::FireInEnvelope => {
                categories.insert("rss_cut_off".into());
            }
            Expected::NoFire => {}
        }
    }
    let cats: Vec<String> = categories.into_iter().collect();
    ensure(corpus.len() >= 10, || {
        format!("only {} scenarios", corpus.len())
    })?;
    ensure(failed.is_empty(), || {
        format!("misclassified: {}", failed.join(", "))
    })?;
    ensure(cats.len() >= 7, || {
        format!("categories: {}", cats.join(", "))
    })?;
    Ok(format!(
        "{}/{} correct; categories: {}",
        corpus.len(),
        corpus.len(),
        cats.join(", ")
    ))
}

fn latency() -> Check {
    let map = TrackMap::from_samples(&oval_samples(), true).map_err(|e| e.to_string())?;
    let sup =
        trajsup_core::Supervisor::new(map, fixtures::vehicle(), fixtures::rss(), fixtures::rules());
    let v = LAP_SPEED;
    let frame = |s0: f64| {
        let driving: Vec<TrajectoryPoint> = (0..50)
            .map(|i| {
                let t = i as f64 * 0.1;
                let (p, kappa) = oval_pose(s0 + v * t);
                TrajectoryPoint {
                    t,
                    x: p.x,
                    y: p.y,
                    psi: p.psi,
                    kappa,
                    v,
                    ax: 0.0,
                }
            })
            .collect();
        let decel = 3.5;
        let t_stop = v / decel;
        let emergency: Vec<TrajectoryPoint> = (0..50)
            .map(|i| {
                let t = i as f64 * t_stop / 49.0;
                let (p, kappa) = oval_pose(s0 + v * t - 0.5 * decel * t * t);
                let vt = if i == 49 { 0.0 } else { v - decel * t };
                let ax = if i == 49 { 0.0 } else { -decel };
                TrajectoryPoint {
                    t,
                    x: p.x,
                    y: p.y,
                    psi: p.psi,
                    kappa,
                    v: vt,
                    ax,
                }
            })
            .collect();
        let objects: Vec<ObjectState> = [
            (-40.0, 3.0),
            (25.0, -3.0),
            (60.0, 3.0),
            (120.0, -3.0),
            (300.0, 0.0),
        ]
        .iter()
        .enumerate()
        .map(|(k, &(ds, n))| {
            let (p, _) = oval_pose(s0 + ds);
            let left = Pose::new(-p.psi.sin(), p.psi.cos(), 0.0);
            ObjectState {
                id: k as u32,
                x: p.x + left.x * n,
                y: p.y + left.y * n,
                psi: p.psi,
                v: v - 2.0,
                length: 4.8,
                width: 2.0,
                a_brake_max: 10.0,
                a_accel_max: 2.0,
            }
        })
        .collect();
        let (p0, _) = oval_pose(s0);
        (
            PerceptionSnapshot {
                t_abs: s0,
                ego_pose: p0,
                objects,
                mu: Friction::Uniform(1.0),
            },
            Trajectory::new(TrajectoryKind::Driving, driving),
            Trajectory::new(TrajectoryKind::Emergency, emergency),
        )
    };
    let frames: Vec<_> = (0..200).map(|k| frame(10.0 + k as f64 * 3.0)).collect();
    let mut samples = Vec::new();
    let mut state = SupervisorState::default();
    for _ in 0..10 {
        state = SupervisorState::default();
        for (snap, d, e) in &frames {
            let start = Instant::now();
            let (verdict, next) = sup.evaluate_step(state, snap, d, e);
            samples.push(start.elapsed().as_secs_f64() * 1e6);
            std::hint::black_box(verdict);
            state = next;
        }
    }
    std::hint::black_box(state);
    let stats = LatencyStats::from_samples(&samples).ok_or("no samples")?;
    ensure(stats.median_us < 1000.0, || {
        format!("median {:.0} us", stats.median_us)
    })?;
    ensure(stats.p99_us < 5000.0, || {
        format!("p99 {:.0} us", stats.p99_us)
    })?;

    let run = run_scenario(&load("cutoff").scenario).map_err(|e| e.to_string())?;
    ensure(
        run.report.latency.samples == run.report.frames
            && run.report.to_string().contains("latency"),
        || "latency missing from run report".into(),
    )?;
    Ok(format!(
        "{} steps: median {:.0} us, p99 {:.0} us, max {:.0} us",
        stats.samples, stats.median_us, stats.p99_us, stats.max_us
    ))
}

fn determinism() -> Check {
    let corpus = load_corpus();
    let render = || -> Vec<String> {
        corpus
            .iter()
            .map(|f| scores_csv(&replay(&f.scenario)))
            .collect()
    };
    let first = render();
    let second = std::thread::scope(|s| s.spawn(render).join().unwrap());
    let reloaded: Vec<String> = load_corpus()
        .iter()
        .map(|f| scores_csv(&replay(&f.scenario)))
        .collect();
    for (k, f) in corpus.iter().enumerate() {
        ensure(first[k] == second[k] && first[k] == reloaded[k], || {
            format!("{} differs between replays", f.scenario.name)
        })?;
    }
    let bytes: usize = first.iter().map(String::len).sum();
    Ok(format!(
        "{} score CSVs ({bytes} bytes) byte-identical across 3 replays",
        first.len()
    ))
}

fn state_machine() -> Check {
    let file = load("rear_exemption");
    let base = file.scenario.frames[0].clone();
    let sup = &file.scenario.supervisor;
    let mut runner = TestRunner::new(Config {
        cases: 512,
        failure_persistence: None,
        ..Config::default()
    });
    let steps = prop::collection::vec((any::<bool>(), any::<bool>(), any::<bool>()), 1..60);
    let result = runner.run(&steps, |steps| {
        let mut state = SupervisorState::default();
        let mut stored: Option<Trajectory> = None;
        for (i, &(d_ok, e_ok, input_ok)) in steps.iter().enumerate() {
            let mut snap = base.snapshot.clone();
            snap.t_abs = i as f64 * 0.1;
            snap.objects.clear();
            if !input_ok {
                snap.mu = Friction::Uniform(f64::NAN);
            }
            let mut d = base.driving.clone();
            if !d_ok {
                d.points.iter_mut().for_each(|p| p.v += 60.0);
            }
            let mut e = base.emergency.clone();
            e.points[0].ax -= i as f64 * 1e-3;
            if !e_ok {
                e.points.last_mut().unwrap().v = 4.0;
            }
            let (v, next) = sup.evaluate_step(state, &snap, &d, &e);
            let safe = d_ok && e_ok && input_ok;
            prop_assert_eq!(v.s_tot, safe, "conjunction at step {}", i);
            prop_assert_eq!(
                v.s_tot,
                v.driving.safe && v.emergency.safe && v.input_error.is_none()
            );
            let want = if safe {
                stored = Some(e.clone());
                Action::ExecuteDriving
            } else if stored.is_some() {
                Action::ExecuteStoredEmergency
            } else {
                Action::FullBrakeFault
            };
            prop_assert_eq!(v.action, want, "action at step {}", i);
            prop_assert_eq!(&next.stored_emergency, &stored);
            state = next;
        }
        Ok(())
    });
    result.map_err(|e| e.to_string())?;
    Ok("512 random step sequences: conjunction, recovery and fallback selection hold".into())
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 rss longitudinal gap vs 1 ms simulation", rss_grid),
        ("2 friction check exactness", friction_exact),
        ("3 cut-off scenario pattern", cutoff_pattern),
        ("4 rear-responsibility exemption", rear_exemption),
        ("5 no-fire lap", no_fire_lap),
        ("6 fault-injection corpus", fault_corpus),
        ("7 real-time latency", latency),
        ("8 determinism", determinism),
        ("9 state-machine properties", state_machine),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failures = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let result = std::panic::catch_unwind(run).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match result {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failures += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    if failures > 0 {
        std::process::exit(1);
    }
}
