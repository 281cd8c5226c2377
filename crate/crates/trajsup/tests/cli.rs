use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use trajsup::scenario_io::load_scenario;
use trajsup_core::scenario::{Expected, FaultTarget};
use trajsup_core::CheckId;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn corpus(name: &str) -> PathBuf {
    fixtures().join("corpus").join(name)
}

fn trajsup(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trajsup"))
        .args(args)
        .env_remove("SUPERVISOR_SCENARIO_PATH")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Copies the corpus and tracks into a fresh directory.
fn corpus_copy() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for sub in ["corpus", "tracks"] {
        std::fs::create_dir(dir.path().join(sub)).unwrap();
        for e in std::fs::read_dir(fixtures().join(sub)).unwrap() {
            let p = e.unwrap().path();
            std::fs::copy(&p, dir.path().join(sub).join(p.file_name().unwrap())).unwrap();
        }
    }
    dir
}

#[test]
fn run_all_safe_lap() {
    let out = tempfile::tempdir().unwrap();
    let o = trajsup(&["run", s(&corpus("lap.scn")), "--out", s(out.path())]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.path().join("lap_scores.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("t_abs,s_tot,s_stat,r_lon,r_lat,pose_match,a_comb,dyn_limits,rules,action")
    );
    for l in lines {
        let f: Vec<&str> = l.split(',').collect();
        assert_eq!(f[1], "1", "{l}");
        assert_eq!((f[3], f[4]), ("inf", "inf"), "no traffic");
        assert_eq!(f[9], "execute_driving");
    }
    let report = std::fs::read_to_string(out.path().join("lap_report.txt")).unwrap();
    assert!(report.contains("result: PASS"), "{report}");
    assert!(report.contains("step latency [us]: median"));
}

#[test]
fn run_cutoff_transitions_inside_envelope() {
    let out = tempfile::tempdir().unwrap();
    let o = trajsup(&[
        "run",
        s(&corpus("cutoff.scn")),
        "-o",
        s(out.path()),
        "--svg",
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let report = stdout(&o);
    let env_line = report
        .lines()
        .find(|l| l.starts_with("envelope: ["))
        .unwrap();
    let nums: Vec<f64> = env_line
        .trim_start_matches("envelope: [")
        .trim_end_matches("] s")
        .split(", ")
        .map(|x| x.parse().unwrap())
        .collect();
    let csv = std::fs::read_to_string(out.path().join("cutoff_scores.csv")).unwrap();
    let rows: Vec<(f64, bool)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1] == "1")
        })
        .collect();
    let first_unsafe = rows.iter().find(|r| !r.1).unwrap().0;
    assert!(
        nums[0] <= first_unsafe && first_unsafe <= nums[1],
        "{first_unsafe} {nums:?}"
    );
    assert!(out.path().join("cutoff_scores.svg").exists());
}

#[test]
fn missing_track_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(corpus("rear_exemption.scn")).unwrap();
    let path = dir.path().join("x.scn");
    std::fs::write(&path, text).unwrap();
    let o = trajsup(&["run", s(&path), "-o", s(dir.path())]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("straight_800.csv"));
}

#[test]
fn missing_scenario_is_input_error() {
    assert_eq!(code(&trajsup(&["run", "/nonexistent/x.scn"])), 2);
    assert_eq!(code(&trajsup(&["run"])), 2, "usage error");
}

#[test]
fn scenario_search_root() {
    let out = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_trajsup"))
        .args(["run", "rear_exemption.scn", "-o", s(out.path())])
        .env("SUPERVISOR_SCENARIO_PATH", fixtures().join("corpus"))
        .current_dir(out.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn override_disables_exemption() {
    let out = tempfile::tempdir().unwrap();
    let path = corpus("rear_exemption.scn");
    let o = trajsup(&[
        "run",
        s(&path),
        "-o",
        s(out.path()),
        "--set",
        "rules.rear_responsibility=false",
    ]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("premature"), "{}", stdout(&o));
    let o = trajsup(&[
        "run",
        s(&path),
        "-o",
        s(out.path()),
        "--set",
        "rules.bogus=1",
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn batch_corpus_passes() {
    let out = tempfile::tempdir().unwrap();
    let o = trajsup(&[
        "batch",
        s(&fixtures().join("corpus")),
        "-o",
        s(out.path()),
        "--jobs",
        "4",
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("11/11 passed"), "{}", stdout(&o));
    let summary = std::fs::read_to_string(out.path().join("summary.txt")).unwrap();
    assert_eq!(summary, stdout(&o));
    assert!(out.path().join("cutoff_scores.csv").exists());
}

#[test]
fn batch_names_regression() {
    let dir = corpus_copy();
    let regressed = dir.path().join("corpus/lap_friction_exceed.scn");
    let text = std::fs::read_to_string(&regressed).unwrap();
    std::fs::write(
        &regressed,
        text.replace("expected = fire-check:a_comb", "expected = no-fire"),
    )
    .unwrap();
    let out = tempfile::tempdir().unwrap();
    let o = trajsup(&["batch", s(&dir.path().join("corpus")), "-o", s(out.path())]);
    assert_eq!(code(&o), 1);
    let text = stdout(&o);
    assert!(text.contains("10/11 passed"), "{text}");
    assert!(text.contains("failed: lap_friction_exceed"), "{text}");
}

#[test]
fn batch_empty_directory() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&trajsup(&["batch", s(dir.path())])), 2);
}

#[test]
fn batch_reports_broken_file_without_aborting() {
    let dir = corpus_copy();
    std::fs::write(dir.path().join("corpus/broken.scn"), "name = broken\n").unwrap();
    let out = tempfile::tempdir().unwrap();
    let o = trajsup(&["batch", s(&dir.path().join("corpus")), "-o", s(out.path())]);
    assert_eq!(code(&o), 2);
    let text = stdout(&o);
    assert!(
        text.contains("11/12 passed") && text.contains("ERROR"),
        "{text}"
    );
}

#[test]
fn inject_friction_and_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let base = corpus("lap.scn");
    let out = dir.path().join("friction.scn");
    let o = trajsup(&[
        "inject",
        s(&base),
        "--fault",
        "friction-exceed",
        "--scale",
        "1.3",
        "-o",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let f = load_scenario(&out, &[]).unwrap();
    assert_eq!(
        f.scenario.expected,
        Expected::FireSpecificCheck(FaultTarget::Check(CheckId::CombinedAccel))
    );
    assert_eq!(code(&trajsup(&["run", s(&out), "-o", s(dir.path())])), 0);

    let out = dir.path().join("bounds.scn");
    let o = trajsup(&[
        "inject",
        s(&base),
        "--fault",
        "bound-collision",
        "--offset",
        "6.0",
        "-o",
        s(&out),
    ]);
    assert_eq!(code(&o), 0);
    let f = load_scenario(&out, &[]).unwrap();
    assert_eq!(
        f.scenario.expected,
        Expected::FireSpecificCheck(FaultTarget::Check(CheckId::StaticCollision))
    );
    assert_eq!(code(&trajsup(&["run", s(&out), "-o", s(dir.path())])), 0);

    let o = trajsup(&[
        "inject",
        s(&base),
        "--fault",
        "bound-collision",
        "-o",
        s(&out),
    ]);
    assert_eq!(code(&o), 2, "missing --offset");
}

#[test]
fn inject_identity_keeps_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    let base = corpus("lap.scn");
    let out = dir.path().join("same.scn");
    let o = trajsup(&[
        "inject",
        s(&base),
        "--fault",
        "friction-exceed",
        "--scale",
        "1.0",
        "-o",
        s(&out),
    ]);
    assert_eq!(code(&o), 0);
    let a = load_scenario(&base, &[]).unwrap();
    let b = load_scenario(&out, &[]).unwrap();
    assert_eq!(a.scenario, b.scenario);
}

#[test]
fn report_command() {
    let out = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&trajsup(&[
            "run",
            s(&corpus("cutoff.scn")),
            "-o",
            s(out.path())
        ])),
        0
    );
    let svg = out.path().join("t.svg");
    let o = trajsup(&[
        "report",
        s(&out.path().join("cutoff_scores.csv")),
        "--svg",
        s(&svg),
    ]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("frames: 151"), "{text}");
    assert!(text.contains("r_lon"));
    assert!(std::fs::read_to_string(svg).unwrap().starts_with("<svg"));
    assert_eq!(code(&trajsup(&["report", s(&corpus("cutoff.scn"))])), 2);
}

#[test]
fn scores_are_byte_stable() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        assert_eq!(
            code(&trajsup(&[
                "run",
                s(&corpus("cut_in_brake.scn")),
                "-o",
                s(d.path())
            ])),
            0
        );
    }
    let read =
        |d: &tempfile::TempDir| std::fs::read(d.path().join("cut_in_brake_scores.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}
