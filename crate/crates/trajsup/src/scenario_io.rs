//! Scenario files.
//!
//! A scenario file is UTF-8 text: a header of `key = value` lines, a line
//! holding only `---`, then one frame record per line. Blank lines and lines
//! starting with `#` are ignored in both parts.
//!
//! ```text
//! name = cutoff
//! track = ../tracks/straight.csv
//! vehicle.mass = 800
//! ...
//! expected = fire-in-envelope
//! ---
//! 0; 50; 0; 0; 1; objects=[1,43,3,0,30,4.8,2]; driving=[0,50,0,0,0,30,0|0.1,53,0,0,0,30,0]; emergency=[...]
//! ```
//!
//! Header keys, in canonical order ([`HEADER_KEYS`]); keys with a default
//! may be omitted:
//!
//! | key | value |
//! |-----|-------|
//! | `name` | scenario name, used for output file names |
//! | `track` | track CSV path, relative to the scenario file |
//! | `track.corridor` | max projection distance [m], default 50 |
//! | `track.gap_mode` | `half-lap` (default) or `forward` |
//! | `vehicle.mass`, `.length`, `.width`, `.reaction_time`, `.a_brake_max`, `.turn_radius_min` | SI units |
//! | `vehicle.engine` | max acceleration over speed, `v:a,v:a,...` |
//! | `vehicle.reference` | `center` (default) or `rear-axle:<offset m>` |
//! | `rss.rho`, `.a_r_acc`, `.a_r_br`, `.a_f_br`, `.lat_rho`, `.a_lat_acc`, `.a_lat_br`, `.mu_lat_margin` | SI units |
//! | `rules.v_max` | speed limit [m/s] or `none` (default) |
//! | `rules.rear_responsibility` | `true` (default) or `false` |
//! | `supervisor.pose_threshold` | [m], default 1 |
//! | `supervisor.match_window` | points, default 3 |
//! | `supervisor.reverify_stored_emergency` | default `false` |
//! | `supervisor.checks` | `all` (default), `none` or a comma list of check ids |
//! | `objects.a_brake_max`, `objects.a_accel_max` | worst-case limits applied to every object |
//! | `expected` | `no-fire`, `fire-in-envelope` or `fire-check:<check id or input>` |
//!
//! Frame record, fields separated by `;`:
//!
//! ```text
//! t_abs; ego_x; ego_y; ego_psi; mu; objects=[id,x,y,psi,v,len,wid;...]; driving=[t,x,y,psi,kappa,v,ax|...]; emergency=[...]
//! ```
//!
//! Frame numbers may be `NaN` or `inf` so malformed inputs can be replayed.
//! [`write_scenario`] emits the canonical form; parsing and writing it again
//! reproduces the input byte for byte.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use trajsup_core::scenario::{Expected, Scenario, ScenarioFrame};
use trajsup_core::supervisor::CheckSet;
use trajsup_core::track::GapMode;
use trajsup_core::{
    CheckId, EngineCurve, Friction, ObjectState, PerceptionSnapshot, Pose, PoseReference,
    RssParameters, RuleSet, Supervisor, SupervisorConfig, TrackMap, Trajectory, TrajectoryKind,
    TrajectoryPoint, VehicleParameters,
};

use crate::error::{IoError, IoResult};
use crate::track_io::load_track;

pub const FRAME_SEPARATOR: &str = "---";

/// Known header keys in canonical order, with their defaults.
pub const HEADER_KEYS: [(&str, Option<&str>); 29] = [
    ("name", None),
    ("track", None),
    ("track.corridor", Some("50")),
    ("track.gap_mode", Some("half-lap")),
    ("vehicle.mass", None),
    ("vehicle.length", None),
    ("vehicle.width", None),
    ("vehicle.reaction_time", None),
    ("vehicle.a_brake_max", None),
    ("vehicle.engine", None),
    ("vehicle.turn_radius_min", None),
    ("vehicle.reference", Some("center")),
    ("rss.rho", None),
    ("rss.a_r_acc", None),
    ("rss.a_r_br", None),
    ("rss.a_f_br", None),
    ("rss.lat_rho", None),
    ("rss.a_lat_acc", None),
    ("rss.a_lat_br", None),
    ("rss.mu_lat_margin", None),
    ("rules.v_max", Some("none")),
    ("rules.rear_responsibility", Some("true")),
    ("supervisor.pose_threshold", Some("1")),
    ("supervisor.match_window", Some("3")),
    ("supervisor.reverify_stored_emergency", Some("false")),
    ("supervisor.checks", Some("all")),
    ("objects.a_brake_max", None),
    ("objects.a_accel_max", None),
    ("expected", None),
];

/// Worst-case limits assigned to every object of a scenario file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectLimits {
    pub a_brake_max: f64,
    pub a_accel_max: f64,
}

/// A scenario together with the file-level data needed to write it back.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFile {
    pub scenario: Scenario,
    pub track_path: String,
    pub objects: ObjectLimits,
}

/// Parses `key=value` override strings.
pub fn parse_overrides<S: AsRef<str>>(items: &[S]) -> IoResult<Vec<(String, String)>> {
    items
        .iter()
        .map(|s| {
            let s = s.as_ref();
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| IoError::Usage(format!("override `{s}` is not key=value")))?;
            let k = k.trim();
            if !HEADER_KEYS.iter().any(|(name, _)| *name == k) {
                return Err(IoError::Usage(format!("override of unknown key `{k}`")));
            }
            Ok((k.to_owned(), v.trim().to_owned()))
        })
        .collect()
}

struct Header<'a> {
    origin: &'a str,
    /// key -> (value, line); overrides carry line 0.
    values: BTreeMap<&'static str, (String, usize)>,
}

impl Header<'_> {
    fn raw(&self, key: &'static str) -> IoResult<(&str, usize)> {
        if let Some((v, line)) = self.values.get(key) {
            return Ok((v.as_str(), *line));
        }
        let default = HEADER_KEYS
            .iter()
            .find(|(k, _)| *k == key)
            .and_then(|(_, d)| *d);
        default
            .map(|d| (d, 0))
            .ok_or_else(|| IoError::parse(self.origin, 0, key, "missing required header key"))
    }

    fn get<T>(&self, key: &'static str, f: impl FnOnce(&str) -> Result<T, String>) -> IoResult<T> {
        let (v, line) = self.raw(key)?;
        f(v).map_err(|m| IoError::parse(self.origin, line, key, m))
    }

    fn num(&self, key: &'static str) -> IoResult<f64> {
        self.get(key, parse_finite)
    }
}

fn parse_finite(s: &str) -> Result<f64, String> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| format!("not a finite number: `{s}`"))
}

fn parse_num(s: &str) -> Result<f64, String> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| format!("not a number: `{s}`"))
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("expected `true` or `false`, found `{s}`")),
    }
}

fn parse_engine(s: &str) -> Result<EngineCurve, String> {
    let pts = s
        .split(',')
        .map(|pair| {
            let (v, a) = pair
                .split_once(':')
                .ok_or_else(|| format!("engine point `{pair}` is not v:a"))?;
            Ok((parse_finite(v)?, parse_finite(a)?))
        })
        .collect::<Result<Vec<_>, String>>()?;
    EngineCurve::new(pts).map_err(|e| e.to_string())
}

fn format_engine(e: &EngineCurve) -> String {
    e.points()
        .iter()
        .map(|(v, a)| format!("{v}:{a}"))
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_reference(s: &str) -> Result<PoseReference, String> {
    if s == "center" {
        return Ok(PoseReference::Center);
    }
    match s.strip_prefix("rear-axle:") {
        Some(d) => parse_finite(d).map(PoseReference::RearAxle),
        None => Err(format!(
            "expected `center` or `rear-axle:<offset>`, found `{s}`"
        )),
    }
}

fn format_reference(r: PoseReference) -> String {
    match r {
        PoseReference::Center => "center".into(),
        PoseReference::RearAxle(d) => format!("rear-axle:{d}"),
    }
}

fn parse_gap_mode(s: &str) -> Result<GapMode, String> {
    match s {
        "half-lap" => Ok(GapMode::HalfLap),
        "forward" => Ok(GapMode::Forward),
        _ => Err(format!("expected `half-lap` or `forward`, found `{s}`")),
    }
}

fn format_gap_mode(m: GapMode) -> &'static str {
    match m {
        GapMode::HalfLap => "half-lap",
        GapMode::Forward => "forward",
    }
}

fn parse_checks(s: &str) -> Result<CheckSet, String> {
    match s {
        "all" => return Ok(CheckSet::ALL),
        "none" => return Ok(CheckSet::NONE),
        _ => {}
    }
    s.split(',').try_fold(CheckSet::NONE, |set, id| {
        id.trim()
            .parse::<CheckId>()
            .map(|id| set.with(id))
            .map_err(|_| format!("unknown check `{}`", id.trim()))
    })
}

fn format_checks(set: CheckSet) -> String {
    if set == CheckSet::ALL {
        return "all".into();
    }
    if set == CheckSet::NONE {
        return "none".into();
    }
    CheckId::ALL
        .iter()
        .filter(|id| set.contains(**id))
        .map(|id| id.as_str())
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_v_max(s: &str) -> Result<Option<f64>, String> {
    if s == "none" {
        Ok(None)
    } else {
        parse_finite(s).map(Some)
    }
}

/// Splits at `sep` outside of square brackets.
fn split_top(s: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '[' => depth += 1,
            ']' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push(&s[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

struct FrameParser<'a> {
    origin: &'a str,
    line: usize,
    limits: ObjectLimits,
}

impl FrameParser<'_> {
    fn err(&self, field: impl Into<String>, msg: impl Into<String>) -> IoError {
        IoError::parse(self.origin, self.line, field, msg)
    }

    fn bracket<'s>(&self, field: &'s str, name: &str) -> IoResult<&'s str> {
        let f = field.trim();
        let rest = f
            .strip_prefix(name)
            .and_then(|r| r.trim_start().strip_prefix('='))
            .map(str::trim)
            .ok_or_else(|| self.err(name, format!("expected `{name}=[...]`, found `{f}`")))?;
        rest.strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| self.err(name, "list must be enclosed in `[` and `]`"))
    }

    fn numbers<const N: usize>(
        &self,
        s: &str,
        field: &str,
        names: [&str; N],
    ) -> IoResult<[f64; N]> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != N {
            return Err(self.err(field, format!("expected {N} values, found {}", parts.len())));
        }
        let mut out = [0.0; N];
        for (k, p) in parts.iter().enumerate() {
            out[k] = parse_num(p).map_err(|m| self.err(format!("{field}.{}", names[k]), m))?;
        }
        Ok(out)
    }

    fn objects(&self, inner: &str) -> IoResult<Vec<ObjectState>> {
        if inner.trim().is_empty() {
            return Ok(Vec::new());
        }
        inner
            .split(';')
            .enumerate()
            .map(|(i, o)| {
                let field = format!("objects[{i}]");
                let parts: Vec<&str> = o.split(',').map(str::trim).collect();
                let id = parts
                    .first()
                    .and_then(|p| p.parse::<u32>().ok())
                    .ok_or_else(|| {
                        self.err(format!("{field}.id"), "expected an unsigned integer")
                    })?;
                let rest = parts[1..].join(",");
                let [x, y, psi, v, length, width] =
                    self.numbers(&rest, &field, ["x", "y", "psi", "v", "len", "wid"])?;
                Ok(ObjectState {
                    id,
                    x,
                    y,
                    psi,
                    v,
                    length,
                    width,
                    a_brake_max: self.limits.a_brake_max,
                    a_accel_max: self.limits.a_accel_max,
                })
            })
            .collect()
    }

    fn trajectory(&self, inner: &str, name: &str, kind: TrajectoryKind) -> IoResult<Trajectory> {
        if inner.trim().is_empty() {
            return Ok(Trajectory::new(kind, Vec::new()));
        }
        let points = inner
            .split('|')
            .enumerate()
            .map(|(i, p)| {
                let [t, x, y, psi, kappa, v, ax] = self.numbers(
                    p,
                    &format!("{name}[{i}]"),
                    ["t", "x", "y", "psi", "kappa", "v", "ax"],
                )?;
                Ok(TrajectoryPoint {
                    t,
                    x,
                    y,
                    psi,
                    kappa,
                    v,
                    ax,
                })
            })
            .collect::<IoResult<Vec<_>>>()?;
        Ok(Trajectory::new(kind, points))
    }

    fn frame(&self, text: &str) -> IoResult<ScenarioFrame> {
        let fields = split_top(text, ';');
        if fields.len() != 8 {
            return Err(self.err(
                "frame",
                format!("expected 8 fields, found {}", fields.len()),
            ));
        }
        let mut head = [0.0; 5];
        for (k, name) in ["t_abs", "ego_x", "ego_y", "ego_psi", "mu"]
            .iter()
            .enumerate()
        {
            head[k] = parse_num(fields[k]).map_err(|m| self.err(*name, m))?;
        }
        let objects = self.objects(self.bracket(fields[5], "objects")?)?;
        let driving = self.trajectory(
            self.bracket(fields[6], "driving")?,
            "driving",
            TrajectoryKind::Driving,
        )?;
        let emergency = self.trajectory(
            self.bracket(fields[7], "emergency")?,
            "emergency",
            TrajectoryKind::Emergency,
        )?;
        Ok(ScenarioFrame {
            snapshot: PerceptionSnapshot {
                t_abs: head[0],
                ego_pose: Pose::new(head[1], head[2], head[3]),
                objects,
                mu: Friction::Uniform(head[4]),
            },
            driving,
            emergency,
        })
    }
}

/// Parses scenario text. `resolve_track` maps the header's `track` value to
/// a track; overrides replace header values before they are interpreted.
pub fn parse_scenario(
    text: &str,
    origin: &str,
    overrides: &[(String, String)],
    resolve_track: impl FnOnce(&str) -> IoResult<TrackMap>,
) -> IoResult<ScenarioFile> {
    let mut header = Header {
        origin,
        values: BTreeMap::new(),
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let mut separated = false;
    for (line, l) in lines.by_ref() {
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        if l == FRAME_SEPARATOR {
            separated = true;
            break;
        }
        let (k, v) = l.split_once('=').ok_or_else(|| {
            IoError::parse(
                origin,
                line,
                "header",
                format!("expected `key = value`, found `{l}`"),
            )
        })?;
        let k = k.trim();
        let key = HEADER_KEYS
            .iter()
            .map(|(name, _)| *name)
            .find(|name| *name == k)
            .ok_or_else(|| IoError::parse(origin, line, k, "unknown header key"))?;
        if header
            .values
            .insert(key, (v.trim().to_owned(), line))
            .is_some()
        {
            return Err(IoError::parse(origin, line, k, "duplicate header key"));
        }
    }
    if !separated {
        return Err(IoError::parse(
            origin,
            text.lines().count(),
            "header",
            format!("missing `{FRAME_SEPARATOR}` line before the frames"),
        ));
    }
    for (k, v) in overrides {
        let key = HEADER_KEYS
            .iter()
            .map(|(name, _)| *name)
            .find(|name| name == k)
            .ok_or_else(|| IoError::Usage(format!("override of unknown key `{k}`")))?;
        header.values.insert(key, (v.clone(), 0));
    }

    let vehicle = VehicleParameters {
        mass: header.num("vehicle.mass")?,
        length: header.num("vehicle.length")?,
        width: header.num("vehicle.width")?,
        reaction_time: header.num("vehicle.reaction_time")?,
        a_brake_max: header.num("vehicle.a_brake_max")?,
        engine: header.get("vehicle.engine", parse_engine)?,
        turn_radius_min: header.num("vehicle.turn_radius_min")?,
        reference: header.get("vehicle.reference", parse_reference)?,
    };
    let rss = RssParameters {
        rho: header.num("rss.rho")?,
        a_r_acc: header.num("rss.a_r_acc")?,
        a_r_br: header.num("rss.a_r_br")?,
        a_f_br: header.num("rss.a_f_br")?,
        lat_rho: header.num("rss.lat_rho")?,
        a_lat_acc: header.num("rss.a_lat_acc")?,
        a_lat_br: header.num("rss.a_lat_br")?,
        mu_lat_margin: header.num("rss.mu_lat_margin")?,
    };
    let rules = RuleSet {
        v_max: header.get("rules.v_max", parse_v_max)?,
        rear_responsibility: header.get("rules.rear_responsibility", parse_bool)?,
    };
    let config = SupervisorConfig {
        pose_threshold: header.num("supervisor.pose_threshold")?,
        match_window: header.get("supervisor.match_window", |s| {
            s.parse::<usize>()
                .map_err(|_| format!("not a count: `{s}`"))
        })?,
        reverify_stored_emergency: header
            .get("supervisor.reverify_stored_emergency", parse_bool)?,
        enabled: header.get("supervisor.checks", parse_checks)?,
    };
    let limits = ObjectLimits {
        a_brake_max: header.num("objects.a_brake_max")?,
        a_accel_max: header.num("objects.a_accel_max")?,
    };
    let expected = header.get("expected", |s| s.parse::<Expected>())?;
    let name = header.get("name", |s| {
        if s.is_empty() || s.contains(['/', '\\']) {
            Err(format!("`{s}` is not usable as a file name"))
        } else {
            Ok(s.to_owned())
        }
    })?;
    let corridor = header.num("track.corridor")?;
    let gap_mode = header.get("track.gap_mode", parse_gap_mode)?;
    let (track_path, _) = header.raw("track")?;
    let track_path = track_path.to_owned();

    let mut frames = Vec::new();
    for (line, l) in lines {
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let parser = FrameParser {
            origin,
            line,
            limits,
        };
        frames.push(parser.frame(l)?);
    }

    let map = resolve_track(&track_path)?
        .with_corridor(corridor)
        .with_gap_mode(gap_mode);
    let scenario = Scenario {
        name,
        supervisor: Supervisor::new(map, vehicle, rss, rules).with_config(config),
        frames,
        expected,
    };
    scenario
        .validate()
        .map_err(|e| IoError::invalid(origin, e))?;
    Ok(ScenarioFile {
        scenario,
        track_path,
        objects: limits,
    })
}

/// Reads a scenario file; the track path is resolved against the file's
/// directory.
pub fn load_scenario(path: &Path, overrides: &[(String, String)]) -> IoResult<ScenarioFile> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    let dir = path.parent().unwrap_or(Path::new("."));
    parse_scenario(&text, &path.display().to_string(), overrides, |track| {
        load_track(&dir.join(track))
    })
}

fn write_point(out: &mut String, p: &TrajectoryPoint) {
    let _ = write!(
        out,
        "{},{},{},{},{},{},{}",
        p.t, p.x, p.y, p.psi, p.kappa, p.v, p.ax
    );
}

fn write_trajectory(out: &mut String, name: &str, t: &Trajectory) {
    let _ = write!(out, "{name}=[");
    for (i, p) in t.points.iter().enumerate() {
        if i > 0 {
            out.push('|');
        }
        write_point(out, p);
    }
    out.push(']');
}

/// Canonical text of a scenario file. Per-point friction is written as the
/// first point's value.
pub fn write_scenario(file: &ScenarioFile) -> String {
    let s = &file.scenario;
    let sup = &s.supervisor;
    let v = &sup.vehicle;
    let r = &sup.rss;
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    kv("name", s.name.clone());
    kv("track", file.track_path.clone());
    kv("track.corridor", sup.map.corridor().to_string());
    kv("track.gap_mode", format_gap_mode(sup.map.gap_mode()).into());
    kv("vehicle.mass", v.mass.to_string());
    kv("vehicle.length", v.length.to_string());
    kv("vehicle.width", v.width.to_string());
    kv("vehicle.reaction_time", v.reaction_time.to_string());
    kv("vehicle.a_brake_max", v.a_brake_max.to_string());
    kv("vehicle.engine", format_engine(&v.engine));
    kv("vehicle.turn_radius_min", v.turn_radius_min.to_string());
    kv("vehicle.reference", format_reference(v.reference));
    kv("rss.rho", r.rho.to_string());
    kv("rss.a_r_acc", r.a_r_acc.to_string());
    kv("rss.a_r_br", r.a_r_br.to_string());
    kv("rss.a_f_br", r.a_f_br.to_string());
    kv("rss.lat_rho", r.lat_rho.to_string());
    kv("rss.a_lat_acc", r.a_lat_acc.to_string());
    kv("rss.a_lat_br", r.a_lat_br.to_string());
    kv("rss.mu_lat_margin", r.mu_lat_margin.to_string());
    kv(
        "rules.v_max",
        sup.rules.v_max.map_or("none".into(), |x| x.to_string()),
    );
    kv(
        "rules.rear_responsibility",
        sup.rules.rear_responsibility.to_string(),
    );
    kv(
        "supervisor.pose_threshold",
        sup.config.pose_threshold.to_string(),
    );
    kv(
        "supervisor.match_window",
        sup.config.match_window.to_string(),
    );
    kv(
        "supervisor.reverify_stored_emergency",
        sup.config.reverify_stored_emergency.to_string(),
    );
    kv("supervisor.checks", format_checks(sup.config.enabled));
    kv("objects.a_brake_max", file.objects.a_brake_max.to_string());
    kv("objects.a_accel_max", file.objects.a_accel_max.to_string());
    kv("expected", s.expected.to_string());
    out.push_str(FRAME_SEPARATOR);
    out.push('\n');
    for f in &s.frames {
        let snap = &f.snapshot;
        let _ = write!(
            out,
            "{}; {}; {}; {}; {}; objects=[",
            snap.t_abs,
            snap.ego_pose.x,
            snap.ego_pose.y,
            snap.ego_pose.psi,
            snap.mu.at(0)
        );
        for (i, o) in snap.objects.iter().enumerate() {
            if i > 0 {
                out.push(';');
            }
            let _ = write!(
                out,
                "{},{},{},{},{},{},{}",
                o.id, o.x, o.y, o.psi, o.v, o.length, o.width
            );
        }
        out.push_str("]; ");
        write_trajectory(&mut out, "driving", &f.driving);
        out.push_str("; ");
        write_trajectory(&mut out, "emergency", &f.emergency);
        out.push('\n');
    }
    out
}
