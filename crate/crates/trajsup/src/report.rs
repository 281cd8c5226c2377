//! Replay with latency measurement, score CSVs, text reports and SVG score
//! timelines.
//!
//! Score CSV columns: `t_abs,s_tot,s_stat,r_lon,r_lat,pose_match,a_comb,dyn_limits,rules,action`.
//! Each check column holds the smaller margin of the two candidates with six
//! decimals; `inf` marks an unbounded margin (nothing to check against) and
//! `nan` a check that could not be evaluated. `s_tot` is `1` for safe.

use std::fmt::{self, Write as _};
use std::time::Instant;

use trajsup_core::scenario::{
    envelope_for, grade_scenario, Expected, GradeOutcome, SafetyEnvelope, Scenario,
};
use trajsup_core::{CheckId, Verdict};

use crate::error::{IoError, IoResult};

pub const SCORES_HEADER: &str =
    "t_abs,s_tot,s_stat,r_lon,r_lat,pose_match,a_comb,dyn_limits,rules,action";

/// Per-step wall-clock latency of `evaluate_step` [µs].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencyStats {
    pub samples: usize,
    pub median_us: f64,
    pub p99_us: f64,
    pub max_us: f64,
}

impl LatencyStats {
    /// Nearest-rank statistics; `None` without samples.
    pub fn from_samples(samples_us: &[f64]) -> Option<Self> {
        if samples_us.is_empty() {
            return None;
        }
        let mut v = samples_us.to_vec();
        v.sort_by(f64::total_cmp);
        let rank = |p: f64| v[((p * v.len() as f64).ceil() as usize).clamp(1, v.len()) - 1];
        Some(Self {
            samples: v.len(),
            median_us: rank(0.5),
            p99_us: rank(0.99),
            max_us: v[v.len() - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub name: String,
    pub expected: Expected,
    pub outcome: GradeOutcome,
    pub envelope: Option<SafetyEnvelope>,
    pub frames: usize,
    /// Minimum over frames of each check's margin, in [`CheckId::ALL`] order.
    pub min_margins: [f64; 7],
    pub latency: LatencyStats,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub verdicts: Vec<Verdict>,
    pub report: RunReport,
}

/// Replays a scenario, timing each supervisor step, and grades it.
pub fn run_scenario(scenario: &Scenario) -> IoResult<RunOutcome> {
    let mut verdicts = Vec::with_capacity(scenario.frames.len());
    let mut samples = Vec::with_capacity(scenario.frames.len());
    let mut replay = scenario.replay_iter();
    loop {
        let start = Instant::now();
        let Some(v) = replay.next() else { break };
        samples.push(start.elapsed().as_secs_f64() * 1e6);
        verdicts.push(v);
    }
    let origin = scenario.name.as_str();
    let envelope = envelope_for(scenario).map_err(|e| IoError::invalid(origin, e))?;
    let outcome = grade_scenario(scenario, &verdicts).map_err(|e| IoError::invalid(origin, e))?;
    let latency = LatencyStats::from_samples(&samples).ok_or_else(|| {
        IoError::invalid(
            origin,
            trajsup_core::Error::InvalidScenario {
                frame: 0,
                reason: "scenario has no frames".into(),
            },
        )
    })?;
    let mut min_margins = [f64::INFINITY; 7];
    for (k, id) in CheckId::ALL.into_iter().enumerate() {
        for v in &verdicts {
            let m = v.min_margin(id);
            if m.is_nan() || m < min_margins[k] {
                min_margins[k] = m;
            }
            if m.is_nan() {
                break;
            }
        }
    }
    let report = RunReport {
        name: scenario.name.clone(),
        expected: scenario.expected,
        outcome,
        envelope,
        frames: verdicts.len(),
        min_margins,
        latency,
    };
    Ok(RunOutcome { verdicts, report })
}

/// Locale-independent margin text.
pub fn format_margin(m: f64) -> String {
    if m.is_nan() {
        "nan".into()
    } else if m >= f64::MAX {
        "inf".into()
    } else if m == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{m:.6}")
    }
}

fn format_time(t: f64) -> String {
    if t.is_finite() {
        format!("{t:.6}")
    } else {
        format_margin(t)
    }
}

pub fn scores_csv(verdicts: &[Verdict]) -> String {
    let mut out = String::from(SCORES_HEADER);
    out.push('\n');
    for v in verdicts {
        let _ = write!(out, "{},{}", format_time(v.t_abs), u8::from(v.s_tot));
        for id in CheckId::ALL {
            let _ = write!(out, ",{}", format_margin(v.min_margin(id)));
        }
        let _ = writeln!(out, ",{}", v.action.as_str());
    }
    out
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.outcome.pass { "PASS" } else { "FAIL" };
        writeln!(f, "scenario: {}", self.name)?;
        writeln!(f, "expected: {}", self.expected)?;
        writeln!(f, "result: {verdict} ({})", self.outcome.reason)?;
        match self.envelope {
            Some(e) if e.is_no_fire() => writeln!(f, "envelope: no fire")?,
            Some(e) => writeln!(
                f,
                "envelope: [{}, {}] s",
                format_time(e.t_earliest),
                format_time(e.t_latest)
            )?,
            None => writeln!(f, "envelope: none (graded per frame)")?,
        }
        match self.outcome.first_fire {
            Some(t) => writeln!(f, "first fire: {} s", format_time(t))?,
            None => writeln!(f, "first fire: none")?,
        }
        writeln!(f, "frames: {}", self.frames)?;
        writeln!(f, "min margins:")?;
        for (id, m) in CheckId::ALL.iter().zip(self.min_margins) {
            writeln!(f, "  {:<10} {}", id.as_str(), format_margin(m))?;
        }
        writeln!(
            f,
            "step latency [us]: median {:.1}, p99 {:.1}, max {:.1} over {} steps",
            self.latency.median_us, self.latency.p99_us, self.latency.max_us, self.latency.samples
        )
    }
}

/// One row of a score timeline.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub t_abs: f64,
    pub s_tot: bool,
    pub margins: [f64; 7],
    /// Per-check classification, in [`CheckId::ALL`] order.
    pub safe: [bool; 7],
    pub action: String,
}

impl ScoreRow {
    pub fn from_verdict(v: &Verdict) -> Self {
        Self {
            t_abs: v.t_abs,
            s_tot: v.s_tot,
            margins: CheckId::ALL.map(|id| v.min_margin(id)),
            safe: CheckId::ALL.map(|id| !v.check_fired(id)),
            action: v.action.as_str().to_owned(),
        }
    }
}

/// Reads a score CSV. The file carries margins only, so per-check safety
/// is taken from the margin sign.
pub fn parse_scores_csv(text: &str, origin: &str) -> IoResult<Vec<ScoreRow>> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == SCORES_HEADER => {}
        _ => {
            return Err(IoError::parse(
                origin,
                1,
                "header",
                format!("expected `{SCORES_HEADER}`"),
            ))
        }
    }
    let cols: Vec<&str> = SCORES_HEADER.split(',').collect();
    lines
        .map(|(i, l)| {
            let line = i + 1;
            let f: Vec<&str> = l.trim().split(',').collect();
            if f.len() != cols.len() {
                return Err(IoError::parse(
                    origin,
                    line,
                    "row",
                    format!("expected {} fields", cols.len()),
                ));
            }
            let num = |k: usize| {
                f[k].parse::<f64>().map_err(|_| {
                    IoError::parse(origin, line, cols[k], format!("not a number: `{}`", f[k]))
                })
            };
            let s_tot = match f[1] {
                "1" => true,
                "0" => false,
                _ => return Err(IoError::parse(origin, line, "s_tot", "expected 0 or 1")),
            };
            let mut margins = [0.0; 7];
            for (k, m) in margins.iter_mut().enumerate() {
                *m = num(k + 2)?;
            }
            Ok(ScoreRow {
                t_abs: num(0)?,
                s_tot,
                margins,
                safe: margins.map(|m| m >= 0.0),
                action: f[9].to_owned(),
            })
        })
        .collect()
}

/// Text summary of a score timeline: first unsafe time and minimum margin
/// per column.
pub fn summarize_scores(rows: &[ScoreRow]) -> String {
    let mut out = String::new();
    let first = |f: &dyn Fn(&ScoreRow) -> bool| {
        rows.iter().find(|r| f(r)).map_or("never".to_owned(), |r| {
            format!("{} s", format_time(r.t_abs))
        })
    };
    let _ = writeln!(out, "frames: {}", rows.len());
    let _ = writeln!(out, "{:<10} first unsafe", "s_tot");
    let _ = writeln!(out, "{:<10} {}", "", first(&|r| !r.s_tot));
    let _ = writeln!(
        out,
        "{:<10} {:>14} {:>14}",
        "check", "min margin", "first unsafe"
    );
    for (k, id) in CheckId::ALL.iter().enumerate() {
        let min = rows
            .iter()
            .map(|r| r.margins[k])
            .fold(f64::INFINITY, |a, m| {
                if m.is_nan() || a.is_nan() {
                    f64::NAN
                } else {
                    a.min(m)
                }
            });
        let _ = writeln!(
            out,
            "{:<10} {:>14} {:>14}",
            id.as_str(),
            format_margin(min),
            first(&|r| !r.safe[k])
        );
    }
    out
}

/// Self-contained SVG of the score timeline: one strip per score, green
/// where safe, red where unsafe, grey where not evaluable; the envelope is
/// shaded.
pub fn score_svg(rows: &[ScoreRow], envelope: Option<SafetyEnvelope>, title: &str) -> String {
    const W: f64 = 900.0;
    const LEFT: f64 = 90.0;
    const ROW: f64 = 26.0;
    const TOP: f64 = 30.0;
    // `None` is the total score, `Some(k)` the k-th check.
    let strips: Vec<(&str, Option<usize>)> = std::iter::once(("s_tot", None))
        .chain(
            CheckId::ALL
                .iter()
                .enumerate()
                .map(|(k, id)| (id.as_str(), Some(k))),
        )
        .collect();
    let value = |r: &ScoreRow, strip: Option<usize>| match strip {
        None => Some(r.s_tot),
        Some(k) => (!r.margins[k].is_nan()).then_some(r.safe[k]),
    };
    let h = TOP + ROW * strips.len() as f64 + 30.0;
    let (t0, t1) = match (rows.first(), rows.last()) {
        (Some(a), Some(b)) if b.t_abs > a.t_abs => (a.t_abs, b.t_abs),
        (Some(a), _) => (a.t_abs, a.t_abs + 1.0),
        _ => (0.0, 1.0),
    };
    let step = if rows.len() > 1 {
        (t1 - t0) / (rows.len() - 1) as f64
    } else {
        1.0
    };
    let span = t1 + step - t0;
    let x = |t: f64| LEFT + (t - t0) / span * (W - LEFT - 10.0);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<text x="{LEFT}" y="18">{}</text>"#, escape(title));
    for (i, (name, strip)) in strips.iter().enumerate() {
        let y = TOP + i as f64 * ROW;
        let _ = writeln!(
            out,
            r#"<text x="4" y="{:.1}">{name}</text>"#,
            y + ROW * 0.65
        );
        for (j, r) in rows.iter().enumerate() {
            let end = rows.get(j + 1).map_or(r.t_abs + step, |n| n.t_abs);
            let color = match value(r, *strip) {
                Some(true) => "#43a047",
                Some(false) => "#e53935",
                None => "#9e9e9e",
            };
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{y:.1}" width="{:.2}" height="{:.1}" fill="{color}"/>"#,
                x(r.t_abs),
                (x(end) - x(r.t_abs)).max(0.5),
                ROW - 4.0
            );
        }
    }
    if let Some(e) = envelope.filter(|e| !e.is_no_fire()) {
        let (a, b) = (x(e.t_earliest), x(e.t_latest));
        let _ = writeln!(
            out,
            r##"<rect x="{a:.2}" y="{TOP}" width="{:.2}" height="{:.1}" fill="#ffeb3b" fill-opacity="0.35" stroke="#f9a825"/>"##,
            (b - a).max(1.0),
            ROW * strips.len() as f64
        );
    }
    let axis_y = TOP + ROW * strips.len() as f64 + 16.0;
    for k in 0..=5 {
        let t = t0 + span * k as f64 / 5.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{axis_y:.1}">{t:.1} s</text>"#,
            x(t) - 10.0
        );
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
