//! Track CSV files.
//!
//! One row per reference-line sample, semicolon separated, `.` as decimal
//! point, header row required:
//!
//! ```text
//! s;x;y;n_left;n_right
//! 0;0;0;5;5
//! 2;2;0;5;5
//! ```
//!
//! `n_left` and `n_right` are positive distances to the left and right
//! bound. A track is closed when its last sample lies within 1.5 mean
//! sample spacings of the first; the first sample is then not repeated.

use std::fmt::Write as _;
use std::path::Path;

use trajsup_core::track::TrackSample;
use trajsup_core::TrackMap;

use crate::error::{IoError, IoResult};

pub const TRACK_HEADER: [&str; 5] = ["s", "x", "y", "n_left", "n_right"];

pub fn parse_track_samples(text: &str, origin: &str) -> IoResult<Vec<TrackSample>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines
        .next()
        .ok_or_else(|| IoError::parse(origin, 1, "header", "empty track file"))?;
    let cols: Vec<&str> = header.split(';').map(str::trim).collect();
    if cols != TRACK_HEADER {
        return Err(IoError::parse(
            origin,
            hline,
            "header",
            format!("expected `{}`, found `{header}`", TRACK_HEADER.join(";")),
        ));
    }
    let mut out = Vec::new();
    for (line, row) in lines {
        let fields: Vec<&str> = row.split(';').map(str::trim).collect();
        if fields.len() != TRACK_HEADER.len() {
            return Err(IoError::parse(
                origin,
                line,
                "row",
                format!("expected 5 fields, found {}", fields.len()),
            ));
        }
        let mut v = [0.0; 5];
        for (k, (slot, f)) in v.iter_mut().zip(&fields).enumerate() {
            *slot = f
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| {
                    IoError::parse(
                        origin,
                        line,
                        TRACK_HEADER[k],
                        format!("not a finite number: `{f}`"),
                    )
                })?;
        }
        out.push(TrackSample {
            s: v[0],
            x: v[1],
            y: v[2],
            n_left: v[3],
            n_right: v[4],
        });
    }
    Ok(out)
}

/// Whether the samples describe a closed loop.
pub fn infer_closed(samples: &[TrackSample]) -> bool {
    if samples.len() < 3 {
        return false;
    }
    let dist = |a: &TrackSample, b: &TrackSample| (b.x - a.x).hypot(b.y - a.y);
    let total: f64 = samples.windows(2).map(|w| dist(&w[0], &w[1])).sum();
    let mean = total / (samples.len() - 1) as f64;
    dist(&samples[samples.len() - 1], &samples[0]) <= 1.5 * mean
}

pub fn parse_track(text: &str, origin: &str) -> IoResult<TrackMap> {
    let samples = parse_track_samples(text, origin)?;
    TrackMap::from_samples(&samples, infer_closed(&samples))
        .map_err(|e| IoError::invalid(origin, e))
}

pub fn load_track(path: &Path) -> IoResult<TrackMap> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    parse_track(&text, &path.display().to_string())
}

pub fn write_track(samples: &[TrackSample]) -> String {
    let mut out = TRACK_HEADER.join(";");
    out.push('\n');
    for r in samples {
        let _ = writeln!(out, "{};{};{};{};{}", r.s, r.x, r.y, r.n_left, r.n_right);
    }
    out
}
