//! Worst-case gaps to other traffic participants along the trajectory.
//!
//! Gaps are decomposed in the track frame: the longitudinal gap runs along
//! the reference line bumper to bumper, the lateral gap side to side. Other
//! objects are predicted at constant velocity in the track frame; the
//! worst case lives in the minimum-gap formulas, not in the prediction.
//!
//! A trajectory point is dangerous with respect to an object when both gaps
//! are at or below their minimum and the ego is not exempt. With
//! rear-responsibility enabled, the ego is exempt from an object whose front
//! is strictly behind the ego's rear at the start of the trajectory.

use alloc::vec::Vec;

use super::rss::{rss_lat_min_gap, rss_lon_min_gap, RssParameters};
use super::rules::RuleSet;
use super::{CheckId, CheckResult, MinTracker};
use crate::error::Result;
use crate::math::{self, normalize_angle};
use crate::track::TrackMap;
use crate::trajectory::Trajectory;
use crate::vehicle::{ObjectState, VehicleParameters};

/// Outcome of the dynamic-object check: both scores share one
/// classification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicPair {
    pub r_lon: CheckResult,
    pub r_lat: CheckResult,
    /// First trajectory point rated dangerous, if any.
    pub first_danger: Option<usize>,
}

/// Half extents of an oriented rectangle along and across the track.
fn track_extents(length: f64, width: f64, rel_heading: f64) -> (f64, f64) {
    let (c, s) = (math::cos(rel_heading).abs(), math::sin(rel_heading).abs());
    (
        0.5 * (length * c + width * s),
        0.5 * (length * s + width * c),
    )
}

struct Agent {
    s: f64,
    n: f64,
    v_s: f64,
    v_n: f64,
    ext_s: f64,
    ext_n: f64,
}

pub fn check_dynamic_objects(
    traj: &Trajectory,
    objects: &[ObjectState],
    map: &TrackMap,
    params: &VehicleParameters,
    rss: &RssParameters,
    rules: &RuleSet,
) -> Result<DynamicPair> {
    let mut ego = Vec::with_capacity(traj.points.len());
    for p in &traj.points {
        let (f, heading) = map.project_with_heading(params.center_of(p.pose()))?;
        let rel = normalize_angle(p.psi - heading);
        let (ext_s, ext_n) = track_extents(params.length, params.width, rel);
        ego.push(Agent {
            s: f.s,
            n: f.n,
            v_s: p.v * math::cos(rel),
            v_n: p.v * math::sin(rel),
            ext_s,
            ext_n,
        });
    }

    let mut lon = MinTracker::new();
    let mut lat = MinTracker::new();
    let mut first_danger: Option<usize> = None;

    for obj in objects {
        let (f, heading) = map.project_with_heading(obj.pose().position())?;
        let rel = normalize_angle(obj.psi - heading);
        let (ext_s, ext_n) = track_extents(obj.length, obj.width, rel);
        let o0 = Agent {
            s: f.s,
            n: f.n,
            v_s: obj.v * math::cos(rel),
            v_n: obj.v * math::sin(rel),
            ext_s,
            ext_n,
        };

        let exempt = rules.rear_responsibility
            && ego
                .first()
                .is_some_and(|e| map.signed_gap(o0.s, e.s) - e.ext_s - o0.ext_s > 0.0);

        // ego as front vehicle, object as rear
        let ego_front = RssParameters {
            a_f_br: params.a_brake_max,
            a_r_acc: obj.a_accel_max,
            ..*rss
        };
        // object as front vehicle, ego as rear
        let obj_front = RssParameters {
            a_f_br: obj.a_brake_max,
            ..*rss
        };

        for (i, (e, p)) in ego.iter().zip(&traj.points).enumerate() {
            let s_o = o0.s + o0.v_s * p.t;
            let n_o = o0.n + o0.v_n * p.t;

            let ds = map.signed_gap(e.s, s_o);
            let d_lon = ds.abs() - e.ext_s - o0.ext_s;
            let d_lon_min = if ds >= 0.0 {
                rss_lon_min_gap(o0.v_s.max(0.0), e.v_s.max(0.0), &obj_front)
            } else {
                rss_lon_min_gap(e.v_s.max(0.0), o0.v_s.max(0.0), &ego_front)
            };

            let d_lat = (n_o - e.n).abs() - e.ext_n - o0.ext_n;
            let (ego_closing, obj_closing) = if n_o >= e.n {
                (e.v_n, -o0.v_n)
            } else {
                (-e.v_n, o0.v_n)
            };
            let d_lat_min = rss_lat_min_gap(ego_closing, obj_closing, rss);

            lon.push(i, d_lon - d_lon_min);
            lat.push(i, d_lat - d_lat_min);

            let dangerous = !(d_lon > d_lon_min) && !(d_lat > d_lat_min) && !exempt;
            if dangerous && first_danger.is_none_or(|k| i < k) {
                first_danger = Some(i);
            }
        }
    }

    let safe = first_danger.is_none();
    let result = |id, m: MinTracker| CheckResult {
        id,
        margin: m.value,
        safe,
        worst_index: first_danger.or(m.index),
    };
    Ok(DynamicPair {
        r_lon: result(CheckId::RssLongitudinal, lon),
        r_lat: result(CheckId::RssLateral, lat),
        first_danger,
    })
}
