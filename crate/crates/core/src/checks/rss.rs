//! Worst-case minimum gaps between two vehicles.

/// Worst-case maneuver parameters. Braking values are positive magnitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RssParameters {
    /// Longitudinal reaction time [s].
    pub rho: f64,
    /// Maximum acceleration of the rear vehicle during the reaction time.
    pub a_r_acc: f64,
    /// Minimum braking the rear vehicle is assured to apply.
    pub a_r_br: f64,
    /// Maximum braking of the front vehicle.
    pub a_f_br: f64,
    /// Lateral reaction time [s].
    pub lat_rho: f64,
    /// Maximum lateral acceleration toward the other vehicle.
    pub a_lat_acc: f64,
    /// Minimum lateral braking.
    pub a_lat_br: f64,
    /// Fixed lateral fluctuation margin [m].
    pub mu_lat_margin: f64,
}

impl RssParameters {
    pub fn validate(&self) -> crate::Result<()> {
        let fields = [
            ("rss.rho", self.rho),
            ("rss.a_r_acc", self.a_r_acc),
            ("rss.a_r_br", self.a_r_br),
            ("rss.a_f_br", self.a_f_br),
            ("rss.lat_rho", self.lat_rho),
            ("rss.a_lat_acc", self.a_lat_acc),
            ("rss.a_lat_br", self.a_lat_br),
            ("rss.mu_lat_margin", self.mu_lat_margin),
        ];
        for (name, v) in fields {
            // reaction times, accelerations and the margin may be zero
            let nonneg = v.is_finite() && v >= 0.0;
            let brake = !name.ends_with("_br") || v > 0.0;
            if !(nonneg && brake) {
                return Err(crate::Error::InvalidParameter {
                    name,
                    reason: alloc::format!(
                        "must be finite and non-negative (braking > 0), got {v}"
                    ),
                });
            }
        }
        Ok(())
    }
}

/// Minimum longitudinal gap between a rear vehicle at `v_r` and a front
/// vehicle at `v_f` [m/s], clamped below at zero. A gap `d` is safe only if
/// `d > rss_lon_min_gap(..)`.
pub fn rss_lon_min_gap(v_f: f64, v_r: f64, rss: &RssParameters) -> f64 {
    let rho = rss.rho;
    let v_r_after = v_r + rho * rss.a_r_acc;
    let rear =
        v_r * rho + 0.5 * rss.a_r_acc * rho * rho + v_r_after * v_r_after / (2.0 * rss.a_r_br);
    let front = v_f * v_f / (2.0 * rss.a_f_br);
    (rear - front).max(0.0)
}

/// Distance one agent covers toward the other before it has come to a
/// lateral stop, clamped at zero. `v` is the closing velocity.
fn lateral_reach(v: f64, rss: &RssParameters) -> f64 {
    let rho = rss.lat_rho;
    let v_after = (v + rho * rss.a_lat_acc).max(0.0);
    (v * rho + 0.5 * rss.a_lat_acc * rho * rho + v_after * v_after / (2.0 * rss.a_lat_br)).max(0.0)
}

/// Minimum lateral gap for two agents closing at `v_toward_1` and
/// `v_toward_2` [m/s] (positive means moving toward the other agent).
pub fn rss_lat_min_gap(v_toward_1: f64, v_toward_2: f64, rss: &RssParameters) -> f64 {
    rss.mu_lat_margin + lateral_reach(v_toward_1, rss) + lateral_reach(v_toward_2, rss)
}
