//! Ego vehicle parameters, other traffic participants and footprints.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{ConvexPolygon, Pose, Vec2};
use crate::G;

/// Piecewise-linear map from velocity [m/s] to the maximum positive
/// longitudinal acceleration the drivetrain delivers [m/s²]. Values outside
/// the sampled range are held constant.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineCurve {
    points: Vec<(f64, f64)>,
}

impl EngineCurve {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter {
                name: "engine",
                reason: "curve needs at least one sample".into(),
            });
        }
        for (i, &(v, a)) in points.iter().enumerate() {
            if !(v.is_finite() && a.is_finite() && v >= 0.0 && a >= 0.0) {
                return Err(Error::InvalidParameter {
                    name: "engine",
                    reason: format!("sample {i} must be finite and non-negative"),
                });
            }
            if i > 0 && !(v > points[i - 1].0) {
                return Err(Error::InvalidParameter {
                    name: "engine",
                    reason: format!("velocities must increase (sample {i})"),
                });
            }
        }
        Ok(Self { points })
    }

    /// Constant acceleration limit at every velocity.
    pub fn constant(a: f64) -> Self {
        Self {
            points: alloc::vec![(0.0, a)],
        }
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn max_accel(&self, v: f64) -> f64 {
        let p = &self.points;
        if v <= p[0].0 {
            return p[0].1;
        }
        let k = p.partition_point(|&(pv, _)| pv <= v);
        if k >= p.len() {
            return p[p.len() - 1].1;
        }
        let (v0, a0) = p[k - 1];
        let (v1, a1) = p[k];
        a0 + (a1 - a0) * (v - v0) / (v1 - v0)
    }
}

/// Which body point a pose refers to.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum PoseReference {
    /// Geometric center of the footprint.
    #[default]
    Center,
    /// Rear axle, the given distance behind the geometric center [m].
    RearAxle(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct VehicleParameters {
    /// [kg]
    pub mass: f64,
    /// [m]
    pub length: f64,
    /// [m]
    pub width: f64,
    /// Reaction time [s].
    pub reaction_time: f64,
    /// Maximum braking deceleration, as a positive magnitude [m/s²].
    pub a_brake_max: f64,
    pub engine: EngineCurve,
    /// [m]
    pub turn_radius_min: f64,
    pub reference: PoseReference,
}

impl VehicleParameters {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mass", self.mass),
            ("length", self.length),
            ("width", self.width),
            ("reaction_time", self.reaction_time),
            ("a_brake_max", self.a_brake_max),
            ("turn_radius_min", self.turn_radius_min),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and > 0, got {v}"),
                });
            }
        }
        if let PoseReference::RearAxle(d) = self.reference {
            if !d.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "reference",
                    reason: "rear-axle offset must be finite".into(),
                });
            }
        }
        Ok(())
    }

    /// Normal force on flat ground without downforce [N].
    pub fn normal_force(&self) -> f64 {
        self.mass * G
    }

    /// Geometric center of the footprint for a pose.
    pub fn center_of(&self, pose: Pose) -> Vec2 {
        match self.reference {
            PoseReference::Center => pose.position(),
            PoseReference::RearAxle(d) => pose.position() + Vec2::from_angle(pose.psi) * d,
        }
    }
}

/// Oriented rectangle covering the vehicle at `pose`.
pub fn footprint(pose: Pose, params: &VehicleParameters) -> ConvexPolygon {
    ConvexPolygon::oriented_rect(
        params.center_of(pose),
        pose.psi,
        params.length,
        params.width,
    )
}

/// Another traffic participant as reported by perception. Positions refer
/// to the footprint center.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectState {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub psi: f64,
    pub v: f64,
    pub length: f64,
    pub width: f64,
    /// Maximum braking deceleration magnitude [m/s²].
    pub a_brake_max: f64,
    /// Maximum acceleration [m/s²].
    pub a_accel_max: f64,
}

impl ObjectState {
    pub fn pose(&self) -> Pose {
        Pose::new(self.x, self.y, self.psi)
    }

    pub fn footprint(&self) -> ConvexPolygon {
        ConvexPolygon::oriented_rect(Vec2::new(self.x, self.y), self.psi, self.length, self.width)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.x.is_finite()
            && self.y.is_finite()
            && self.psi.is_finite()
            && self.v.is_finite()
            && self.v >= 0.0
            && self.length > 0.0
            && self.width > 0.0
            && self.a_brake_max > 0.0
            && self.a_accel_max >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter {
                name: "object",
                reason: format!("object {} has invalid state", self.id),
            })
        }
    }
}

#[cfg(test)]
pub(crate) fn test_vehicle() -> VehicleParameters {
    VehicleParameters {
        mass: 1000.0,
        length: 4.0,
        width: 2.0,
        reaction_time: 0.3,
        a_brake_max: 10.0,
        engine: EngineCurve::new(alloc::vec![(0.0, 8.0), (40.0, 6.0), (80.0, 2.0)]).unwrap(),
        turn_radius_min: 5.0,
        reference: PoseReference::Center,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn axis_aligned_footprint() {
        let fp = footprint(Pose::new(0.0, 0.0, 0.0), &test_vehicle());
        for c in fp.vertices() {
            assert_eq!((c.x.abs(), c.y.abs()), (2.0, 1.0));
        }
    }

    #[test]
    fn rotated_footprint() {
        let fp = footprint(Pose::new(0.0, 0.0, FRAC_PI_2), &test_vehicle());
        for c in fp.vertices() {
            assert!((c.x.abs() - 1.0).abs() < 1e-12 && (c.y.abs() - 2.0).abs() < 1e-12);
        }
        assert!(fp.area() > 0.0, "counter-clockwise");
    }

    #[test]
    fn rotated_square_area() {
        let mut p = test_vehicle();
        p.length = 2.0;
        let fp = footprint(Pose::new(1.0, 1.0, FRAC_PI_4), &p);
        assert!((fp.area() - 4.0).abs() < 1e-12);
        assert!((fp.centroid() - Vec2::new(1.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn rear_axle_reference_shifts_center() {
        let mut p = test_vehicle();
        p.reference = PoseReference::RearAxle(1.5);
        let c = footprint(Pose::new(0.0, 0.0, 0.0), &p).centroid();
        assert!((c - Vec2::new(1.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn engine_curve_interpolates() {
        let e = test_vehicle().engine;
        assert_eq!(e.max_accel(0.0), 8.0);
        assert_eq!(e.max_accel(20.0), 7.0);
        assert_eq!(e.max_accel(60.0), 4.0);
        assert_eq!(e.max_accel(100.0), 2.0);
        assert!(EngineCurve::new(alloc::vec![(10.0, 1.0), (5.0, 1.0)]).is_err());
    }
}
