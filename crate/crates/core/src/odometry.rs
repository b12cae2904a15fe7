//! Skid-steer forward kinematics and dead reckoning.
//!
//! The tread-to-body map for an ideal symmetric skid-steer vehicle is
//!
//! ```text
//! (v_x, v_y, ω_z)ᵀ = α / (2 x_icr) · [[0, 0], [x_icr, x_icr], [−1, 1]] · (V_l, V_r)ᵀ
//! ```
//!
//! so the lateral body velocity is identically zero and body **+y** is the
//! direction of travel. `α` absorbs mechanical effects (tyre pressure, belt
//! tension) and `x_icr` is the x offset of the instantaneous centre of
//! rotation; both are calibration inputs.

use serde::{Deserialize, Serialize};

use crate::geometry::{normalize_angle, Point2, Pose2};
use crate::math;
use crate::{Error, Result};

/// Below this yaw rate the arc integrator uses the straight-line limit.
pub const STRAIGHT_LINE_OMEGA: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TreadSpeeds {
    pub v_left: f64,
    pub v_right: f64,
}

impl TreadSpeeds {
    pub fn new(v_left: f64, v_right: f64) -> Self {
        Self { v_left, v_right }
    }
}

/// Body-frame velocity.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Twist {
    pub v_x: f64,
    pub v_y: f64,
    pub omega_z: f64,
}

impl Twist {
    pub const ZERO: Twist = Twist {
        v_x: 0.0,
        v_y: 0.0,
        omega_z: 0.0,
    };

    /// Forward speed `v` (body +y) and yaw rate `omega`.
    pub fn new(v: f64, omega: f64) -> Self {
        Self {
            v_x: 0.0,
            v_y: v,
            omega_z: omega,
        }
    }

    pub fn forward(&self) -> f64 {
        self.v_y
    }

    pub fn is_zero(&self) -> bool {
        self.v_x == 0.0 && self.v_y == 0.0 && self.omega_z == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KinematicParams {
    pub alpha: f64,
    pub x_icr: f64,
}

impl Default for KinematicParams {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            x_icr: 0.5,
        }
    }
}

impl KinematicParams {
    pub fn new(alpha: f64, x_icr: f64) -> Result<Self> {
        let p = Self { alpha, x_icr };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::config("kinematics.alpha", "must be > 0"));
        }
        if self.x_icr == 0.0 || !self.x_icr.is_finite() {
            return Err(Error::config("kinematics.x_icr", "must be non-zero"));
        }
        Ok(())
    }
}

/// Tread velocities → body twist, evaluated as the matrix product above.
pub fn tread_to_twist(treads: TreadSpeeds, params: &KinematicParams) -> Result<Twist> {
    params.validate()?;
    let k = params.alpha / (2.0 * params.x_icr);
    let (vl, vr) = (treads.v_left, treads.v_right);
    Ok(Twist {
        v_x: 0.0,
        v_y: k * (params.x_icr * vl + params.x_icr * vr),
        omega_z: k * (-vl + vr),
    })
}

/// Inverse of the (v_y, ω) rows of the kinematic map; `v_x` is ignored
/// because the vehicle cannot produce it.
pub fn twist_to_treads(twist: Twist, params: &KinematicParams) -> TreadSpeeds {
    let turn = params.x_icr * twist.omega_z;
    TreadSpeeds {
        v_left: (twist.v_y - turn) / params.alpha,
        v_right: (twist.v_y + turn) / params.alpha,
    }
}

/// Advances `pose` by a constant body twist over `dt` along the exact arc.
pub fn integrate_pose(pose: &Pose2, twist: Twist, dt: f64) -> Pose2 {
    let dtheta = twist.omega_z * dt;
    let local = if twist.omega_z.abs() < STRAIGHT_LINE_OMEGA {
        Point2::new(twist.v_x * dt, twist.v_y * dt)
    } else {
        let (s, c) = math::sin_cos(dtheta);
        let w = twist.omega_z;
        Point2::new(
            (s * twist.v_x - (1.0 - c) * twist.v_y) / w,
            ((1.0 - c) * twist.v_x + s * twist.v_y) / w,
        )
    };
    Pose2 {
        position: pose.position + local.rotated(pose.heading),
        heading: normalize_angle(pose.heading + dtheta),
    }
}

/// Accumulates odometry twists into a pose plus path length and unwrapped
/// heading change, which the turn and exit manoeuvres monitor.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DeadReckoner {
    pub pose: Pose2,
    pub distance: f64,
    pub yaw: f64,
}

impl DeadReckoner {
    pub fn new(pose: Pose2) -> Self {
        Self {
            pose,
            distance: 0.0,
            yaw: 0.0,
        }
    }

    pub fn update(&mut self, twist: Twist, dt: f64) {
        self.pose = integrate_pose(&self.pose, twist, dt);
        self.distance += math::hypot(twist.v_x, twist.v_y).abs() * dt;
        self.yaw += twist.omega_z * dt;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{FRAC_PI_2, PI};

    fn p(alpha: f64, x_icr: f64) -> KinematicParams {
        KinematicParams::new(alpha, x_icr).unwrap()
    }

    fn assert_twist(t: Twist, v_y: f64, omega: f64) {
        assert_eq!(t.v_x, 0.0);
        assert!((t.v_y - v_y).abs() < 1e-12, "v_y {} vs {}", t.v_y, v_y);
        assert!((t.omega_z - omega).abs() < 1e-12, "ω {} vs {}", t.omega_z, omega);
    }

    #[test]
    fn forward_examples() {
        assert_twist(tread_to_twist(TreadSpeeds::new(1.0, 1.0), &p(1.0, 0.4)).unwrap(), 1.0, 0.0);
        assert_twist(tread_to_twist(TreadSpeeds::new(-1.0, 1.0), &p(1.0, 0.5)).unwrap(), 0.0, 2.0);
        // α/(2x) = 0.95; v_y = 0.95·(0.4 + 0.6); ω = 0.95·0.4
        assert_twist(tread_to_twist(TreadSpeeds::new(0.8, 1.2), &p(0.95, 0.5)).unwrap(), 0.95, 0.38);
    }

    #[test]
    fn zero_icr_rejected() {
        let bad = KinematicParams { alpha: 1.0, x_icr: 0.0 };
        assert!(tread_to_twist(TreadSpeeds::new(1.0, 1.0), &bad).is_err());
        assert!(KinematicParams::new(0.0, 0.5).is_err());
    }

    #[test]
    fn inverse_examples() {
        let t = twist_to_treads(Twist::new(1.0, 0.0), &p(1.0, 0.5));
        assert_eq!((t.v_left, t.v_right), (1.0, 1.0));
        let t = twist_to_treads(Twist::new(0.0, 2.0), &p(1.0, 0.5));
        assert_eq!((t.v_left, t.v_right), (-1.0, 1.0));
        let t = twist_to_treads(Twist::new(0.95, 0.38), &p(0.95, 0.5));
        assert!((t.v_left - 0.8).abs() < 1e-12 && (t.v_right - 1.2).abs() < 1e-12);
    }

    #[test]
    fn integrate_examples() {
        let start = Pose2::new(0.0, 0.0, 0.0);
        let s = integrate_pose(&start, Twist::new(1.0, 0.0), 0.1);
        assert!(s.position.distance(Point2::new(0.0, 0.1)) < 1e-12);
        assert_eq!(s.heading, 0.0);

        let r = integrate_pose(&start, Twist::new(0.0, PI), 0.5);
        assert!((r.heading - FRAC_PI_2).abs() < 1e-12);
        assert_eq!(r.position, Point2::ORIGIN);

        // Unit circle, centre at (−1, 0): a quarter turn ends at (−1, 1).
        let q = integrate_pose(&start, Twist::new(1.0, 1.0), FRAC_PI_2);
        assert!(q.position.distance(Point2::new(-1.0, 1.0)) < 1e-12);
        assert!((q.heading - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn reckoner_tracks_distance_and_yaw() {
        let mut dr = DeadReckoner::new(Pose2::default());
        for _ in 0..50 {
            dr.update(Twist::new(0.5, 0.0), 0.02);
        }
        assert!((dr.distance - 0.5).abs() < 1e-12);
        for _ in 0..100 {
            dr.update(Twist::new(0.0, PI), 0.02);
        }
        assert!((dr.yaw - 2.0 * PI).abs() < 1e-9);
    }
}
