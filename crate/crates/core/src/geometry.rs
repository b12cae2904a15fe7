//! Planar primitives shared by the perception, control and simulation code.
//!
//! World frame: x east, y north, angles counter-clockwise from +x. The robot
//! body frame follows the skid-steer kinematics in [`crate::odometry`]:
//! forward is body **+y**, body +x points to the robot's right. A positive
//! bearing relative to forward is therefore a turn to the left.

use core::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::math::{self, PI, TAU};
use crate::{Error, Result};

/// Slack applied to closed-boundary membership tests so that points
/// constructed exactly on a boundary are counted despite rounding.
pub const BOUNDARY_EPS: f64 = 1e-12;

/// Bearing of body-forward (+y) in the body frame's own angular convention.
pub const FORWARD_BEARING: f64 = math::FRAC_PI_2;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unit vector at `angle` radians from +x.
    pub fn from_angle(angle: f64) -> Self {
        let (s, c) = math::sin_cos(angle);
        Self { x: c, y: s }
    }

    pub fn from_polar(range: f64, bearing: f64) -> Self {
        Self::from_angle(bearing) * range
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn norm_sq(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn norm(&self) -> f64 {
        math::hypot(self.x, self.y)
    }

    pub fn distance(&self, other: Point2) -> f64 {
        (*self - other).norm()
    }

    pub fn distance_sq(&self, other: Point2) -> f64 {
        (*self - other).norm_sq()
    }

    pub fn dot(&self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z component of the 3D cross product.
    pub fn cross(&self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    /// Angle of the vector from +x, in (−π, π].
    pub fn angle(&self) -> f64 {
        math::atan2(self.y, self.x)
    }

    /// Counter-clockwise rotation by `angle`.
    pub fn rotated(&self, angle: f64) -> Point2 {
        let (s, c) = math::sin_cos(angle);
        Point2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// The vector rotated by +90°.
    pub fn perp(&self) -> Point2 {
        Point2::new(-self.y, self.x)
    }

    pub fn midpoint(&self, other: Point2) -> Point2 {
        Point2::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }

    /// Reflection across the body-forward axis (x → −x).
    pub fn mirrored(&self) -> Point2 {
        Point2::new(-self.x, self.y)
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Point2 {
        Point2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

/// Wraps an angle into (−π, π]. Inputs already in range are returned
/// unchanged, which makes the function exactly idempotent.
pub fn normalize_angle(theta: f64) -> f64 {
    if theta > -PI && theta <= PI {
        return theta;
    }
    let mut a = math::fmod(theta, TAU);
    if a > PI {
        a -= TAU;
    } else if a <= -PI {
        a += TAU;
    }
    a
}

/// Planar pose of the body frame in the world frame.
///
/// `heading` is the rotation of the body frame, so with the +y-forward
/// convention the robot travels along world angle `heading + π/2`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose2 {
    pub position: Point2,
    pub heading: f64,
}

impl Pose2 {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self {
            position: Point2::new(x, y),
            heading: normalize_angle(heading),
        }
    }

    /// Pose whose forward (+y) axis points along world angle `travel`.
    pub fn facing(x: f64, y: f64, travel: f64) -> Self {
        Self::new(x, y, travel - math::FRAC_PI_2)
    }

    /// Unit vector of body-forward in world coordinates.
    pub fn forward(&self) -> Point2 {
        Point2::from_angle(self.heading + math::FRAC_PI_2)
    }

    /// World angle the robot is travelling along.
    pub fn travel_angle(&self) -> f64 {
        normalize_angle(self.heading + math::FRAC_PI_2)
    }

    /// Expresses a world point in this pose's frame.
    pub fn to_local(&self, p: Point2) -> Point2 {
        transform_to_frame(p, self)
    }

    /// Maps a point in this pose's frame to world coordinates.
    pub fn to_world(&self, p: Point2) -> Point2 {
        transform_from_frame(p, self)
    }

    /// Expresses another pose relative to this one.
    pub fn relative(&self, other: &Pose2) -> Pose2 {
        let p = self.to_local(other.position);
        Pose2::new(p.x, p.y, other.heading - self.heading)
    }
}

/// Inverse rigid transform: world point → coordinates in `frame`.
pub fn transform_to_frame(p: Point2, frame: &Pose2) -> Point2 {
    (p - frame.position).rotated(-frame.heading)
}

/// Rigid transform: point in `frame` → world coordinates.
pub fn transform_from_frame(p: Point2, frame: &Pose2) -> Point2 {
    p.rotated(frame.heading) + frame.position
}

/// Unit vector at `angle`, with components below 1e-15 snapped to zero so
/// that axis-aligned frames (e.g. body-forward at π/2) are exact and mirror
/// images stay bit-for-bit symmetric.
pub fn axis_unit(angle: f64) -> Point2 {
    let snap = |v: f64| if v.abs() < 1e-15 { 0.0 } else { v };
    let (s, c) = math::sin_cos(angle);
    Point2::new(snap(c), snap(s))
}

/// Bearing of `v` measured counter-clockwise from `axis`, in (−π, π].
pub fn relative_bearing(v: Point2, axis: f64) -> f64 {
    let u = axis_unit(axis);
    math::atan2(u.cross(v), u.dot(v))
}

/// A sector with independently sized left and right halves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cone2 {
    pub apex: Point2,
    pub axis_heading: f64,
    pub left_half_angle: f64,
    pub right_half_angle: f64,
    pub length: f64,
}

impl Cone2 {
    /// Bearing of the bisector relative to the axis, positive to the left.
    pub fn bisector_offset(&self) -> f64 {
        0.5 * (self.left_half_angle - self.right_half_angle)
    }

    pub fn contains(&self, p: Point2) -> bool {
        point_in_cone(p, self)
    }
}

/// Closed membership: within `length` of the apex and at a bearing in
/// `[−right_half_angle, +left_half_angle]` around the axis.
pub fn point_in_cone(p: Point2, cone: &Cone2) -> bool {
    match cone_bearing(p, cone.apex, cone.axis_heading, cone.length) {
        Some(b) => {
            b >= -cone.right_half_angle - BOUNDARY_EPS && b <= cone.left_half_angle + BOUNDARY_EPS
        }
        None => false,
    }
}

/// Bearing of `p` around a cone axis, or `None` when `p` is farther than
/// `length` from the apex. The apex itself has bearing 0.
pub fn cone_bearing(p: Point2, apex: Point2, axis_heading: f64, length: f64) -> Option<f64> {
    let d = p - apex;
    let limit = length + BOUNDARY_EPS;
    if d.norm_sq() > limit * limit {
        return None;
    }
    if d.x == 0.0 && d.y == 0.0 {
        return Some(0.0);
    }
    Some(relative_bearing(d, axis_heading))
}

/// Oriented rectangle; `half_length` runs along `heading`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect2 {
    pub center: Point2,
    pub heading: f64,
    pub half_length: f64,
    pub half_width: f64,
}

impl Rect2 {
    /// Axis-aligned rectangle in body coordinates spanning
    /// `x ∈ [x_min, x_max]`, `y ∈ [y_min, y_max]`, long axis along body-forward.
    pub fn body_box(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Self {
            center: Point2::new(0.5 * (x_min + x_max), 0.5 * (y_min + y_max)),
            heading: FORWARD_BEARING,
            half_length: 0.5 * (y_max - y_min),
            half_width: 0.5 * (x_max - x_min),
        }
    }

    pub fn contains(&self, p: Point2) -> bool {
        point_in_rect(p, self)
    }

    pub fn count(&self, points: &[Point2]) -> usize {
        points.iter().filter(|p| self.contains(**p)).count()
    }
}

pub fn point_in_rect(p: Point2, rect: &Rect2) -> bool {
    let u = axis_unit(rect.heading);
    let d = p - rect.center;
    let local = Point2::new(u.dot(d), u.cross(d));
    local.x.abs() <= rect.half_length + BOUNDARY_EPS
        && local.y.abs() <= rect.half_width + BOUNDARY_EPS
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment2 {
    pub a: Point2,
    pub b: Point2,
}

impl Segment2 {
    pub fn new(a: Point2, b: Point2) -> Result<Self> {
        if a == b {
            return Err(Error::config("segment", "endpoints coincide"));
        }
        Ok(Self { a, b })
    }

    pub fn length(&self) -> f64 {
        self.a.distance(self.b)
    }

    /// Unit vector from `a` to `b`.
    pub fn direction(&self) -> Point2 {
        let d = self.b - self.a;
        d * (1.0 / d.norm())
    }

    /// Signed distance of `p` from the supporting line, positive on the left
    /// of the a→b direction.
    pub fn signed_offset(&self, p: Point2) -> f64 {
        self.direction().cross(p - self.a)
    }
}
