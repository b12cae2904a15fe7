//! Corridor following between two plant rows.
//!
//! Each scan goes through the same chain:
//!
//! 1. grow an obstacle-free cone around body-forward, left and right halves
//!    independently, and take the bearing of its bisector;
//! 2. grow a rectangle on each flank until it holds enough points, giving the
//!    distance to each row and hence the offset from the corridor centre;
//! 3. combine both into a steering bearing, place a target point
//!    `lookahead` metres along it and drive the bearing error to zero with a
//!    PID on yaw rate;
//! 4. scale the forward speed down when something sits in a box straight
//!    ahead;
//! 5. watch a wide box in front of the robot: once it empties the row is
//!    over and the robot drives a fixed odometric distance out of it.
//!
//! All bearings are relative to body-forward (+y), positive to the left.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry::{cone_bearing, Cone2, Point2, Pose2, Rect2, BOUNDARY_EPS, FORWARD_BEARING};
use crate::math;
use crate::odometry::Twist;
use crate::scan::Scan2D;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Bound on |∫e dt|.
    pub integral_limit: f64,
}

impl Default for PidGains {
    fn default() -> Self {
        Self {
            kp: 1.2,
            ki: 0.0,
            kd: 0.1,
            integral_limit: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InRowConfig {
    pub cone_length: f64,
    pub cone_angle_step: f64,
    pub cone_max_half_angle: f64,
    pub cone_point_threshold: usize,
    pub side_rect_length: f64,
    pub side_rect_growth_step: f64,
    pub side_rect_max_width: f64,
    pub side_rect_point_threshold: usize,
    /// Radians of steering per metre of offset from the corridor centre.
    pub center_gain: f64,
    pub lookahead: f64,
    pub pid: PidGains,
    pub v_max: f64,
    /// Forward extent of the speed-governor box.
    pub governor_length: f64,
    /// Full lateral width of the speed-governor box.
    pub governor_width: f64,
    pub governor_stop_distance: f64,
    /// Forward extent of the row-end box.
    pub end_rect_length: f64,
    /// Full lateral width of the row-end box (corridor width plus margin).
    pub end_rect_width: f64,
    pub end_point_threshold: usize,
    pub exit_distance: f64,
    pub exit_speed: f64,
}

impl Default for InRowConfig {
    fn default() -> Self {
        Self {
            cone_length: 3.0,
            cone_angle_step: 1f64.to_radians(),
            cone_max_half_angle: 60f64.to_radians(),
            cone_point_threshold: 4,
            side_rect_length: 2.0,
            side_rect_growth_step: 0.05,
            side_rect_max_width: 2.0,
            side_rect_point_threshold: 5,
            center_gain: 0.5,
            lookahead: 1.0,
            pid: PidGains::default(),
            v_max: 1.0,
            governor_length: 2.0,
            governor_width: 0.5,
            governor_stop_distance: 1.0,
            end_rect_length: 3.0,
            end_rect_width: 3.0,
            end_point_threshold: 5,
            exit_distance: 1.0,
            exit_speed: 0.5,
        }
    }
}

impl InRowConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("in_row.cone_length", self.cone_length),
            ("in_row.cone_angle_step", self.cone_angle_step),
            ("in_row.cone_max_half_angle", self.cone_max_half_angle),
            ("in_row.side_rect_length", self.side_rect_length),
            ("in_row.side_rect_growth_step", self.side_rect_growth_step),
            ("in_row.side_rect_max_width", self.side_rect_max_width),
            ("in_row.lookahead", self.lookahead),
            ("in_row.v_max", self.v_max),
            ("in_row.governor_length", self.governor_length),
            ("in_row.governor_width", self.governor_width),
            ("in_row.end_rect_length", self.end_rect_length),
            ("in_row.end_rect_width", self.end_rect_width),
            ("in_row.exit_distance", self.exit_distance),
            ("in_row.exit_speed", self.exit_speed),
        ];
        for (field, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(field, "must be > 0"));
            }
        }
        if self.cone_max_half_angle >= math::FRAC_PI_2 {
            return Err(Error::config("in_row.cone_max_half_angle", "must be < pi/2"));
        }
        let counts = [
            ("in_row.cone_point_threshold", self.cone_point_threshold),
            ("in_row.side_rect_point_threshold", self.side_rect_point_threshold),
            ("in_row.end_point_threshold", self.end_point_threshold),
        ];
        for (field, v) in counts {
            if v < 1 {
                return Err(Error::config(field, "must be >= 1"));
            }
        }
        if !(self.governor_stop_distance >= 0.0 && self.governor_stop_distance < self.governor_length) {
            return Err(Error::config(
                "in_row.governor_stop_distance",
                "must lie in [0, governor_length)",
            ));
        }
        if !(self.center_gain >= 0.0) {
            return Err(Error::config("in_row.center_gain", "must be >= 0"));
        }
        Ok(())
    }

    /// Body-frame box whose nearest point governs the forward speed.
    pub fn governor_rect(&self) -> Rect2 {
        let hw = 0.5 * self.governor_width;
        Rect2::body_box(-hw, hw, 0.0, self.governor_length)
    }

    /// Body-frame box that empties at the end of the row.
    pub fn end_rect(&self) -> Rect2 {
        let hw = 0.5 * self.end_rect_width;
        Rect2::body_box(-hw, hw, 0.0, self.end_rect_length)
    }
}

/// Half-angle reached after `steps` enlargements.
fn step_angle(steps: u32, cfg: &InRowConfig) -> f64 {
    (steps as f64 * cfg.cone_angle_step).min(cfg.cone_max_half_angle)
}

/// Grows the free cone. Both sides step in lockstep: each round a side
/// tests one more step against the current cone and freezes when that step
/// would bring the in-cone count up to `cone_point_threshold`, or when it
/// reaches `cone_max_half_angle`. When each step is allowed alone but both
/// together would reach the threshold, both sides freeze, so a mirrored scan
/// yields the mirrored cone.
pub fn find_cone(scan: &Scan2D, cfg: &InRowConfig) -> Cone2 {
    let mut bearings: Vec<f64> = scan
        .points
        .iter()
        .filter_map(|p| cone_bearing(*p, Point2::ORIGIN, FORWARD_BEARING, cfg.cone_length))
        .collect();
    bearings.sort_by(f64::total_cmp);
    let count = |l: u32, r: u32| {
        let (left, right) = (step_angle(l, cfg), step_angle(r, cfg));
        let lo = bearings.partition_point(|b| *b < -right - BOUNDARY_EPS);
        let hi = bearings.partition_point(|b| *b <= left + BOUNDARY_EPS);
        hi.saturating_sub(lo)
    };
    let at_max = |k: u32| step_angle(k, cfg) >= cfg.cone_max_half_angle;

    let (mut l, mut r) = (0u32, 0u32);
    let (mut l_frozen, mut r_frozen) = (at_max(0), at_max(0));
    while !(l_frozen && r_frozen) {
        let grow_l = !l_frozen && count(l + 1, r) < cfg.cone_point_threshold;
        let grow_r = !r_frozen && count(l, r + 1) < cfg.cone_point_threshold;
        if grow_l && grow_r && count(l + 1, r + 1) >= cfg.cone_point_threshold {
            break;
        }
        if grow_l {
            l += 1;
        }
        if grow_r {
            r += 1;
        }
        l_frozen = !grow_l || at_max(l);
        r_frozen = !grow_r || at_max(r);
    }
    Cone2 {
        apex: Point2::ORIGIN,
        axis_heading: FORWARD_BEARING,
        left_half_angle: step_angle(l, cfg),
        right_half_angle: step_angle(r, cfg),
        length: cfg.cone_length,
    }
}

/// Bearing of the cone bisector relative to body-forward.
pub fn cone_offset(cone: &Cone2) -> f64 {
    cone.bisector_offset()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Flank rectangle of lateral width `width`, centred on the robot along track.
pub fn side_rect(side: Side, width: f64, cfg: &InRowConfig) -> Rect2 {
    let half = 0.5 * cfg.side_rect_length;
    match side {
        Side::Left => Rect2::body_box(-width, 0.0, -half, half),
        Side::Right => Rect2::body_box(0.0, width, -half, half),
    }
}

fn grow_side(points: &[Point2], side: Side, cfg: &InRowConfig) -> f64 {
    let max_steps = math::ceil(cfg.side_rect_max_width / cfg.side_rect_growth_step - 1e-9) as u32;
    for k in 1..=max_steps {
        let width = (k as f64 * cfg.side_rect_growth_step).min(cfg.side_rect_max_width);
        if side_rect(side, width, cfg).count(points) >= cfg.side_rect_point_threshold {
            return width;
        }
    }
    cfg.side_rect_max_width
}

/// Distances to the left and right rows from growing flank rectangles.
pub fn side_distances(scan: &Scan2D, cfg: &InRowConfig) -> (f64, f64) {
    // Only points that can ever fall in a flank box matter.
    let half = 0.5 * cfg.side_rect_length + BOUNDARY_EPS;
    let reach = cfg.side_rect_max_width + BOUNDARY_EPS;
    let near: Vec<Point2> = scan
        .points
        .iter()
        .copied()
        .filter(|p| p.y.abs() <= half && p.x.abs() <= reach)
        .collect();
    (
        grow_side(&near, Side::Left, cfg),
        grow_side(&near, Side::Right, cfg),
    )
}

/// Cone bearing plus a term proportional to the offset from the corridor
/// centre, clamped to ±`cone_max_half_angle`. `(left − right)/2` is the
/// robot's displacement to the right of centre, so a larger right clearance
/// (robot left of centre) yields a rightward (negative) correction.
pub fn steering_offset(cone_offset: f64, left: f64, right: f64, cfg: &InRowConfig) -> f64 {
    let raw = cone_offset + cfg.center_gain * 0.5 * (left - right);
    raw.clamp(-cfg.cone_max_half_angle, cfg.cone_max_half_angle)
}

/// Point `lookahead` metres along the bearing `offset` from body-forward.
pub fn steering_target(offset: f64, lookahead: f64) -> Point2 {
    let (s, c) = math::sin_cos(offset);
    Point2::new(-s * lookahead, c * lookahead)
}

/// PID memory.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pid {
    pub integral: f64,
    pub prev_error: Option<f64>,
}

impl Pid {
    pub fn reset(&mut self) {
        *self = Pid::default();
    }

    pub fn step(&mut self, error: f64, dt: f64, gains: &PidGains) -> f64 {
        let (out, next) = pid_step(error, self, dt, gains);
        *self = next;
        out
    }
}

/// Positional PID with a rectangle-rule integral; the derivative term is
/// zero on the first step after a reset.
pub fn pid_step(error: f64, state: &Pid, dt: f64, gains: &PidGains) -> (f64, Pid) {
    let integral = (state.integral + error * dt).clamp(-gains.integral_limit, gains.integral_limit);
    let derivative = match state.prev_error {
        Some(prev) if dt > 0.0 => (error - prev) / dt,
        _ => 0.0,
    };
    let out = gains.kp * error + gains.ki * integral + gains.kd * derivative;
    (
        out,
        Pid {
            integral,
            prev_error: Some(error),
        },
    )
}

/// Distance to the nearest point inside the governor box, if any.
pub fn nearest_obstacle(scan: &Scan2D, cfg: &InRowConfig) -> Option<f64> {
    let rect = cfg.governor_rect();
    scan.points
        .iter()
        .filter(|p| rect.contains(**p))
        .map(|p| p.norm())
        .min_by(f64::total_cmp)
}

/// Forward speed: `v_max` when the governor box is empty, zero at or inside
/// the stop distance and a linear ramp up to the far edge of the box.
pub fn govern_speed(scan: &Scan2D, cfg: &InRowConfig) -> f64 {
    match nearest_obstacle(scan, cfg) {
        None => cfg.v_max,
        Some(d) => speed_for_obstacle(d, cfg),
    }
}

pub fn speed_for_obstacle(distance: f64, cfg: &InRowConfig) -> f64 {
    if distance <= cfg.governor_stop_distance {
        return 0.0;
    }
    let ramp = (distance - cfg.governor_stop_distance)
        / (cfg.governor_length - cfg.governor_stop_distance);
    cfg.v_max * ramp.min(1.0)
}

pub fn end_rect_count(scan: &Scan2D, cfg: &InRowConfig) -> usize {
    cfg.end_rect().count(&scan.points)
}

/// True when fewer than `end_point_threshold` points lie in the row-end box.
pub fn detect_row_end(scan: &Scan2D, cfg: &InRowConfig) -> bool {
    end_rect_count(scan, cfg) < cfg.end_point_threshold
}

/// Everything the in-row controller derived from one scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InRowStatus {
    pub cone: Cone2,
    pub left_distance: f64,
    pub right_distance: f64,
    pub offset: f64,
    pub steering_target: Point2,
    pub commanded: Twist,
    pub end_count: usize,
    /// The row-end box emptied; the exit manoeuvre is under way.
    pub row_end_detected: bool,
    /// The exit distance has been covered.
    pub row_ended: bool,
    /// No usable free path: the cone is closed or the governor stalled.
    pub blocked: bool,
    /// The row-end box has never filled, so no rows lie ahead.
    pub rows_missing: bool,
}

/// Controller memory for one corridor.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct InRowController {
    pub pid: Pid,
    /// The row-end box has held enough points at least once, so an empty box
    /// now means the row is over rather than not yet reached.
    pub armed: bool,
    /// Odometric position where the row end was detected.
    pub exit_start: Option<Point2>,
}

impl InRowController {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn exiting(&self) -> bool {
        self.exit_start.is_some()
    }

    /// One scan-rate update: perception, steering and the exit latch.
    pub fn step(
        &mut self,
        scan: &Scan2D,
        odom_pose: &Pose2,
        dt: f64,
        cfg: &InRowConfig,
    ) -> (Twist, InRowStatus) {
        let cone = find_cone(scan, cfg);
        let (left, right) = side_distances(scan, cfg);
        let offset = steering_offset(cone_offset(&cone), left, right, cfg);
        let target = steering_target(offset, cfg.lookahead);
        let end_count = end_rect_count(scan, cfg);

        if end_count >= cfg.end_point_threshold {
            self.armed = true;
        }
        if self.exit_start.is_none() && self.armed && end_count < cfg.end_point_threshold {
            self.exit_start = Some(odom_pose.position);
        }

        let (command, blocked, row_ended) = match self.exit_start {
            Some(start) => {
                let travelled = odom_pose.position.distance(start);
                let done = travelled >= cfg.exit_distance;
                let v = if done { 0.0 } else { cfg.exit_speed };
                (Twist::new(v, 0.0), false, done)
            }
            None => {
                // Bearing error of the target point relative to body-forward.
                let error = math::atan2(-target.x, target.y);
                let omega = self.pid.step(error, dt, &cfg.pid);
                let v = govern_speed(scan, cfg);
                let closed = cone.left_half_angle == 0.0 && cone.right_half_angle == 0.0;
                let stalled = v < 0.1 * cfg.v_max;
                (Twist::new(v, omega), closed || stalled, false)
            }
        };

        let status = InRowStatus {
            cone,
            left_distance: left,
            right_distance: right,
            offset,
            steering_target: target,
            commanded: command,
            end_count,
            row_end_detected: self.exit_start.is_some(),
            row_ended,
            blocked,
            rows_missing: !self.armed,
        };
        (command, status)
    }
}
