//! In-place turns at the row exit and the re-alignment that absorbs skid.
//!
//! The open-loop turn trusts odometry, which cannot see tread slip, so the
//! robot usually under-rotates. Afterwards two row ends, one ahead of and
//! one behind the robot's lateral axis, define the headland direction and a
//! second odometry-monitored rotation makes body-forward parallel to it.

use serde::{Deserialize, Serialize};

use crate::end_row::EndPoint;
use crate::geometry::Point2;
use crate::math;
use crate::odometry::Twist;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TurnDirection {
    Left,
    Right,
}

impl TurnDirection {
    /// +1 for counter-clockwise.
    pub fn sign(self) -> f64 {
        match self {
            TurnDirection::Left => 1.0,
            TurnDirection::Right => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            TurnDirection::Left => TurnDirection::Right,
            TurnDirection::Right => TurnDirection::Left,
        }
    }

    pub fn of_angle(angle: f64) -> Self {
        if angle >= 0.0 {
            TurnDirection::Left
        } else {
            TurnDirection::Right
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TurnConfig {
    pub turn_angle: f64,
    pub direction_first: TurnDirection,
    pub omega_turn: f64,
    pub alignment_tolerance: f64,
    /// Corrective rotations allowed per alignment; each one is measured
    /// from a fresh scan, so slip during a correction is corrected too.
    pub alignment_passes: usize,
}

impl Default for TurnConfig {
    fn default() -> Self {
        Self {
            turn_angle: math::FRAC_PI_2,
            direction_first: TurnDirection::Left,
            omega_turn: 0.5,
            alignment_tolerance: 2f64.to_radians(),
            alignment_passes: 3,
        }
    }
}

impl TurnConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.turn_angle > 0.0 && self.turn_angle <= math::PI) {
            return Err(Error::config("turn.turn_angle", "must lie in (0, pi]"));
        }
        if !(self.omega_turn > 0.0 && self.omega_turn.is_finite()) {
            return Err(Error::config("turn.omega_turn", "must be > 0"));
        }
        if !(self.alignment_tolerance >= 0.0) {
            return Err(Error::config("turn.alignment_tolerance", "must be >= 0"));
        }
        if self.alignment_passes < 1 {
            return Err(Error::config("turn.alignment_passes", "must be >= 1"));
        }
        Ok(())
    }
}

/// Rotates in place at `omega_turn` towards `direction` until the
/// odometric heading change reaches `target` in magnitude.
pub fn turn_step(
    accumulated: f64,
    target: f64,
    direction: TurnDirection,
    cfg: &TurnConfig,
) -> (Twist, bool) {
    if accumulated.abs() >= target {
        (Twist::ZERO, true)
    } else {
        (Twist::new(0.0, direction.sign() * cfg.omega_turn), false)
    }
}

/// Heading change (counter-clockwise positive) that makes body-forward
/// parallel to the back→front direction of two body-frame points.
pub fn align_to_end_row(front: Point2, back: Point2) -> Result<f64> {
    let d = front - back;
    if d.x == 0.0 && d.y == 0.0 {
        return Err(Error::NotEnoughEndPoints { needed: 2, got: 1 });
    }
    Ok(math::atan2(-d.x, d.y))
}

/// Picks the nearest row end ahead of and behind the lateral axis on the
/// given side of the robot (rows lie on the side the robot turned towards).
pub fn select_alignment_points(
    end_points: &[Point2],
    row_side: TurnDirection,
) -> Option<(Point2, Point2)> {
    let on_side = |p: &&Point2| match row_side {
        TurnDirection::Left => p.x < 0.0,
        TurnDirection::Right => p.x > 0.0,
    };
    let nearest = |ahead: bool| {
        end_points
            .iter()
            .filter(on_side)
            .filter(|p| if ahead { p.y > 0.0 } else { p.y < 0.0 })
            .min_by(|a, b| a.norm_sq().total_cmp(&b.norm_sq()))
            .copied()
    };
    Some((nearest(true)?, nearest(false)?))
}

/// Picks the nearest row end ahead-left and ahead-right of the robot: the
/// two ends flanking the corridor it is about to enter.
pub fn select_entrance_points(end_points: &[EndPoint]) -> Option<(Point2, Point2)> {
    let nearest = |left: bool| {
        end_points
            .iter()
            .map(|e| e.position)
            .filter(|p| p.y > 0.0 && (p.x < 0.0) == left)
            .min_by(|a, b| a.norm_sq().total_cmp(&b.norm_sq()))
    };
    Some((nearest(true)?, nearest(false)?))
}
