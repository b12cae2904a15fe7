//! Ground-truth motion: the skid-steer model with speed limits and a
//! proportional loss of yaw rate standing in for tread slip.

use serde::{Deserialize, Serialize};

use crate::geometry::{Point2, Pose2};
use crate::odometry::{integrate_pose, tread_to_twist, twist_to_treads, KinematicParams, TreadSpeeds, Twist};
use crate::sim::world::Obstacle;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsConfig {
    pub odom_rate: f64,
    /// Fraction of the commanded yaw rate lost to slip.
    pub slip_factor: f64,
    pub v_limit: f64,
    pub omega_limit: f64,
    /// Robot footprint used for collision checks.
    pub footprint_half_width: f64,
    pub footprint_half_length: f64,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        Self {
            odom_rate: 50.0,
            slip_factor: 0.0,
            v_limit: 2.0,
            omega_limit: 1.5,
            footprint_half_width: 0.25,
            footprint_half_length: 0.3,
        }
    }
}

impl DynamicsConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dynamics.odom_rate", self.odom_rate),
            ("dynamics.v_limit", self.v_limit),
            ("dynamics.omega_limit", self.omega_limit),
            ("dynamics.footprint_half_width", self.footprint_half_width),
            ("dynamics.footprint_half_length", self.footprint_half_length),
        ];
        for (field, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(field, "must be > 0"));
            }
        }
        if !(0.0..1.0).contains(&self.slip_factor) {
            return Err(Error::config("dynamics.slip_factor", "must lie in [0, 1)"));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.odom_rate
    }
}

/// Clamps a command to the speed limits.
pub fn limit_twist(twist: Twist, cfg: &DynamicsConfig) -> Twist {
    Twist::new(
        twist.forward().clamp(-cfg.v_limit, cfg.v_limit),
        twist.omega_z.clamp(-cfg.omega_limit, cfg.omega_limit),
    )
}

/// Tread speeds that realise `command` after limiting.
pub fn command_treads(command: Twist, cfg: &DynamicsConfig, params: &KinematicParams) -> TreadSpeeds {
    twist_to_treads(limit_twist(command, cfg), params)
}

/// Body twist actually achieved by the treads.
pub fn true_twist(treads: TreadSpeeds, cfg: &DynamicsConfig, params: &KinematicParams) -> Result<Twist> {
    let nominal = tread_to_twist(treads, params)?;
    let slipped = Twist::new(nominal.forward(), nominal.omega_z * (1.0 - cfg.slip_factor));
    Ok(limit_twist(slipped, cfg))
}

pub fn step_dynamics(
    pose: &Pose2,
    treads: TreadSpeeds,
    cfg: &DynamicsConfig,
    params: &KinematicParams,
    dt: f64,
) -> Result<Pose2> {
    Ok(integrate_pose(pose, true_twist(treads, cfg, params)?, dt))
}

/// Whether the footprint rectangle at `pose` overlaps the obstacle.
pub fn footprint_hits(pose: &Pose2, obstacle: &Obstacle, cfg: &DynamicsConfig) -> bool {
    let reach = cfg.footprint_half_width + cfg.footprint_half_length + obstacle.radius;
    if pose.position.distance_sq(obstacle.center) > reach * reach {
        return false;
    }
    let c = pose.to_local(obstacle.center);
    let outside = Point2::new(
        (c.x.abs() - cfg.footprint_half_width).max(0.0),
        (c.y.abs() - cfg.footprint_half_length).max(0.0),
    );
    outside.norm_sq() < obstacle.radius * obstacle.radius
}
