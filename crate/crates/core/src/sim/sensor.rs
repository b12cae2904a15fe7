//! Planar lidar model: exact ray-circle intersections on an even bearing
//! grid, Gaussian range noise and random dropouts.

use alloc::vec;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::geometry::{Point2, Pose2};
use crate::math::{self, PI, TAU};
use crate::scan::{RawScan, NO_RETURN};
use crate::sim::world::World;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorConfig {
    pub rate: f64,
    pub beams: usize,
    pub max_range: f64,
    pub min_range: f64,
    pub range_noise_sigma: f64,
    pub dropout_probability: f64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            rate: 10.0,
            beams: 1024,
            max_range: 30.0,
            min_range: 0.8,
            range_noise_sigma: 0.01,
            dropout_probability: 0.01,
        }
    }
}

impl SensorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rate > 0.0 && self.rate.is_finite()) {
            return Err(Error::config("sensor.rate", "must be > 0"));
        }
        if self.beams < 16 {
            return Err(Error::config("sensor.beams", "must be >= 16"));
        }
        if !(self.min_range >= 0.0 && self.min_range < self.max_range && self.max_range.is_finite()) {
            return Err(Error::config("sensor.min_range", "need 0 <= min_range < max_range"));
        }
        if !(self.range_noise_sigma >= 0.0 && self.range_noise_sigma.is_finite()) {
            return Err(Error::config("sensor.range_noise_sigma", "must be >= 0"));
        }
        if !(0.0..1.0).contains(&self.dropout_probability) {
            return Err(Error::config("sensor.dropout_probability", "must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// Distance along the unit ray `u` from the origin to the circle, if hit.
fn ray_circle(u: Point2, center: Point2, radius: f64) -> Option<f64> {
    let t0 = u.dot(center);
    let perp_sq = center.norm_sq() - t0 * t0;
    let r_sq = radius * radius;
    if perp_sq > r_sq {
        return None;
    }
    let t = t0 - math::sqrt(r_sq - perp_sq);
    (t > 0.0).then_some(t)
}

/// Noise-free ranges per beam in the sensor frame; no-return is infinity.
pub fn exact_ranges(world: &World, sensor_pose: &Pose2, beams: usize, max_range: f64) -> alloc::vec::Vec<f64> {
    let mut ranges = vec![NO_RETURN; beams];
    let n = beams as f64;
    let dirs: alloc::vec::Vec<Point2> = (0..beams)
        .map(|i| Point2::from_angle(RawScan::beam_bearing(i, beams)))
        .collect();
    for o in &world.obstacles {
        let c = sensor_pose.to_local(o.center);
        let d = c.norm();
        if d - o.radius > max_range || d <= o.radius {
            continue;
        }
        let half = math::asin(o.radius / d);
        let bearing = c.angle();
        // Beam i points at −π + 2π(i + 1)/n.
        let lo = math::floor((bearing - half + PI) * n / TAU) as i64 - 1;
        let hi = math::ceil((bearing + half + PI) * n / TAU) as i64;
        for k in lo..=hi {
            let i = k.rem_euclid(beams as i64) as usize;
            if let Some(t) = ray_circle(dirs[i], c, o.radius) {
                if t < ranges[i] {
                    ranges[i] = t;
                }
            }
        }
    }
    ranges
}

/// Simulated scan taken at `sensor_pose`. Random draws happen in beam
/// order: one noise sample per hit, then one dropout draw when dropouts
/// are enabled.
pub fn raycast_scan<R: Rng + ?Sized>(
    world: &World,
    sensor_pose: &Pose2,
    timestamp: f64,
    cfg: &SensorConfig,
    rng: &mut R,
) -> RawScan {
    let mut ranges = exact_ranges(world, sensor_pose, cfg.beams, cfg.max_range);
    let noise = Normal::new(0.0, cfg.range_noise_sigma).ok();
    for r in ranges.iter_mut() {
        if r.is_finite() {
            if let Some(noise) = &noise {
                if cfg.range_noise_sigma > 0.0 {
                    *r += noise.sample(rng);
                }
            }
            if cfg.dropout_probability > 0.0 && rng.random::<f64>() < cfg.dropout_probability {
                *r = NO_RETURN;
            }
        }
        if *r < cfg.min_range || *r > cfg.max_range {
            *r = NO_RETURN;
        }
    }
    RawScan::from_ranges(timestamp, &ranges)
}
