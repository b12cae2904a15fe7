//! Top-level run configuration.

use alloc::string::String;

use serde::{Deserialize, Serialize};

use crate::end_row::EndRowConfig;
use crate::in_row::InRowConfig;
use crate::navigator::NavigatorConfig;
use crate::odometry::KinematicParams;
use crate::scan::FilterConfig;
use crate::sim::{DynamicsConfig, SensorConfig, WorldConfig};
use crate::turn::TurnConfig;
use crate::{Error, Result};

/// Everything a simulated run depends on. The top-level `seed` drives all
/// randomness and takes precedence over `world.seed` and
/// `end_row.rng_seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub corridors_to_traverse: usize,
    /// Distance before the first corridor at which the robot starts.
    pub start_offset: f64,
    /// Simulated seconds before the run is abandoned.
    pub max_duration: f64,
    pub fault_after_scans: usize,
    pub align_attempts: usize,
    pub output_dir: String,
    pub world: WorldConfig,
    pub sensor: SensorConfig,
    pub dynamics: DynamicsConfig,
    pub kinematics: KinematicParams,
    pub filter: FilterConfig,
    pub in_row: InRowConfig,
    pub turn: TurnConfig,
    pub end_row: EndRowConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let nav = NavigatorConfig::default();
        Self {
            seed: 0,
            corridors_to_traverse: 3,
            start_offset: 1.0,
            max_duration: 600.0,
            fault_after_scans: nav.fault_after_scans,
            align_attempts: nav.align_attempts,
            output_dir: String::from("out"),
            world: WorldConfig::default(),
            sensor: SensorConfig::default(),
            dynamics: DynamicsConfig::default(),
            kinematics: KinematicParams::default(),
            filter: FilterConfig::default(),
            in_row: InRowConfig::default(),
            turn: TurnConfig::default(),
            end_row: EndRowConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.world.validate()?;
        self.sensor.validate()?;
        self.dynamics.validate()?;
        self.kinematics.validate()?;
        self.filter.validate()?;
        self.navigator_config().validate()?;
        if self.corridors_to_traverse > self.world.corridors() {
            return Err(Error::config(
                "corridors_to_traverse",
                "exceeds the number of corridors in the world",
            ));
        }
        if !(self.start_offset >= 0.0 && self.start_offset.is_finite()) {
            return Err(Error::config("start_offset", "must be >= 0"));
        }
        if !(self.max_duration > 0.0) {
            return Err(Error::config("max_duration", "must be > 0"));
        }
        let ratio = self.dynamics.odom_rate / self.sensor.rate;
        if ratio < 1.0 || (ratio - libm::round(ratio)).abs() > 1e-9 {
            return Err(Error::config(
                "sensor.rate",
                "must divide dynamics.odom_rate into a whole number of ticks",
            ));
        }
        Ok(())
    }

    /// Odometry ticks per scan.
    pub fn scan_every(&self) -> usize {
        libm::round(self.dynamics.odom_rate / self.sensor.rate) as usize
    }

    pub fn world_config(&self) -> WorldConfig {
        WorldConfig {
            seed: self.seed,
            ..self.world.clone()
        }
    }

    pub fn navigator_config(&self) -> NavigatorConfig {
        NavigatorConfig {
            in_row: self.in_row.clone(),
            turn: self.turn.clone(),
            end_row: EndRowConfig {
                rng_seed: self.seed,
                ..self.end_row.clone()
            },
            corridors_to_traverse: self.corridors_to_traverse,
            fault_after_scans: self.fault_after_scans,
            align_attempts: self.align_attempts,
        }
    }

    /// Seed of the sensor noise stream, kept apart from the world stream.
    pub fn sensor_seed(&self) -> u64 {
        self.seed ^ 0x9e37_79b9_7f4a_7c15
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        RunConfig::default().validate().unwrap();
        assert_eq!(RunConfig::default().scan_every(), 5);
    }

    #[test]
    fn field_paths_in_errors() {
        let mut cfg = RunConfig::default();
        cfg.world.n_rows = 1;
        match cfg.validate() {
            Err(Error::InvalidConfig { field, .. }) => assert_eq!(field, "world.n_rows"),
            other => panic!("{other:?}"),
        }
        let mut cfg = RunConfig::default();
        cfg.sensor.rate = 15.0;
        assert!(cfg.validate().is_err());
        let cfg = RunConfig {
            corridors_to_traverse: 4,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn seed_propagates() {
        let cfg = RunConfig { seed: 42, ..Default::default() };
        assert_eq!(cfg.world_config().seed, 42);
        assert_eq!(cfg.navigator_config().end_row.rng_seed, 42);
    }
}
