//! Procedural vineyard blocks: straight rows of support poles with
//! vegetation scattered around the row lines.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::geometry::{Point2, Pose2};
use crate::math;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VegetativeStage {
    Low,
    Medium,
    High,
}

impl VegetativeStage {
    pub const ALL: [VegetativeStage; 3] =
        [VegetativeStage::Low, VegetativeStage::Medium, VegetativeStage::High];

    pub fn density_multiplier(self) -> f64 {
        match self {
            VegetativeStage::Low => 0.4,
            VegetativeStage::Medium => 1.0,
            VegetativeStage::High => 1.8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldConfig {
    pub n_rows: usize,
    pub row_length: f64,
    pub row_spacing: f64,
    pub pole_spacing: f64,
    pub pole_radius: f64,
    pub vegetative_stage: VegetativeStage,
    /// Vegetation obstacles per metre of row at the medium stage.
    pub vegetation_density: f64,
    pub vegetation_protrusion_sigma: f64,
    /// Hard bound on the lateral offset of a vegetation obstacle.
    pub vegetation_protrusion_limit: f64,
    pub vegetation_radius: f64,
    /// Corridor whose entrance (as approached by the robot) is walled off.
    pub blocked_corridor: Option<usize>,
    pub seed: u64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            n_rows: 4,
            row_length: 36.0,
            row_spacing: 2.0,
            pole_spacing: 6.0,
            pole_radius: 0.05,
            vegetative_stage: VegetativeStage::Medium,
            vegetation_density: 8.0,
            vegetation_protrusion_sigma: 0.2,
            vegetation_protrusion_limit: 0.6,
            vegetation_radius: 0.05,
            blocked_corridor: None,
            seed: 0,
        }
    }
}

impl WorldConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_rows < 2 {
            return Err(Error::config("world.n_rows", "must be >= 2"));
        }
        let positive = [
            ("world.row_length", self.row_length),
            ("world.row_spacing", self.row_spacing),
            ("world.pole_spacing", self.pole_spacing),
            ("world.pole_radius", self.pole_radius),
            ("world.vegetation_radius", self.vegetation_radius),
        ];
        for (field, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(field, "must be > 0"));
            }
        }
        let non_negative = [
            ("world.vegetation_density", self.vegetation_density),
            ("world.vegetation_protrusion_sigma", self.vegetation_protrusion_sigma),
            ("world.vegetation_protrusion_limit", self.vegetation_protrusion_limit),
        ];
        for (field, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(field, "must be >= 0"));
            }
        }
        if let Some(k) = self.blocked_corridor {
            if k + 1 >= self.n_rows {
                return Err(Error::config("world.blocked_corridor", "no such corridor"));
            }
        }
        Ok(())
    }

    pub fn corridors(&self) -> usize {
        self.n_rows - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObstacleKind {
    Pole,
    Vegetation,
    Blocker,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub center: Point2,
    pub radius: f64,
    pub kind: ObstacleKind,
}

/// Rows run along +x from x = 0 to `row_length`; row `i` lies on
/// y = i · `row_spacing`, and corridor `k` is the space between rows `k`
/// and `k + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct World {
    pub config: WorldConfig,
    pub obstacles: Vec<Obstacle>,
    pub pole_centers: Vec<Vec<Point2>>,
}

impl World {
    pub fn row_y(&self, row: usize) -> f64 {
        row as f64 * self.config.row_spacing
    }

    pub fn corridor_center_y(&self, corridor: usize) -> f64 {
        (corridor as f64 + 0.5) * self.config.row_spacing
    }

    /// Lateral distance from `p` to the centre line of the corridor it is in.
    pub fn center_line_offset(&self, p: Point2) -> f64 {
        let s = self.config.row_spacing;
        let k = math::floor(p.y / s);
        let k = k.clamp(0.0, (self.config.corridors() - 1) as f64);
        (p.y - (k + 0.5) * s).abs()
    }

    /// True when `p` lies between the first and last row and between the
    /// row ends.
    pub fn inside_rows(&self, p: Point2) -> bool {
        p.x >= 0.0
            && p.x <= self.config.row_length
            && p.y >= 0.0
            && p.y <= self.row_y(self.config.n_rows - 1)
    }

    /// The first and last pole of every row.
    pub fn end_poles(&self) -> Vec<Point2> {
        self.pole_centers
            .iter()
            .flat_map(|row| [row[0], row[row.len() - 1]])
            .collect()
    }

    /// Start of the mission: centred on corridor 0, `distance` before its
    /// entrance, facing along the rows.
    pub fn start_pose(&self, distance: f64) -> Pose2 {
        Pose2::facing(-distance, self.corridor_center_y(0), 0.0)
    }

    pub fn count(&self, kind: ObstacleKind) -> usize {
        self.obstacles.iter().filter(|o| o.kind == kind).count()
    }
}

/// Builds the world; identical configs give identical worlds.
pub fn generate_world(cfg: &WorldConfig) -> Result<World> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let length = cfg.row_length;
    let intervals = math::round(length / cfg.pole_spacing).max(1.0) as usize;

    let mut obstacles = Vec::new();
    let mut pole_centers = Vec::with_capacity(cfg.n_rows);
    for row in 0..cfg.n_rows {
        let y = row as f64 * cfg.row_spacing;
        let poles: Vec<Point2> = (0..=intervals)
            .map(|j| Point2::new(length * j as f64 / intervals as f64, y))
            .collect();
        obstacles.extend(poles.iter().map(|&center| Obstacle {
            center,
            radius: cfg.pole_radius,
            kind: ObstacleKind::Pole,
        }));
        pole_centers.push(poles);
    }

    let per_row = math::round(length * cfg.vegetation_density * cfg.vegetative_stage.density_multiplier())
        as usize;
    if per_row > 0 {
        let noise = Normal::new(0.0, cfg.vegetation_protrusion_sigma)
            .map_err(|_| Error::config("world.vegetation_protrusion_sigma", "invalid"))?;
        let limit = cfg.vegetation_protrusion_limit;
        let slot = length / per_row as f64;
        for row in 0..cfg.n_rows {
            let y = row as f64 * cfg.row_spacing;
            for j in 0..per_row {
                let x = (j as f64 + rng.random::<f64>()) * slot;
                let offset = noise.sample(&mut rng).clamp(-limit, limit);
                obstacles.push(Obstacle {
                    center: Point2::new(x, y + offset),
                    radius: cfg.vegetation_radius,
                    kind: ObstacleKind::Vegetation,
                });
            }
        }
    }

    if let Some(k) = cfg.blocked_corridor {
        // Even corridors are entered heading +x, odd ones heading −x.
        let x = if k % 2 == 0 { 0.0 } else { length };
        let y0 = k as f64 * cfg.row_spacing;
        let n = math::ceil(cfg.row_spacing / 0.05) as usize;
        for i in 0..=n {
            obstacles.push(Obstacle {
                center: Point2::new(x, y0 + cfg.row_spacing * i as f64 / n as f64),
                radius: 0.05,
                kind: ObstacleKind::Blocker,
            });
        }
    }

    Ok(World {
        config: cfg.clone(),
        obstacles,
        pole_centers,
    })
}
