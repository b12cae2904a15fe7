//! Range scan conversion and filtering.
//!
//! Raw beams are projected to Cartesian points in the sensor frame and then
//! reduced by a fixed chain: radius filter, index-strided downsampling and a
//! neighbour-count outlier filter. Every stage only drops points; nothing is
//! moved or created.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry::Point2;
use crate::math::{self, PI, TAU};
use crate::spatial::PointGrid;
use crate::{Error, Result};

/// Range value used for beams that did not return.
pub const NO_RETURN: f64 = f64::INFINITY;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Beam {
    pub bearing: f64,
    pub range: f64,
}

impl Beam {
    pub fn is_return(&self) -> bool {
        self.range.is_finite()
    }
}

/// One revolution of single-plane range data.
#[derive(Debug, Clone, PartialEq)]
pub struct RawScan {
    pub timestamp: f64,
    pub beams: Vec<Beam>,
}

impl RawScan {
    /// Bearing of beam `i` out of `n` evenly spaced beams covering (−π, π].
    pub fn beam_bearing(i: usize, n: usize) -> f64 {
        -PI + TAU * (i + 1) as f64 / n as f64
    }

    /// Builds a scan from ranges on the default evenly spaced bearing grid.
    pub fn from_ranges(timestamp: f64, ranges: &[f64]) -> Self {
        let n = ranges.len();
        let beams = ranges
            .iter()
            .enumerate()
            .map(|(i, &range)| Beam {
                bearing: Self::beam_bearing(i, n),
                range,
            })
            .collect();
        Self { timestamp, beams }
    }
}

/// Filtered 2D points in the sensor frame.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Scan2D {
    pub timestamp: f64,
    pub points: Vec<Point2>,
}

impl Scan2D {
    pub fn new(timestamp: f64, points: Vec<Point2>) -> Self {
        Self { timestamp, points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Rounds every coordinate to `decimals` places, matching what a scan
    /// log written at that precision reads back as.
    pub fn quantized(&self, decimals: i32) -> Scan2D {
        let scale = libm::pow(10.0, decimals as f64);
        let q = |v: f64| math::round(v * scale) / scale;
        Scan2D {
            timestamp: q(self.timestamp),
            points: self.points.iter().map(|p| Point2::new(q(p.x), q(p.y))).collect(),
        }
    }

    /// Reflection across the body-forward axis.
    pub fn mirrored(&self) -> Scan2D {
        Scan2D {
            timestamp: self.timestamp,
            points: self.points.iter().map(Point2::mirrored).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    pub min_range: f64,
    pub max_range: f64,
    pub downsample_keep_every: usize,
    pub outlier_radius: f64,
    pub outlier_min_neighbors: usize,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            min_range: 0.8,
            max_range: 20.0,
            downsample_keep_every: 2,
            outlier_radius: 0.3,
            outlier_min_neighbors: 2,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.min_range >= 0.0 && self.min_range < self.max_range) {
            return Err(Error::config(
                "filter.min_range",
                "need 0 <= min_range < max_range",
            ));
        }
        if self.downsample_keep_every == 0 {
            return Err(Error::config("filter.downsample_keep_every", "must be >= 1"));
        }
        if !(self.outlier_radius > 0.0) {
            return Err(Error::config("filter.outlier_radius", "must be > 0"));
        }
        Ok(())
    }
}

/// Polar to Cartesian; no-return beams are dropped.
pub fn to_points(raw: &RawScan) -> Scan2D {
    let points = raw
        .beams
        .iter()
        .filter(|b| b.is_return())
        .map(|b| Point2::from_polar(b.range, b.bearing))
        .collect();
    Scan2D::new(raw.timestamp, points)
}

/// Keeps points with `min_range ≤ ‖p‖ ≤ max_range`, preserving order.
pub fn radius_filter(scan: &Scan2D, min_range: f64, max_range: f64) -> Scan2D {
    let (lo, hi) = (min_range * min_range, max_range * max_range);
    let points = scan
        .points
        .iter()
        .copied()
        .filter(|p| {
            let r2 = p.norm_sq();
            r2 >= lo && r2 <= hi
        })
        .collect();
    Scan2D::new(scan.timestamp, points)
}

/// Keeps indices 0, k, 2k, …
pub fn downsample(scan: &Scan2D, keep_every: usize) -> Scan2D {
    let k = keep_every.max(1);
    Scan2D::new(
        scan.timestamp,
        scan.points.iter().copied().step_by(k).collect(),
    )
}

/// Keeps a point iff at least `min_neighbors` other points lie within
/// `radius` of it.
pub fn outlier_filter(scan: &Scan2D, radius: f64, min_neighbors: usize) -> Scan2D {
    if min_neighbors == 0 || scan.points.is_empty() {
        return scan.clone();
    }
    let pts = &scan.points;
    let grid = PointGrid::new(pts, radius);
    let points = (0..pts.len())
        .filter(|&i| grid.count_neighbors(pts, i, radius) >= min_neighbors)
        .map(|i| pts[i])
        .collect();
    Scan2D::new(scan.timestamp, points)
}

/// Full chain: radius → downsample → outlier.
pub fn filter_points(scan: &Scan2D, cfg: &FilterConfig) -> Scan2D {
    let s = radius_filter(scan, cfg.min_range, cfg.max_range);
    let s = downsample(&s, cfg.downsample_keep_every);
    outlier_filter(&s, cfg.outlier_radius, cfg.outlier_min_neighbors)
}

pub fn process(raw: &RawScan, cfg: &FilterConfig) -> Scan2D {
    filter_points(&to_points(raw), cfg)
}
