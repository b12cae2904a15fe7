//! Seeded two-point RANSAC for 2D lines with a total-least-squares refit.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::Point2;
use crate::math;
use crate::{Error, Result};

/// Infinite line through `point` along the unit vector `direction`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineModel {
    pub point: Point2,
    pub direction: Point2,
}

impl LineModel {
    /// Line through two distinct points.
    pub fn through(a: Point2, b: Point2) -> Option<Self> {
        let d = b - a;
        let n = d.norm();
        if n == 0.0 {
            return None;
        }
        Some(Self {
            point: a,
            direction: d * (1.0 / n),
        })
    }

    pub fn distance(&self, p: Point2) -> f64 {
        self.direction.cross(p - self.point).abs()
    }

    pub fn project(&self, p: Point2) -> Point2 {
        self.point + self.direction * self.direction.dot(p - self.point)
    }
}

/// Result of a RANSAC fit.
#[derive(Debug, Clone, PartialEq)]
pub struct LineFit {
    /// Refit model.
    pub model: LineModel,
    /// Indices of points within the threshold of `model`.
    pub inliers: Vec<usize>,
    /// Consensus size of the winning two-point sample.
    pub sample_inliers: usize,
}

/// The index pairs drawn by a fit with this seed, in draw order. Each pair
/// holds two distinct indices below `n`.
pub fn sample_pairs(n: usize, iterations: usize, seed: u64) -> Vec<(usize, usize)> {
    if n < 2 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..iterations)
        .map(|_| {
            let i = rng.random_range(0..n);
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            (i, j)
        })
        .collect()
}

pub fn count_inliers(points: &[Point2], model: &LineModel, threshold: f64) -> usize {
    points.iter().filter(|p| model.distance(**p) <= threshold).count()
}

/// Principal axis of the given points (orthogonal regression).
pub fn total_least_squares(points: &[Point2]) -> Option<LineModel> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let c = points.iter().fold(Point2::ORIGIN, |acc, p| acc + *p) * (1.0 / n);
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for p in points {
        let d = *p - c;
        sxx += d.x * d.x;
        syy += d.y * d.y;
        sxy += d.x * d.y;
    }
    if sxx == 0.0 && syy == 0.0 {
        return None;
    }
    let angle = 0.5 * math::atan2(2.0 * sxy, sxx - syy);
    Some(LineModel {
        point: c,
        direction: Point2::from_angle(angle),
    })
}

/// Samples `iterations` point pairs, keeps the line with the most points
/// within `threshold` (first found wins ties) and refits it to that
/// consensus set by total least squares.
pub fn fit_line_ransac(
    points: &[Point2],
    iterations: usize,
    threshold: f64,
    seed: u64,
) -> Result<LineFit> {
    let first = *points.first().ok_or(Error::DegenerateCluster)?;
    if points.iter().all(|p| *p == first) {
        return Err(Error::DegenerateCluster);
    }

    let mut best: Option<(LineModel, usize)> = None;
    for (i, j) in sample_pairs(points.len(), iterations, seed) {
        let Some(model) = LineModel::through(points[i], points[j]) else {
            continue;
        };
        let n = count_inliers(points, &model, threshold);
        if best.is_none_or(|(_, m)| n > m) {
            best = Some((model, n));
        }
    }

    let (model, sample_inliers) = match best {
        Some((sample, n)) => {
            let support: Vec<Point2> = points
                .iter()
                .copied()
                .filter(|p| sample.distance(*p) <= threshold)
                .collect();
            (total_least_squares(&support).unwrap_or(sample), n)
        }
        // Every draw hit a duplicate pair; fall back to all points.
        None => {
            let model = total_least_squares(points).ok_or(Error::DegenerateCluster)?;
            (model, 0)
        }
    };
    let inliers = (0..points.len())
        .filter(|&k| model.distance(points[k]) <= threshold)
        .collect();
    Ok(LineFit {
        model,
        inliers,
        sample_inliers,
    })
}
