//! Euclidean cluster extraction: connected components of the graph that
//! links every pair of points at most `tolerance` apart.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry::Point2;
use crate::spatial::PointGrid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub id: usize,
    pub points: Vec<Point2>,
}

impl Cluster {
    pub fn centroid(&self) -> Point2 {
        let n = self.points.len() as f64;
        let sum = self.points.iter().fold(Point2::ORIGIN, |acc, p| acc + *p);
        sum * (1.0 / n)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Connected components as lists of point indices, each list ascending and
/// the lists ordered by their smallest index.
pub fn connected_components(points: &[Point2], tolerance: f64) -> Vec<Vec<usize>> {
    let grid = PointGrid::new(points, tolerance);
    let mut seen = vec![false; points.len()];
    let mut components = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..points.len() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut members = Vec::new();
        while let Some(i) = queue.pop_front() {
            members.push(i);
            grid.for_each_neighbor(points, i, tolerance, |j| {
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            });
        }
        members.sort_unstable();
        components.push(members);
    }
    components
}

/// Clusters with at least `min_size` points, ids assigned in order of the
/// bearing of each cluster's centroid (counter-clockwise from sensor +x).
pub fn euclidean_cluster(points: &[Point2], tolerance: f64, min_size: usize) -> Vec<Cluster> {
    let mut clusters: Vec<Cluster> = connected_components(points, tolerance)
        .into_iter()
        .filter(|c| c.len() >= min_size.max(1))
        .map(|c| Cluster {
            id: 0,
            points: c.into_iter().map(|i| points[i]).collect(),
        })
        .collect();
    // Stable sort keeps discovery order for equal bearings.
    clusters.sort_by(|a, b| a.centroid().angle().total_cmp(&b.centroid().angle()));
    for (id, c) in clusters.iter_mut().enumerate() {
        c.id = id;
    }
    clusters
}
