//! Uniform-grid bucketing for fixed-radius neighbour queries.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::geometry::Point2;
use crate::math;

/// Buckets point indices by square cells of side `cell`. Queries with a
/// radius up to `cell` only need to visit the 3×3 block around a point.
pub(crate) struct PointGrid {
    cell: f64,
    cells: BTreeMap<(i64, i64), Vec<usize>>,
}

impl PointGrid {
    pub fn new(points: &[Point2], cell: f64) -> Self {
        debug_assert!(cell > 0.0);
        let mut cells: BTreeMap<(i64, i64), Vec<usize>> = BTreeMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(Self::key(cell, *p)).or_default().push(i);
        }
        Self { cell, cells }
    }

    fn key(cell: f64, p: Point2) -> (i64, i64) {
        (math::floor(p.x / cell) as i64, math::floor(p.y / cell) as i64)
    }

    /// Calls `f` with every index `j` whose point lies within `radius` of
    /// `points[i]` (closed ball), excluding `i` itself. `radius` must not
    /// exceed the cell size.
    pub fn for_each_neighbor(
        &self,
        points: &[Point2],
        i: usize,
        radius: f64,
        mut f: impl FnMut(usize),
    ) {
        debug_assert!(radius <= self.cell);
        let p = points[i];
        let (cx, cy) = Self::key(self.cell, p);
        let r2 = radius * radius;
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(bucket) = self.cells.get(&(cx + dx, cy + dy)) {
                    for &j in bucket {
                        if j != i && p.distance_sq(points[j]) <= r2 {
                            f(j);
                        }
                    }
                }
            }
        }
    }

    pub fn count_neighbors(&self, points: &[Point2], i: usize, radius: f64) -> usize {
        let mut n = 0;
        self.for_each_neighbor(points, i, radius, |_| n += 1);
        n
    }
}
