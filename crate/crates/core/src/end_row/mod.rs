//! Headland navigation along the row ends.
//!
//! Row ends (support poles plus the last plants) show up as separate point
//! clusters because rows are widely spaced. One end point is chosen per
//! cluster, either the nearest well-supported point (`Nearest`) or that
//! point projected onto a RANSAC line through the cluster (`LineFitting`).
//! The robot holds a fixed distance from the line through neighbouring end
//! points, counts the ends it passes and stops halfway between the next
//! pair, in front of the corridor it has to enter.

mod cluster;
mod ransac;

pub use cluster::{connected_components, euclidean_cluster, Cluster};
pub use ransac::{
    count_inliers, fit_line_ransac, sample_pairs, total_least_squares, LineFit, LineModel,
};

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry::{Point2, Pose2, Segment2};
use crate::math;
use crate::odometry::Twist;
use crate::scan::Scan2D;
use crate::turn::TurnDirection;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndPointPolicy {
    Nearest,
    LineFitting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EndRowConfig {
    pub cluster_tolerance: f64,
    pub min_cluster_size: usize,
    pub neighborhood_radius: f64,
    pub neighborhood_min_points: usize,
    pub ransac_iterations: usize,
    pub ransac_threshold: f64,
    pub rng_seed: u64,
    /// Policy whose end points drive the controller.
    pub policy: EndPointPolicy,
    /// Lateral distance kept from the line of row ends.
    pub follow_distance: f64,
    /// Row ends to pass before stopping; 1 means the adjacent corridor.
    pub rows_to_skip: usize,
    pub speed: f64,
    pub heading_gain: f64,
    /// Radians of heading correction per metre of lateral error (via atan).
    pub cross_track_gain: f64,
    pub max_omega: f64,
    /// Along-track dead band before an end counts as passed.
    pub pass_hysteresis: f64,
    /// End points closer than this along track are the same row end.
    pub row_merge_distance: f64,
    /// End points beyond this lateral distance are ignored.
    pub max_lateral: f64,
    /// End points farther than this from the current headland line are
    /// not treated as row ends.
    pub end_gate: f64,
    /// Seconds without usable end points before perception is degraded.
    pub perception_timeout: f64,
}

impl Default for EndRowConfig {
    fn default() -> Self {
        Self {
            cluster_tolerance: 0.5,
            min_cluster_size: 4,
            neighborhood_radius: 0.3,
            neighborhood_min_points: 3,
            ransac_iterations: 100,
            ransac_threshold: 0.1,
            rng_seed: 0,
            policy: EndPointPolicy::LineFitting,
            follow_distance: 1.5,
            rows_to_skip: 1,
            speed: 0.5,
            heading_gain: 1.0,
            cross_track_gain: 1.0,
            max_omega: 0.8,
            pass_hysteresis: 0.2,
            row_merge_distance: 0.8,
            max_lateral: 5.0,
            end_gate: 0.7,
            perception_timeout: 1.0,
        }
    }
}

impl EndRowConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("end_row.cluster_tolerance", self.cluster_tolerance),
            ("end_row.neighborhood_radius", self.neighborhood_radius),
            ("end_row.ransac_threshold", self.ransac_threshold),
            ("end_row.follow_distance", self.follow_distance),
            ("end_row.speed", self.speed),
            ("end_row.heading_gain", self.heading_gain),
            ("end_row.max_omega", self.max_omega),
            ("end_row.row_merge_distance", self.row_merge_distance),
            ("end_row.max_lateral", self.max_lateral),
            ("end_row.end_gate", self.end_gate),
            ("end_row.perception_timeout", self.perception_timeout),
        ];
        for (field, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(field, "must be > 0"));
            }
        }
        if self.ransac_iterations < 1 {
            return Err(Error::config("end_row.ransac_iterations", "must be >= 1"));
        }
        if self.rows_to_skip < 1 {
            return Err(Error::config("end_row.rows_to_skip", "must be >= 1"));
        }
        if !(self.cross_track_gain >= 0.0 && self.pass_hysteresis >= 0.0) {
            return Err(Error::config("end_row.cross_track_gain", "gains must be >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndPoint {
    pub position: Point2,
    pub cluster_id: usize,
    pub policy: EndPointPolicy,
}

/// Nearest cluster point to `robot` among those with at least
/// `neighborhood_min_points` other cluster points within
/// `neighborhood_radius`. Ties go to the lower point index.
pub fn pick_nearest(cluster: &Cluster, robot: Point2, cfg: &EndRowConfig) -> Option<EndPoint> {
    let pts = &cluster.points;
    let r2 = cfg.neighborhood_radius * cfg.neighborhood_radius;
    let qualifies = |i: usize| {
        let p = pts[i];
        let n = pts
            .iter()
            .enumerate()
            .filter(|(j, q)| *j != i && p.distance_sq(**q) <= r2)
            .count();
        n >= cfg.neighborhood_min_points
    };
    let mut order: Vec<(f64, usize)> = pts
        .iter()
        .enumerate()
        .map(|(i, p)| (p.distance_sq(robot), i))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    order
        .into_iter()
        .find(|(_, i)| qualifies(*i))
        .map(|(_, i)| EndPoint {
            position: pts[i],
            cluster_id: cluster.id,
            policy: EndPointPolicy::Nearest,
        })
}

pub fn fit_cluster_line(cluster: &Cluster, cfg: &EndRowConfig) -> Result<LineFit> {
    fit_line_ransac(
        &cluster.points,
        cfg.ransac_iterations,
        cfg.ransac_threshold,
        cfg.rng_seed,
    )
}

/// The Nearest end point projected onto the cluster's RANSAC line.
pub fn pick_line_fitting(
    cluster: &Cluster,
    robot: Point2,
    cfg: &EndRowConfig,
) -> Result<Option<EndPoint>> {
    let Some(nearest) = pick_nearest(cluster, robot, cfg) else {
        return Ok(None);
    };
    let fit = fit_cluster_line(cluster, cfg)?;
    Ok(Some(EndPoint {
        position: fit.model.project(nearest.position),
        cluster_id: cluster.id,
        policy: EndPointPolicy::LineFitting,
    }))
}

/// Segment between the two end points that bracket the robot along the
/// headland: the last one at or behind `origin` and the first one ahead of
/// it, measured along the unit vector `along`. If all points lie on one
/// side, the two closest along track are used. The segment points in the
/// direction of travel.
pub fn build_direction_segment(points: &[Point2], origin: Point2, along: Point2) -> Result<Segment2> {
    if points.len() < 2 {
        return Err(Error::NotEnoughEndPoints {
            needed: 2,
            got: points.len(),
        });
    }
    let mut ordered: Vec<(f64, Point2)> =
        points.iter().map(|p| ((*p - origin).dot(along), *p)).collect();
    ordered.sort_by(|a, b| a.0.total_cmp(&b.0));
    let first_ahead = ordered.partition_point(|(s, _)| *s <= 0.0);
    let (a, b) = match first_ahead {
        0 => (ordered[0].1, ordered[1].1),
        k if k == ordered.len() => (ordered[k - 2].1, ordered[k - 1].1),
        k => (ordered[k - 1].1, ordered[k].1),
    };
    Segment2::new(a, b).map_err(|_| Error::NotEnoughEndPoints { needed: 2, got: 1 })
}

/// Clusters and end points from one scan (sensor frame).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EndRowPerception {
    pub timestamp: f64,
    pub clusters: Vec<Cluster>,
    pub nearest: Vec<EndPoint>,
    pub line_fitting: Vec<EndPoint>,
}

impl EndRowPerception {
    pub fn end_points(&self, policy: EndPointPolicy) -> &[EndPoint] {
        match policy {
            EndPointPolicy::Nearest => &self.nearest,
            EndPointPolicy::LineFitting => &self.line_fitting,
        }
    }
}

/// Clusters the scan and picks end points with both policies. Degenerate
/// clusters are skipped for line fitting.
pub fn perceive(scan: &Scan2D, cfg: &EndRowConfig) -> EndRowPerception {
    let clusters = euclidean_cluster(&scan.points, cfg.cluster_tolerance, cfg.min_cluster_size);
    let mut nearest = Vec::new();
    let mut line_fitting = Vec::new();
    for c in &clusters {
        if let Some(n) = pick_nearest(c, Point2::ORIGIN, cfg) {
            nearest.push(n);
            if let Ok(fit) = fit_cluster_line(c, cfg) {
                line_fitting.push(EndPoint {
                    position: fit.model.project(n.position),
                    cluster_id: c.id,
                    policy: EndPointPolicy::LineFitting,
                });
            }
        }
    }
    EndRowPerception {
        timestamp: scan.timestamp,
        clusters,
        nearest,
        line_fitting,
    }
}

/// End points that plausibly mark row ends on `row_side` of the robot: the
/// laterally closest point wins among points within `row_merge_distance`
/// along track of each other, so pieces of a row farther into the field
/// do not count as extra row ends.
pub fn headland_candidates(
    end_points: &[EndPoint],
    row_side: TurnDirection,
    cfg: &EndRowConfig,
) -> Vec<Point2> {
    let side = row_side.sign();
    let mut pts: Vec<Point2> = end_points
        .iter()
        .map(|e| e.position)
        .filter(|p| -side * p.x > 0.0 && p.x.abs() <= cfg.max_lateral)
        .collect();
    pts.sort_by(|a, b| a.x.abs().total_cmp(&b.x.abs()));
    let mut kept: Vec<Point2> = Vec::new();
    for p in pts {
        if kept.iter().all(|k| (k.y - p.y).abs() >= cfg.row_merge_distance) {
            kept.push(p);
        }
    }
    kept
}

/// A row end remembered in the odometry frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackedEnd {
    pub position: Point2,
    pub ahead: bool,
    /// Order in which it was passed, if it has been.
    pub passed_rank: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndRowStatus {
    pub cluster_count: usize,
    pub candidates: Vec<Point2>,
    pub segment: Option<Segment2>,
    pub passed_count: usize,
    /// Remaining along-track distance to the stopping point, once known.
    pub target_along: Option<f64>,
    pub lateral_error: Option<f64>,
    pub arrived: bool,
    pub degraded: bool,
}

/// Weight of a new observation when updating a tracked row end.
const TRACK_GAIN: f64 = 0.3;

/// Largest change of headland direction accepted from one scan.
const MAX_DIRECTION_JUMP: f64 = 0.35;

/// Controller memory for one headland traversal. Row ends and the
/// headland line are kept in the odometry frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndRowController {
    pub row_side: TurnDirection,
    pub tracked: Vec<TrackedEnd>,
    pub passed_count: usize,
    /// Unit headland direction.
    pub direction: Option<Point2>,
    /// A point on the line of row ends.
    pub anchor: Option<Point2>,
    pub last_command: Twist,
    pub since_perception: f64,
    pub arrived: bool,
}

impl EndRowController {
    pub fn new(row_side: TurnDirection) -> Self {
        Self {
            row_side,
            tracked: Vec::new(),
            passed_count: 0,
            direction: None,
            anchor: None,
            last_command: Twist::ZERO,
            since_perception: 0.0,
            arrived: false,
        }
    }

    /// Seeds the headland direction, e.g. from the pose after alignment.
    pub fn with_direction(mut self, direction: Point2) -> Self {
        self.direction = Some(direction);
        self
    }

    fn track(&mut self, world: &[Point2], robot: Point2, along: Point2, cfg: &EndRowConfig) {
        for p in world {
            let matched = self
                .tracked
                .iter_mut()
                .filter(|t| t.position.distance(*p) < cfg.row_merge_distance)
                .min_by(|a, b| a.position.distance_sq(*p).total_cmp(&b.position.distance_sq(*p)));
            match matched {
                Some(t) => t.position = t.position + (*p - t.position) * TRACK_GAIN,
                None => self.tracked.push(TrackedEnd {
                    position: *p,
                    ahead: (*p - robot).dot(along) > 0.0,
                    passed_rank: None,
                }),
            }
        }
        for t in &mut self.tracked {
            let s = (t.position - robot).dot(along);
            if t.ahead && s < -cfg.pass_hysteresis {
                t.ahead = false;
                // A line update can swing an end back ahead; it counts once.
                if t.passed_rank.is_none() {
                    self.passed_count += 1;
                    t.passed_rank = Some(self.passed_count);
                }
            } else if !t.ahead && s > cfg.pass_hysteresis {
                t.ahead = true;
            }
        }
    }

    /// Re-estimates the headland line from the tracked ends bracketing the
    /// robot; implausible jumps keep the previous direction.
    fn update_line(&mut self, robot: Point2, along: Point2) -> Option<Segment2> {
        let ends: Vec<Point2> = self.tracked.iter().map(|t| t.position).collect();
        let segment = build_direction_segment(&ends, robot, along).ok();
        match segment {
            Some(s) if relative_angle(s.direction(), along).abs() <= MAX_DIRECTION_JUMP => {
                self.direction = Some(s.direction());
                self.anchor = Some(s.a);
            }
            _ => {
                if let Some(nearest) = ends
                    .iter()
                    .min_by(|a, b| a.distance_sq(robot).total_cmp(&b.distance_sq(robot)))
                {
                    self.anchor = Some(*nearest);
                }
            }
        }
        segment
    }

    /// Stopping point in the odometry frame: halfway between the
    /// `rows_to_skip`-th passed end and the next end ahead of it.
    fn target(&self, robot: Point2, along: Point2, cfg: &EndRowConfig) -> Option<Point2> {
        let last = self
            .tracked
            .iter()
            .find(|t| t.passed_rank == Some(cfg.rows_to_skip))?;
        let s_last = (last.position - robot).dot(along);
        let next = self
            .tracked
            .iter()
            .map(|t| ((t.position - robot).dot(along), t.position))
            .filter(|(s, _)| *s > s_last + cfg.row_merge_distance)
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, p)| p);
        match next {
            Some(n) => Some(last.position.midpoint(n)),
            None => {
                // Next end not seen yet: assume the spacing of the previous pair.
                let prev = self
                    .tracked
                    .iter()
                    .map(|t| ((t.position - robot).dot(along), t.position))
                    .filter(|(s, _)| *s < s_last - cfg.row_merge_distance)
                    .max_by(|a, b| a.0.total_cmp(&b.0))?;
                let spacing = s_last - prev.0;
                Some(last.position + along * (0.5 * spacing))
            }
        }
    }

    /// One scan-rate update from the latest perception result.
    pub fn step(
        &mut self,
        perception: &EndRowPerception,
        odom_pose: &Pose2,
        dt: f64,
        cfg: &EndRowConfig,
    ) -> (Twist, EndRowStatus) {
        let candidates = headland_candidates(perception.end_points(cfg.policy), self.row_side, cfg);
        let mut status = EndRowStatus {
            cluster_count: perception.clusters.len(),
            candidates: candidates.clone(),
            segment: None,
            passed_count: self.passed_count,
            target_along: None,
            lateral_error: None,
            arrived: self.arrived,
            degraded: false,
        };
        if self.arrived {
            return (Twist::ZERO, status);
        }

        let robot = odom_pose.position;
        let along = self.direction.unwrap_or_else(|| odom_pose.forward());
        let world: Vec<Point2> = candidates.iter().map(|p| odom_pose.to_world(*p)).collect();
        // The laterally nearest candidate fixes the line on the first scan.
        let anchor = self.anchor.or_else(|| world.first().copied());
        let gated: Vec<Point2> = match anchor {
            Some(a) => world
                .into_iter()
                .filter(|p| along.cross(*p - a).abs() <= cfg.end_gate)
                .collect(),
            None => Vec::new(),
        };
        if gated.is_empty() {
            self.since_perception += dt;
            status.degraded = self.since_perception > cfg.perception_timeout;
            return (self.last_command, status);
        }
        self.since_perception = 0.0;
        self.anchor = anchor;

        self.track(&gated, robot, along, cfg);
        status.passed_count = self.passed_count;
        let segment = self.update_line(robot, along);
        status.segment = segment.and_then(|s| {
            Segment2::new(odom_pose.to_local(s.a), odom_pose.to_local(s.b)).ok()
        });

        let along = self.direction.unwrap_or(along);
        let anchor = self.anchor.unwrap_or(gated[0]);
        let offset = along.cross(robot - anchor);
        let desired = -self.row_side.sign() * cfg.follow_distance;
        let lateral_error = offset - desired;
        status.lateral_error = Some(lateral_error);

        let heading_error = relative_angle(along, odom_pose.forward());
        let bearing = heading_error - math::atan(cfg.cross_track_gain * lateral_error);
        let omega = (cfg.heading_gain * bearing).clamp(-cfg.max_omega, cfg.max_omega);

        let mut v = cfg.speed;
        if let Some(target) = self.target(robot, along, cfg) {
            let remaining = (target - robot).dot(along);
            status.target_along = Some(remaining);
            if remaining <= 0.0 {
                self.arrived = true;
                status.arrived = true;
                self.last_command = Twist::ZERO;
                return (Twist::ZERO, status);
            }
            v = v.min(0.1 + remaining);
        }
        let command = Twist::new(v, omega);
        self.last_command = command;
        (command, status)
    }
}

/// Counter-clockwise angle from `from` to `to`.
fn relative_angle(to: Point2, from: Point2) -> f64 {
    math::atan2(from.cross(to), from.dot(to))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn cluster(points: &[(f64, f64)]) -> Cluster {
        Cluster {
            id: 0,
            points: points.iter().map(|&(x, y)| Point2::new(x, y)).collect(),
        }
    }

    #[test]
    fn nearest_when_all_qualify() {
        let cfg = EndRowConfig {
            neighborhood_min_points: 2,
            ..Default::default()
        };
        let c = cluster(&[(2.0, 0.0), (2.05, 0.02), (2.02, 0.05), (2.08, 0.08), (1.99, 0.07)]);
        let e = pick_nearest(&c, Point2::ORIGIN, &cfg).unwrap();
        assert_eq!(e.position, Point2::new(1.99, 0.07));
        assert_eq!(e.policy, EndPointPolicy::Nearest);
    }

    #[test]
    fn isolated_spur_is_skipped() {
        let cfg = EndRowConfig {
            neighborhood_min_points: 2,
            neighborhood_radius: 0.3,
            ..Default::default()
        };
        // Spur at 1.0 m has no neighbours within 0.3 m; the next closest
        // qualifying point is (2.0, 0.0) with four neighbours.
        let c = cluster(&[
            (2.1, 0.1),
            (1.0, 0.0),
            (2.0, 0.0),
            (2.1, -0.1),
            (2.2, 0.0),
            (2.05, 0.05),
        ]);
        let e = pick_nearest(&c, Point2::ORIGIN, &cfg).unwrap();
        assert_eq!(e.position, Point2::new(2.0, 0.0));
    }

    #[test]
    fn no_qualifying_point() {
        let cfg = EndRowConfig::default();
        let c = cluster(&[(0.0, 1.0), (0.0, 2.0), (0.0, 3.0), (0.0, 4.0)]);
        assert!(pick_nearest(&c, Point2::ORIGIN, &cfg).is_none());
        assert_eq!(pick_line_fitting(&c, Point2::ORIGIN, &cfg), Ok(None));
    }

    #[test]
    fn line_fitting_projects_onto_line() {
        let cfg = EndRowConfig {
            neighborhood_min_points: 1,
            neighborhood_radius: 0.5,
            ..Default::default()
        };
        let mut pts: Vec<(f64, f64)> = (0..10).map(|i| (1.0 + 0.2 * i as f64, 0.0)).collect();
        pts.push((1.0, 0.3));
        let c = cluster(&pts);
        let robot = Point2::new(1.0, 1.0);
        let e = pick_line_fitting(&c, robot, &cfg).unwrap().unwrap();
        assert!((e.position.x - 1.0).abs() < 1e-9, "{:?}", e.position);
        assert!(e.position.y.abs() < 1e-9);
    }

    #[test]
    fn segment_examples() {
        let east = Point2::new(1.0, 0.0);
        let s = build_direction_segment(
            &[Point2::new(0.0, 2.0), Point2::new(4.0, 2.0)],
            Point2::new(0.0, 0.0),
            east,
        )
        .unwrap();
        assert_eq!((s.a, s.b), (Point2::new(0.0, 2.0), Point2::new(4.0, 2.0)));

        // Robot abreast of the middle pole.
        let poles = [Point2::new(-2.0, 1.5), Point2::new(0.0, 1.5), Point2::new(2.0, 1.5)];
        let s = build_direction_segment(&poles, Point2::ORIGIN, east).unwrap();
        assert_eq!((s.a, s.b), (poles[1], poles[2]));

        assert!(build_direction_segment(&poles[..1], Point2::ORIGIN, east).is_err());
    }

    #[test]
    fn candidates_keep_row_side_and_nearest_piece() {
        let cfg = EndRowConfig::default();
        let ep = |x, y| EndPoint {
            position: Point2::new(x, y),
            cluster_id: 0,
            policy: EndPointPolicy::Nearest,
        };
        let pts = vec![ep(-1.5, 1.0), ep(-3.0, 1.2), ep(-1.5, -1.0), ep(1.5, 0.0)];
        let c = headland_candidates(&pts, TurnDirection::Left, &cfg);
        assert_eq!(c, vec![Point2::new(-1.5, 1.0), Point2::new(-1.5, -1.0)]);
    }

    #[test]
    fn config_validation() {
        assert!(EndRowConfig::default().validate().is_ok());
        let bad = EndRowConfig { ransac_iterations: 0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = EndRowConfig { cluster_tolerance: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn counts_passed_ends_and_stops_between_next_pair() {
        // Row ends every 2 m along world +y at x = −1.5; robot drives north.
        let cfg = EndRowConfig::default();
        let mut ctl = EndRowController::new(TurnDirection::Left);
        let ends: Vec<Point2> = (0..5).map(|i| Point2::new(-1.5, -1.0 + 2.0 * i as f64)).collect();
        let mut pose = Pose2::new(0.0, 0.0, 0.0);
        let mut stop = None;
        for k in 0..200 {
            let body: Vec<EndPoint> = ends
                .iter()
                .map(|p| EndPoint {
                    position: pose.to_local(*p),
                    cluster_id: 0,
                    policy: EndPointPolicy::LineFitting,
                })
                .collect();
            let perception = EndRowPerception {
                timestamp: k as f64 * 0.1,
                clusters: vec![],
                nearest: vec![],
                line_fitting: body,
            };
            let (cmd, status) = ctl.step(&perception, &pose, 0.1, &cfg);
            if status.arrived {
                stop = Some(pose.position.y);
                assert!(cmd.is_zero());
                break;
            }
            pose = crate::odometry::integrate_pose(&pose, cmd, 0.1);
        }
        // Passed the end at y = 1; stop halfway to the end at y = 3.
        let y = stop.expect("never arrived");
        assert!((y - 2.0).abs() < 0.06, "stopped at {y}");
        assert_eq!(ctl.passed_count, 1);
    }
}
