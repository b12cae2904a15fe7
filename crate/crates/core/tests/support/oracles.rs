//! Brute-force reference implementations and numeric checks shared by the
//! property suites and the acceptance report.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vinenav_core::geometry::{Cone2, Point2, Pose2, Rect2};
use vinenav_core::in_row::InRowConfig;
use vinenav_core::odometry::{integrate_pose, tread_to_twist, twist_to_treads, KinematicParams, TreadSpeeds, Twist};

pub const EPS: f64 = 1e-12;

/// Points closer than this to a shape boundary are not judged.
pub const AMBIGUOUS: f64 = 1e-9;

/// Bearing from body-forward, positive to the left.
pub fn bearing(p: Point2) -> f64 {
    (-p.x).atan2(p.y)
}

fn in_sector(points: &[Point2], length: f64, left: f64, right: f64) -> usize {
    let limit = (length + EPS) * (length + EPS);
    points
        .iter()
        .filter(|p| p.x * p.x + p.y * p.y <= limit)
        .filter(|p| {
            let b = if p.x == 0.0 && p.y == 0.0 { 0.0 } else { bearing(**p) };
            b >= -right - EPS && b <= left + EPS
        })
        .count()
}

/// Free cone by lockstep growth, recounting every point at each step.
/// Returns the (left, right) half-angles.
pub fn cone_by_sweep(points: &[Point2], cfg: &InRowConfig) -> (f64, f64) {
    let angle = |k: u32| (k as f64 * cfg.cone_angle_step).min(cfg.cone_max_half_angle);
    let count = |l: u32, r: u32| in_sector(points, cfg.cone_length, angle(l), angle(r));
    let threshold = cfg.cone_point_threshold;
    let (mut l, mut r) = (0u32, 0u32);
    let mut l_open = angle(0) < cfg.cone_max_half_angle;
    let mut r_open = l_open;
    while l_open || r_open {
        let grow_l = l_open && count(l + 1, r) < threshold;
        let grow_r = r_open && count(l, r + 1) < threshold;
        if grow_l && grow_r && count(l + 1, r + 1) >= threshold {
            break;
        }
        if grow_l {
            l += 1;
        }
        if grow_r {
            r += 1;
        }
        l_open = grow_l && angle(l) < cfg.cone_max_half_angle;
        r_open = grow_r && angle(r) < cfg.cone_max_half_angle;
    }
    (angle(l), angle(r))
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Connected components by union-find over all pairs, as ascending index
/// lists ordered by their first index, keeping those with `min_size` points.
pub fn clusters_by_union_find(points: &[Point2], tolerance: f64, min_size: usize) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            let (dx, dy) = (points[i].x - points[j].x, points[i].y - points[j].y);
            if dx * dx + dy * dy <= tolerance * tolerance {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().filter(|g| g.len() >= min_size.max(1)).collect();
    out.sort();
    out
}

/// Sorted bit patterns of each cluster's points, clusters sorted, for
/// comparing partitions without regard to order.
pub fn partition_key(clusters: &[Vec<Point2>]) -> Vec<Vec<(u64, u64)>> {
    let mut key: Vec<Vec<(u64, u64)>> = clusters
        .iter()
        .map(|c| {
            let mut k: Vec<(u64, u64)> = c.iter().map(|p| (p.x.to_bits(), p.y.to_bits())).collect();
            k.sort_unstable();
            k
        })
        .collect();
    key.sort();
    key
}

/// Points with at least `min_neighbors` others within `radius`, by
/// checking every pair.
pub fn outliers_by_pairs(points: &[Point2], radius: f64, min_neighbors: usize) -> Vec<Point2> {
    points
        .iter()
        .enumerate()
        .filter(|(i, p)| {
            let n = points
                .iter()
                .enumerate()
                .filter(|(j, q)| {
                    let (dx, dy) = (p.x - q.x, p.y - q.y);
                    i != j && dx * dx + dy * dy <= radius * radius
                })
                .count();
            n >= min_neighbors
        })
        .map(|(_, p)| *p)
        .collect()
}

/// Rectangle membership from its corner polygon; `None` near the boundary.
pub fn in_rect(p: Point2, rect: &Rect2) -> Option<bool> {
    let (s, c) = rect.heading.sin_cos();
    let (hl, hw) = (rect.half_length, rect.half_width);
    let corner = |a: f64, b: f64| {
        Point2::new(rect.center.x + a * c - b * s, rect.center.y + a * s + b * c)
    };
    let corners = [corner(hl, hw), corner(-hl, hw), corner(-hl, -hw), corner(hl, -hw)];
    let mut min_margin = f64::INFINITY;
    for k in 0..4 {
        let (a, b) = (corners[k], corners[(k + 1) % 4]);
        let edge = b - a;
        let len = edge.norm();
        // Counter-clockwise polygon: inside is to the left of every edge.
        let margin = if len == 0.0 { 0.0 } else { edge.cross(p - a) / len };
        min_margin = min_margin.min(margin);
    }
    if min_margin.abs() < AMBIGUOUS {
        None
    } else {
        Some(min_margin > 0.0)
    }
}

/// Cone membership from polar coordinates around the apex; `None` near the
/// boundary.
pub fn in_cone(p: Point2, cone: &Cone2) -> Option<bool> {
    let d = p - cone.apex;
    let r = d.x.hypot(d.y);
    if (r - cone.length).abs() < AMBIGUOUS || r < AMBIGUOUS {
        return None;
    }
    if r > cone.length {
        return Some(false);
    }
    let rel = (d.y.atan2(d.x) - cone.axis_heading + std::f64::consts::PI)
        .rem_euclid(std::f64::consts::TAU)
        - std::f64::consts::PI;
    let margin = (rel + cone.right_half_angle).min(cone.left_half_angle - rel);
    if margin.abs() < AMBIGUOUS {
        None
    } else {
        Some(margin > 0.0)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NumericReport {
    /// Largest |v_x| from the forward map.
    pub lateral_velocity: f64,
    /// Largest deviation from linearity in the tread speeds.
    pub linearity: f64,
    /// Largest deviation from proportionality in α.
    pub alpha_scaling: f64,
    /// Largest position gap between one arc step and fine Euler steps.
    pub arc_vs_euler: f64,
    /// Largest tread speed error after twist → treads → twist → treads.
    pub inverse_round_trip: f64,
    /// Largest position error of world → local → world.
    pub transform_round_trip: f64,
}

fn random_params(rng: &mut ChaCha8Rng) -> KinematicParams {
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    KinematicParams::new(rng.random_range(0.5..1.5), sign * rng.random_range(0.2..1.0)).unwrap()
}

fn twist_gap(a: Twist, b: Twist) -> f64 {
    (a.v_x - b.v_x).abs().max((a.v_y - b.v_y).abs()).max((a.omega_z - b.omega_z).abs())
}

/// Runs `cases` random instances of each numeric identity.
pub fn numeric_report(cases: usize, seed: u64) -> NumericReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = NumericReport::default();
    for _ in 0..cases {
        let params = random_params(&mut rng);
        let t1 = TreadSpeeds::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let t2 = TreadSpeeds::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let (a, b) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let tw1 = tread_to_twist(t1, &params).unwrap();
        let tw2 = tread_to_twist(t2, &params).unwrap();
        rep.lateral_velocity = rep.lateral_velocity.max(tw1.v_x.abs());

        let combined = TreadSpeeds::new(a * t1.v_left + b * t2.v_left, a * t1.v_right + b * t2.v_right);
        let lhs = tread_to_twist(combined, &params).unwrap();
        let rhs = Twist {
            v_x: a * tw1.v_x + b * tw2.v_x,
            v_y: a * tw1.v_y + b * tw2.v_y,
            omega_z: a * tw1.omega_z + b * tw2.omega_z,
        };
        rep.linearity = rep.linearity.max(twist_gap(lhs, rhs));

        let k = rng.random_range(0.5..2.0);
        let scaled = KinematicParams::new(params.alpha * k, params.x_icr).unwrap();
        let tws = tread_to_twist(t1, &scaled).unwrap();
        let expected = Twist { v_x: k * tw1.v_x, v_y: k * tw1.v_y, omega_z: k * tw1.omega_z };
        rep.alpha_scaling = rep.alpha_scaling.max(twist_gap(tws, expected));

        let back = twist_to_treads(tw1, &params);
        let again = twist_to_treads(tread_to_twist(back, &params).unwrap(), &params);
        let gap = (again.v_left - t1.v_left).abs().max((again.v_right - t1.v_right).abs());
        rep.inverse_round_trip = rep.inverse_round_trip.max(gap);

        let pose = Pose2::new(rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0), rng.random_range(-3.1..3.1));
        let twist = Twist::new(rng.random_range(-2.0..2.0), rng.random_range(-1.5..1.5));
        let dt = 0.02;
        let arc = integrate_pose(&pose, twist, dt);
        let steps = 20_000;
        let h = dt / steps as f64;
        let (mut x, mut y, mut th) = (pose.position.x, pose.position.y, pose.heading);
        for _ in 0..steps {
            // Body +y is forward: world velocity is v · (−sin θ, cos θ).
            x += -twist.v_y * th.sin() * h;
            y += twist.v_y * th.cos() * h;
            th += twist.omega_z * h;
        }
        let gap = (arc.position.x - x).hypot(arc.position.y - y);
        rep.arc_vs_euler = rep.arc_vs_euler.max(gap);

        let p = Point2::new(rng.random_range(-100.0..100.0), rng.random_range(-100.0..100.0));
        let round = pose.to_world(pose.to_local(p));
        rep.transform_round_trip = rep.transform_round_trip.max(round.distance(p));
    }
    rep
}
