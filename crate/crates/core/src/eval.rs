//! Run metrics: distance from the corridor centre line, measured corridor
//! width and accuracy of the detected row ends.
//!
//! Sample sums are taken in sorted order so every statistic is independent
//! of record order down to the last bit.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry::{Point2, Pose2};
use crate::in_row::InRowStatus;
use crate::log::{Outcome, RunLog};
use crate::navigator::ReportDetail;
use crate::sim::World;
use crate::{Error, Result};

/// Detections farther than this from every end pole are outliers.
pub const POLE_OUTLIER_DISTANCE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    pub max: f64,
    pub min: f64,
    pub count: usize,
}

impl Stats {
    pub fn from_samples(samples: impl IntoIterator<Item = f64>, what: &'static str) -> Result<Self> {
        let mut v: Vec<f64> = samples.into_iter().collect();
        if v.is_empty() {
            return Err(Error::NoSamples(what));
        }
        v.sort_by(f64::total_cmp);
        let sum: f64 = v.iter().sum();
        let (min, max) = (v[0], v[v.len() - 1]);
        Ok(Self {
            mean: (sum / v.len() as f64).clamp(min, max),
            max,
            min,
            count: v.len(),
        })
    }
}

/// In-row samples that count for the corridor metrics: the robot is
/// following the corridor (not yet exiting) and, when the true pose is
/// known, actually between the rows.
fn in_row_samples<'a>(
    log: &'a RunLog,
    world: Option<&'a World>,
) -> impl Iterator<Item = (Option<Pose2>, &'a InRowStatus)> + 'a {
    log.records.iter().filter_map(move |r| match &r.report.detail {
        ReportDetail::InRow(status) if !status.row_end_detected => {
            let inside = match (world, r.true_pose) {
                (Some(w), Some(p)) => w.inside_rows(p.position),
                _ => true,
            };
            inside.then_some((r.true_pose, status))
        }
        _ => None,
    })
}

/// Distance from the corridor centre line over the in-row samples. Uses
/// the true pose when both it and the world are available, otherwise half
/// the difference of the measured side distances.
pub fn center_displacement(log: &RunLog, world: Option<&World>) -> Result<Stats> {
    let samples = in_row_samples(log, world).map(|(pose, s)| match (world, pose) {
        (Some(w), Some(p)) => w.center_line_offset(p.position),
        _ => 0.5 * (s.left_distance - s.right_distance).abs(),
    });
    Stats::from_samples(samples, "in-row records")
}

/// Statistics of the measured corridor width (left + right distance).
pub fn corridor_width_stats(log: &RunLog, world: Option<&World>) -> Result<Stats> {
    let samples = in_row_samples(log, world).map(|(_, s)| s.left_distance + s.right_distance);
    Stats::from_samples(samples, "in-row records")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionStats {
    /// Over detections within the outlier distance of an end pole.
    pub error: Stats,
    pub outliers: usize,
}

/// Distance from each world-frame detection to the nearest end pole.
pub fn pole_detection_error(detections: &[Point2], world: &World) -> Result<DetectionStats> {
    let poles = world.end_poles();
    let errors: Vec<f64> = detections
        .iter()
        .filter_map(|d| poles.iter().map(|p| p.distance(*d)).min_by(f64::total_cmp))
        .collect();
    let outliers = errors.iter().filter(|e| **e > POLE_OUTLIER_DISTANCE).count();
    let error = Stats::from_samples(
        errors.into_iter().filter(|e| *e <= POLE_OUTLIER_DISTANCE),
        "pole detections",
    )?;
    Ok(DetectionStats { error, outliers })
}

/// End-row detections of both policies in the world frame.
pub fn world_detections(log: &RunLog) -> (Vec<Point2>, Vec<Point2>) {
    let mut nearest = Vec::new();
    let mut line_fitting = Vec::new();
    for r in &log.records {
        if let (ReportDetail::EndRow(e), Some(pose)) = (&r.report.detail, r.true_pose) {
            nearest.extend(e.nearest.iter().map(|p| pose.to_world(*p)));
            line_fitting.extend(e.line_fitting.iter().map(|p| pose.to_world(*p)));
        }
    }
    (nearest, line_fitting)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub outcome: Outcome,
    pub center_displacement: Option<Stats>,
    pub corridor_width: Option<Stats>,
    pub pole_error_nearest: Option<DetectionStats>,
    pub pole_error_line_fitting: Option<DetectionStats>,
}

/// All metrics that the log supports; missing inputs leave a metric empty.
pub fn evaluate(log: &RunLog, world: Option<&World>) -> MetricsReport {
    let (nearest, line_fitting) = world_detections(log);
    let poles = |d: &[Point2]| world.and_then(|w| pole_detection_error(d, w).ok());
    MetricsReport {
        outcome: log.outcome.clone(),
        center_displacement: center_displacement(log, world).ok(),
        corridor_width: corridor_width_stats(log, world).ok(),
        pole_error_nearest: poles(&nearest),
        pole_error_line_fitting: poles(&line_fitting),
    }
}
