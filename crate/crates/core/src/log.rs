//! Records produced by a run and consumed by the evaluation.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::geometry::Pose2;
use crate::navigator::{FaultReason, Phase, ScanReport, Transition};
use crate::{Error, Result};

/// A navigator report together with the simulator's pose at that instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub true_pose: Option<Pose2>,
    #[serde(flatten)]
    pub report: ScanReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub pose: Pose2,
    pub odom_pose: Pose2,
    pub phase: Phase,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub final_phase: Phase,
    pub fault: Option<FaultReason>,
    pub timed_out: bool,
    pub duration: f64,
    pub corridors_completed: usize,
    /// Separate contacts between the footprint and any obstacle.
    pub collisions: usize,
    pub collision_ticks: usize,
}

impl Outcome {
    pub fn succeeded(&self) -> bool {
        self.final_phase == Phase::Done
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub config: RunConfig,
    pub outcome: Outcome,
    pub transitions: Vec<Transition>,
    /// Ground-truth trajectory at the scan rate.
    pub trajectory: Vec<TrajectorySample>,
    pub records: Vec<ScanRecord>,
}

impl RunLog {
    /// Checks that trajectory and record timestamps strictly increase.
    pub fn validate(&self) -> Result<()> {
        strictly_increasing(self.trajectory.iter().map(|s| s.t))?;
        strictly_increasing(self.records.iter().map(|r| r.report.t))
    }

    pub fn phase_sequence(&self) -> Vec<Phase> {
        let mut seq = Vec::with_capacity(self.transitions.len() + 1);
        seq.push(Phase::InRow);
        seq.extend(self.transitions.iter().map(|t| t.to));
        seq
    }
}

fn strictly_increasing(times: impl Iterator<Item = f64>) -> Result<()> {
    let mut last = f64::NEG_INFINITY;
    for t in times {
        if !(t > last) {
            return Err(Error::NonMonotonicTime(t));
        }
        last = t;
    }
    Ok(())
}
