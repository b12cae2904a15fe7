//! Mission state machine: follow a corridor, leave it, turn onto the
//! headland, re-align, count row ends, turn into the next corridor, repeat.
//!
//! The navigator runs on the odometry clock. Scan-driven phases (in-row,
//! alignment search, end-row) recompute their command only when a scan
//! arrives and hold it in between; the exit run and the turns are
//! monitored on every odometry tick.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::end_row::{headland_candidates, perceive, EndRowConfig, EndRowController, EndRowStatus};
use crate::geometry::Point2;
use crate::in_row::{InRowConfig, InRowController, InRowStatus};
use crate::odometry::{DeadReckoner, Twist};
use crate::scan::Scan2D;
use crate::turn::{
    align_to_end_row, select_alignment_points, select_entrance_points, turn_step, TurnConfig,
    TurnDirection,
};
use crate::{Error, Pose2, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    InRow,
    ExitStraight,
    TurnOut,
    AlignHeadland,
    EndRow,
    TurnIn,
    Done,
    Fault,
}

impl Phase {
    pub fn is_terminal(self) -> bool {
        matches!(self, Phase::Done | Phase::Fault)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultReason {
    /// No free path inside the corridor for too many scans.
    CorridorBlocked,
    /// No rows ahead after entering a corridor for too many scans.
    CorridorNotFound,
    /// No row ends visible on the headland for too many scans.
    RowEndsLost,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NavigatorConfig {
    pub in_row: InRowConfig,
    pub turn: TurnConfig,
    pub end_row: EndRowConfig,
    pub corridors_to_traverse: usize,
    /// Consecutive degraded scans that trigger a fault.
    pub fault_after_scans: usize,
    /// Scans to wait for two row ends before continuing unaligned.
    pub align_attempts: usize,
}

impl Default for NavigatorConfig {
    fn default() -> Self {
        Self {
            in_row: InRowConfig::default(),
            turn: TurnConfig::default(),
            end_row: EndRowConfig::default(),
            corridors_to_traverse: 3,
            fault_after_scans: 15,
            align_attempts: 5,
        }
    }
}

impl NavigatorConfig {
    pub fn validate(&self) -> Result<()> {
        self.in_row.validate()?;
        self.turn.validate()?;
        self.end_row.validate()?;
        if self.corridors_to_traverse < 1 {
            return Err(Error::config("corridors_to_traverse", "must be >= 1"));
        }
        if self.fault_after_scans < 1 {
            return Err(Error::config("fault_after_scans", "must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub t: f64,
    pub from: Phase,
    pub to: Phase,
    pub corridor: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignReport {
    pub front: Option<Point2>,
    pub back: Option<Point2>,
    pub correction: Option<f64>,
}

/// End-row perception and control outcome for one scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndRowReport {
    pub nearest: Vec<Point2>,
    pub line_fitting: Vec<Point2>,
    pub status: EndRowStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportDetail {
    InRow(InRowStatus),
    Align(AlignReport),
    EndRow(EndRowReport),
}

/// What the navigator made of one scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub t: f64,
    pub phase: Phase,
    pub corridor: usize,
    pub odom_pose: Pose2,
    pub detail: ReportDetail,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NavOutput {
    pub command: Twist,
    pub report: Option<ScanReport>,
}

/// Progress of a scan-based heading correction.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
struct AlignState {
    /// Scans without a usable pair of row ends.
    attempts: usize,
    /// Corrective rotations already performed.
    passes: usize,
    /// Signed rotation in progress and the yaw it started from.
    rotation: Option<(f64, f64)>,
}

enum AlignStep {
    Continue(Twist),
    Finished,
}

#[derive(Debug, Clone)]
pub struct Navigator {
    cfg: NavigatorConfig,
    phase: Phase,
    t: f64,
    since_scan: f64,
    odom: DeadReckoner,
    phase_entry: DeadReckoner,
    corridor: usize,
    /// Direction of the next row change; rows lie on this side on the headland.
    direction: TurnDirection,
    in_row: InRowController,
    end_row: EndRowController,
    align: AlignState,
    /// The odometric part of the turn into the corridor is complete.
    turned_in: bool,
    held: Twist,
    degraded_scans: usize,
    fault: Option<FaultReason>,
    transitions: Vec<Transition>,
}

impl Navigator {
    pub fn new(cfg: NavigatorConfig) -> Result<Self> {
        cfg.validate()?;
        let direction = cfg.turn.direction_first;
        Ok(Self {
            cfg,
            phase: Phase::InRow,
            t: 0.0,
            since_scan: 0.0,
            odom: DeadReckoner::default(),
            phase_entry: DeadReckoner::default(),
            corridor: 0,
            direction,
            in_row: InRowController::new(),
            end_row: EndRowController::new(direction),
            align: AlignState::default(),
            turned_in: false,
            held: Twist::ZERO,
            degraded_scans: 0,
            fault: None,
            transitions: Vec::new(),
        })
    }

    pub fn config(&self) -> &NavigatorConfig {
        &self.cfg
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn corridor(&self) -> usize {
        self.corridor
    }

    pub fn fault(&self) -> Option<FaultReason> {
        self.fault
    }

    /// Dead-reckoned pose in the odometry frame (start pose at the origin).
    pub fn odom_pose(&self) -> Pose2 {
        self.odom.pose
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    fn enter(&mut self, to: Phase) {
        self.transitions.push(Transition {
            t: self.t,
            from: self.phase,
            to,
            corridor: self.corridor,
        });
        self.phase = to;
        self.phase_entry = self.odom;
        self.degraded_scans = 0;
    }

    fn raise_fault(&mut self, reason: FaultReason) {
        self.fault = Some(reason);
        self.enter(Phase::Fault);
    }

    /// Counts a degraded scan; true once the fault threshold is reached.
    fn degraded(&mut self, is_degraded: bool) -> bool {
        if is_degraded {
            self.degraded_scans += 1;
        } else {
            self.degraded_scans = 0;
        }
        self.degraded_scans >= self.cfg.fault_after_scans
    }

    fn report(&self, detail: ReportDetail) -> ScanReport {
        ScanReport {
            t: self.t,
            phase: self.phase,
            corridor: self.corridor,
            odom_pose: self.odom.pose,
            detail,
        }
    }

    fn turn_command(&self, target: f64, direction: TurnDirection, start_yaw: f64) -> (Twist, bool) {
        turn_step(self.odom.yaw - start_yaw, target, direction, &self.cfg.turn)
    }

    /// Advances by one odometry tick. `odom` is the measured twist over the
    /// elapsed `dt`; `scan` is present on scan ticks only.
    pub fn step(&mut self, scan: Option<&Scan2D>, odom: Twist, dt: f64) -> NavOutput {
        self.t += dt;
        self.since_scan += dt;
        self.odom.update(odom, dt);
        let scan_dt = self.since_scan;
        if scan.is_some() {
            self.since_scan = 0.0;
        }

        let mut report = None;
        let command = match self.phase {
            Phase::Done | Phase::Fault => Twist::ZERO,
            Phase::InRow => match scan {
                None => self.held,
                Some(scan) => {
                    let (cmd, status) =
                        self.in_row
                            .step(scan, &self.odom.pose, scan_dt, &self.cfg.in_row);
                    let degraded = if status.row_end_detected {
                        None
                    } else if status.blocked {
                        Some(FaultReason::CorridorBlocked)
                    } else if status.rows_missing {
                        Some(FaultReason::CorridorNotFound)
                    } else {
                        None
                    };
                    let row_end = status.row_end_detected;
                    report = Some(self.report(ReportDetail::InRow(status)));
                    if row_end {
                        if self.corridor + 1 >= self.cfg.corridors_to_traverse {
                            self.enter(Phase::Done);
                            Twist::ZERO
                        } else {
                            self.enter(Phase::ExitStraight);
                            self.exit_command()
                        }
                    } else if self.degraded(degraded.is_some()) {
                        self.raise_fault(degraded.unwrap_or(FaultReason::CorridorBlocked));
                        Twist::ZERO
                    } else {
                        cmd
                    }
                }
            },
            Phase::ExitStraight => self.exit_command(),
            Phase::TurnOut => {
                let (cmd, done) =
                    self.turn_command(self.cfg.turn.turn_angle, self.direction, self.phase_entry.yaw);
                if done {
                    self.align = AlignState::default();
                    self.enter(Phase::AlignHeadland);
                    Twist::ZERO
                } else {
                    cmd
                }
            }
            Phase::AlignHeadland => {
                let (step, detail) = self.align_step(scan, Self::headland_correction);
                report = detail.map(|d| self.report(ReportDetail::Align(d)));
                match step {
                    AlignStep::Continue(cmd) => cmd,
                    AlignStep::Finished => {
                        self.start_end_row();
                        Twist::ZERO
                    }
                }
            }
            Phase::TurnIn if !self.turned_in => {
                let (cmd, done) =
                    self.turn_command(self.cfg.turn.turn_angle, self.direction, self.phase_entry.yaw);
                if done {
                    self.turned_in = true;
                    self.align = AlignState::default();
                    Twist::ZERO
                } else {
                    cmd
                }
            }
            Phase::TurnIn => {
                let (step, detail) = self.align_step(scan, Self::entrance_correction);
                report = detail.map(|d| self.report(ReportDetail::Align(d)));
                match step {
                    AlignStep::Continue(cmd) => cmd,
                    AlignStep::Finished => {
                        self.corridor += 1;
                        self.direction = self.direction.flipped();
                        self.in_row = InRowController::new();
                        self.enter(Phase::InRow);
                        Twist::ZERO
                    }
                }
            }
            Phase::EndRow => match scan {
                None => self.held,
                Some(scan) => {
                    let perception = perceive(scan, &self.cfg.end_row);
                    let (cmd, status) =
                        self.end_row
                            .step(&perception, &self.odom.pose, scan_dt, &self.cfg.end_row);
                    let lost = status.candidates.is_empty();
                    let arrived = status.arrived;
                    let detail = EndRowReport {
                        nearest: perception.nearest.iter().map(|e| e.position).collect(),
                        line_fitting: perception.line_fitting.iter().map(|e| e.position).collect(),
                        status,
                    };
                    report = Some(self.report(ReportDetail::EndRow(detail)));
                    if arrived {
                        self.turned_in = false;
                        self.enter(Phase::TurnIn);
                        self.turn_command(self.cfg.turn.turn_angle, self.direction, self.odom.yaw)
                            .0
                    } else if self.degraded(lost) {
                        self.raise_fault(FaultReason::RowEndsLost);
                        Twist::ZERO
                    } else {
                        cmd
                    }
                }
            },
        };
        self.held = command;
        NavOutput { command, report }
    }

    fn exit_command(&mut self) -> Twist {
        let travelled = self.odom.distance - self.phase_entry.distance;
        if travelled >= self.cfg.in_row.exit_distance {
            self.enter(Phase::TurnOut);
            self.turn_command(self.cfg.turn.turn_angle, self.direction, self.odom.yaw)
                .0
        } else {
            Twist::new(self.cfg.in_row.exit_speed, 0.0)
        }
    }

    /// Drives one scan-based heading correction: waits for a scan, measures
    /// the correction, rotates by it under odometry and repeats up to
    /// `alignment_passes` times. Gives up after `align_attempts` scans
    /// without a measurement.
    fn align_step(
        &mut self,
        scan: Option<&Scan2D>,
        measure: fn(&Self, &Scan2D) -> AlignReport,
    ) -> (AlignStep, Option<AlignReport>) {
        if let Some((angle, start_yaw)) = self.align.rotation {
            let (cmd, done) = self.turn_command(angle.abs(), TurnDirection::of_angle(angle), start_yaw);
            if !done {
                return (AlignStep::Continue(cmd), None);
            }
            self.align.rotation = None;
            self.align.passes += 1;
            if self.align.passes >= self.cfg.turn.alignment_passes {
                return (AlignStep::Finished, None);
            }
            return (AlignStep::Continue(Twist::ZERO), None);
        }
        let Some(scan) = scan else {
            return (AlignStep::Continue(Twist::ZERO), None);
        };
        let detail = measure(self, scan);
        let step = match detail.correction {
            Some(c) if c.abs() > self.cfg.turn.alignment_tolerance => {
                self.align.rotation = Some((c, self.odom.yaw));
                AlignStep::Continue(turn_step(0.0, c.abs(), TurnDirection::of_angle(c), &self.cfg.turn).0)
            }
            Some(_) => AlignStep::Finished,
            None => {
                self.align.attempts += 1;
                if self.align.attempts >= self.cfg.align_attempts {
                    AlignStep::Finished
                } else {
                    AlignStep::Continue(Twist::ZERO)
                }
            }
        };
        (step, Some(detail))
    }

    /// Row ends ahead of and behind the robot on the row side give the
    /// headland direction.
    fn headland_correction(&self, scan: &Scan2D) -> AlignReport {
        let perception = perceive(scan, &self.cfg.end_row);
        let candidates = headland_candidates(
            perception.end_points(self.cfg.end_row.policy),
            self.direction,
            &self.cfg.end_row,
        );
        let pair = select_alignment_points(&candidates, self.direction);
        AlignReport {
            front: pair.map(|p| p.0),
            back: pair.map(|p| p.1),
            correction: pair.and_then(|(front, back)| align_to_end_row(front, back).ok()),
        }
    }

    /// The two row ends flanking the corridor entrance: body-forward should
    /// be perpendicular to the line joining them.
    fn entrance_correction(&self, scan: &Scan2D) -> AlignReport {
        let perception = perceive(scan, &self.cfg.end_row);
        let pair = select_entrance_points(perception.end_points(self.cfg.end_row.policy));
        AlignReport {
            front: pair.map(|p| p.0),
            back: pair.map(|p| p.1),
            correction: pair.and_then(|(left, right)| align_to_end_row(right.perp(), left.perp()).ok()),
        }
    }

    fn start_end_row(&mut self) {
        self.end_row =
            EndRowController::new(self.direction).with_direction(self.odom.pose.forward());
        self.enter(Phase::EndRow);
    }
}
