//! Run artifacts: per-tick recording, CSV and JSON writers and the metrics
//! table. Floats are written in their shortest round-trip form, so equal
//! runs give byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use vinenav_core::eval::{DetectionStats, MetricsReport, Stats};
use vinenav_core::log::RunLog;
use vinenav_core::navigator::ReportDetail;
use vinenav_core::odometry::Twist;
use vinenav_core::sim::{MissionObserver, Tick};

use crate::scan_log::ScanLogEntry;

/// One controller command.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommandRow {
    pub index: u64,
    pub t: f64,
    pub v: f64,
    pub omega: f64,
}

impl CommandRow {
    pub fn new(index: u64, t: f64, command: Twist) -> Self {
        Self {
            index,
            t,
            v: command.forward(),
            omega: command.omega_z,
        }
    }
}

/// Collects the command of every tick and a scan-log entry per scan.
#[derive(Debug, Default)]
pub struct RunRecorder {
    pub commands: Vec<CommandRow>,
    pub scan_log: Vec<ScanLogEntry>,
    pending_odom: Vec<(Twist, f64)>,
}

impl MissionObserver for RunRecorder {
    fn on_tick(&mut self, tick: &Tick<'_>) {
        self.commands
            .push(CommandRow::new(tick.index, tick.t, tick.command));
        self.pending_odom.push((tick.odom, tick.dt));
        if let Some(scan) = tick.scan {
            self.scan_log
                .push(ScanLogEntry::new(scan, Some(&self.pending_odom)));
            self.pending_odom.clear();
        }
    }
}

pub fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes to JSON");
    s.push('\n');
    s
}

pub fn commands_csv(rows: &[CommandRow]) -> String {
    let mut s = String::from("index,t,v,omega\n");
    for r in rows {
        writeln!(s, "{},{},{},{}", r.index, r.t, r.v, r.omega).unwrap();
    }
    s
}

pub fn scan_log_text(entries: &[ScanLogEntry]) -> String {
    let mut buf = Vec::new();
    for e in entries {
        crate::scan_log::write_entry(&mut buf, e).expect("writing to memory");
    }
    String::from_utf8(buf).expect("JSON is UTF-8")
}

/// True pose and odometry estimate at every scan.
pub fn trajectory_csv(log: &RunLog) -> String {
    let mut s = String::from("t,x,y,heading,odom_x,odom_y,odom_heading,phase\n");
    for p in &log.trajectory {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{:?}",
            p.t,
            p.pose.position.x,
            p.pose.position.y,
            p.pose.heading,
            p.odom_pose.position.x,
            p.odom_pose.position.y,
            p.odom_pose.heading,
            p.phase
        )
        .unwrap();
    }
    s
}

/// In-row controller state for every in-row scan.
pub fn in_row_csv(log: &RunLog) -> String {
    let mut s = String::from(
        "t,corridor,x,y,heading,left,right,cone_left,cone_right,offset,v,omega,row_end_detected,row_ended\n",
    );
    for rec in &log.records {
        let ReportDetail::InRow(st) = &rec.report.detail else {
            continue;
        };
        let pose = rec.true_pose.unwrap_or(rec.report.odom_pose);
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            rec.report.t,
            rec.report.corridor,
            pose.position.x,
            pose.position.y,
            pose.heading,
            st.left_distance,
            st.right_distance,
            st.cone.left_half_angle,
            st.cone.right_half_angle,
            st.offset,
            st.commanded.forward(),
            st.commanded.omega_z,
            st.row_end_detected,
            st.row_ended
        )
        .unwrap();
    }
    s
}

/// Human-readable summary of a metrics report.
pub fn metrics_table(m: &MetricsReport) -> String {
    let o = &m.outcome;
    let mut s = String::new();
    let fault = o.fault.map(|f| format!(", fault {f:?}")).unwrap_or_default();
    let timeout = if o.timed_out { ", timed out" } else { "" };
    writeln!(
        s,
        "outcome: {:?}{fault}{timeout}; {} corridors, {} collisions, {:.1} s",
        o.final_phase, o.corridors_completed, o.collisions, o.duration
    )
    .unwrap();
    writeln!(s, "{:<26}{:>9}{:>9}{:>9}{:>8}", "metric [m]", "mean", "max", "min", "n").unwrap();
    let mut row = |name: &str, stats: Option<&Stats>| match stats {
        Some(st) => writeln!(
            s,
            "{name:<26}{:>9.3}{:>9.3}{:>9.3}{:>8}",
            st.mean, st.max, st.min, st.count
        )
        .unwrap(),
        None => writeln!(s, "{name:<26}{:>9}", "-").unwrap(),
    };
    row("center displacement", m.center_displacement.as_ref());
    row("corridor width", m.corridor_width.as_ref());
    let err = |d: &Option<DetectionStats>| d.as_ref().map(|d| d.error);
    row("row ends, nearest", err(&m.pole_error_nearest).as_ref());
    row("row ends, line fitting", err(&m.pole_error_line_fitting).as_ref());
    for (name, d) in [
        ("nearest", &m.pole_error_nearest),
        ("line fitting", &m.pole_error_line_fitting),
    ] {
        if let Some(d) = d.filter(|d| d.outliers > 0) {
            writeln!(s, "{} {name} detections beyond 1 m of a pole", d.outliers).unwrap();
        }
    }
    s
}
