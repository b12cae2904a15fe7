//! Scan logs: one JSON object per line,
//! `{"t": …, "points": [[x, y], …], "odom": [[v, ω, dt], …]}`.
//!
//! `points` hold the filtered scan in the sensor frame, already rounded to
//! six decimals, so the shortest decimal form written by the serializer
//! reads back to the same bits. `odom` lists the odometry twist of every
//! tick since the previous scan, the scan's own tick last; it is optional.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use vinenav_core::geometry::Point2;
use vinenav_core::odometry::Twist;
use vinenav_core::scan::Scan2D;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanLogEntry {
    pub t: f64,
    pub points: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub odom: Option<Vec<[f64; 3]>>,
}

impl ScanLogEntry {
    pub fn new(scan: &Scan2D, odom: Option<&[(Twist, f64)]>) -> Self {
        Self {
            t: scan.timestamp,
            points: scan.points.iter().map(|p| [p.x, p.y]).collect(),
            odom: odom.map(|ticks| {
                ticks
                    .iter()
                    .map(|(tw, dt)| [tw.forward(), tw.omega_z, *dt])
                    .collect()
            }),
        }
    }

    pub fn scan(&self) -> Scan2D {
        Scan2D::new(
            self.t,
            self.points.iter().map(|[x, y]| Point2::new(*x, *y)).collect(),
        )
    }

    pub fn odom_ticks(&self) -> Option<Vec<(Twist, f64)>> {
        self.odom.as_ref().map(|ticks| {
            ticks
                .iter()
                .map(|[v, w, dt]| (Twist::new(*v, *w), *dt))
                .collect()
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScanLogError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("scan log line {line}: {source}")]
    Malformed {
        line: usize,
        source: serde_json::Error,
    },
    #[error("scan log line {line}: timestamp {t} does not increase")]
    NonMonotonic { line: usize, t: f64 },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScanLog {
    pub entries: Vec<ScanLogEntry>,
    /// The last line was cut off and has been dropped.
    pub truncated: bool,
}

pub fn write_entry<W: Write>(out: &mut W, entry: &ScanLogEntry) -> std::io::Result<()> {
    serde_json::to_writer(&mut *out, entry)?;
    out.write_all(b"\n")
}

/// Reads a scan log. Blank lines are skipped. A malformed final line is
/// taken as a truncated write and dropped; a malformed line anywhere else
/// is an error.
pub fn read_scan_log<R: BufRead>(input: R) -> Result<ScanLog, ScanLogError> {
    let lines: Vec<(usize, String)> = input
        .lines()
        .enumerate()
        .map(|(i, l)| l.map(|l| (i + 1, l)))
        .collect::<Result<_, _>>()?;
    let lines: Vec<(usize, String)> = lines
        .into_iter()
        .filter(|(_, l)| !l.trim().is_empty())
        .collect();
    let mut log = ScanLog::default();
    let mut last_t = f64::NEG_INFINITY;
    for (k, (line, text)) in lines.iter().enumerate() {
        match serde_json::from_str::<ScanLogEntry>(text) {
            Ok(entry) => {
                if !(entry.t > last_t) {
                    return Err(ScanLogError::NonMonotonic {
                        line: *line,
                        t: entry.t,
                    });
                }
                last_t = entry.t;
                log.entries.push(entry);
            }
            Err(_) if k + 1 == lines.len() => log.truncated = true,
            Err(source) => return Err(ScanLogError::Malformed { line: *line, source }),
        }
    }
    Ok(log)
}
