//! Offline replay of a scan log through the navigator.

use vinenav_core::navigator::{Navigator, NavigatorConfig};
use vinenav_core::odometry::Twist;

use crate::output::CommandRow;
use crate::scan_log::ScanLog;

/// Feeds every logged scan to a fresh navigator and returns one command per
/// step. Entries carrying odometry replay each logged tick, the scan on the
/// last; entries without it replay one step per scan with zero odometry and
/// the time since the previous scan. Stops once the navigator finishes.
pub fn replay(log: &ScanLog, cfg: NavigatorConfig) -> vinenav_core::Result<Vec<CommandRow>> {
    let mut nav = Navigator::new(cfg)?;
    let mut rows = Vec::new();
    let mut index = 0u64;
    let mut last_t = 0.0;
    for entry in &log.entries {
        let scan = entry.scan();
        let ticks = entry
            .odom_ticks()
            .filter(|ticks| !ticks.is_empty())
            .unwrap_or_else(|| vec![(Twist::ZERO, entry.t - last_t)]);
        let last = ticks.len() - 1;
        for (k, (odom, dt)) in ticks.into_iter().enumerate() {
            index += 1;
            let out = nav.step((k == last).then_some(&scan), odom, dt);
            let t = if entry.odom.is_some() { index as f64 * dt } else { entry.t };
            rows.push(CommandRow::new(index, t, out.command));
        }
        last_t = entry.t;
        if nav.phase().is_terminal() {
            break;
        }
    }
    Ok(rows)
}
