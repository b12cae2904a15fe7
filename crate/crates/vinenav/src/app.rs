//! The subcommands behind the `vinenav` binary.

use std::fs;
use std::io::BufReader;
use std::path::Path;

use anyhow::Context;
use vinenav_core::config::RunConfig;
use vinenav_core::eval::{evaluate, MetricsReport};
use vinenav_core::log::RunLog;
use vinenav_core::sim::{generate_world, run_mission, World};

use crate::config::to_toml;
use crate::output::{
    commands_csv, in_row_csv, metrics_table, scan_log_text, to_json, trajectory_csv, write_file,
    CommandRow, RunRecorder,
};
use crate::replay::replay;
use crate::scan_log::read_scan_log;
use crate::svg::trajectory_svg;

pub const WORLD_FILE: &str = "world.json";
pub const CONFIG_FILE: &str = "config.toml";
pub const SCAN_LOG_FILE: &str = "scan_log.jsonl";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const COMMANDS_FILE: &str = "commands.csv";
pub const IN_ROW_FILE: &str = "in_row.csv";
pub const RUN_LOG_FILE: &str = "run_log.json";
pub const METRICS_FILE: &str = "metrics.json";
pub const METRICS_TABLE_FILE: &str = "metrics.txt";
pub const SVG_FILE: &str = "trajectory.svg";

fn create_dir(out: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))
}

/// Writes the world and the effective configuration.
pub fn generate(cfg: &RunConfig, out: &Path) -> anyhow::Result<World> {
    let world = generate_world(&cfg.world_config())?;
    create_dir(out)?;
    write_file(&out.join(CONFIG_FILE), &to_toml(cfg))?;
    write_file(&out.join(WORLD_FILE), &to_json(&world))?;
    Ok(world)
}

pub struct RunArtifacts {
    pub world: World,
    pub log: RunLog,
    pub metrics: MetricsReport,
}

/// Runs a closed-loop mission and writes every artifact of it.
pub fn run(cfg: &RunConfig, out: &Path, svg: bool) -> anyhow::Result<RunArtifacts> {
    let world = generate(cfg, out)?;
    let mut rec = RunRecorder::default();
    let log = run_mission(cfg, &world, &mut rec)?;
    let metrics = evaluate(&log, Some(&world));
    write_file(&out.join(SCAN_LOG_FILE), &scan_log_text(&rec.scan_log))?;
    write_file(&out.join(COMMANDS_FILE), &commands_csv(&rec.commands))?;
    write_file(&out.join(TRAJECTORY_FILE), &trajectory_csv(&log))?;
    write_file(&out.join(IN_ROW_FILE), &in_row_csv(&log))?;
    write_file(&out.join(RUN_LOG_FILE), &to_json(&log))?;
    write_file(&out.join(METRICS_FILE), &to_json(&metrics))?;
    write_file(&out.join(METRICS_TABLE_FILE), &metrics_table(&metrics))?;
    if svg {
        write_file(&out.join(SVG_FILE), &trajectory_svg(&log, &world))?;
    }
    Ok(RunArtifacts { world, log, metrics })
}

pub struct ReplayResult {
    pub commands: Vec<CommandRow>,
    pub truncated: bool,
}

/// Replays a scan log and writes the command sequence.
pub fn replay_log(cfg: &RunConfig, scan_log: &Path, out: &Path) -> anyhow::Result<ReplayResult> {
    let file = fs::File::open(scan_log)
        .with_context(|| format!("cannot open {}", scan_log.display()))?;
    let log = read_scan_log(BufReader::new(file))
        .with_context(|| format!("cannot read {}", scan_log.display()))?;
    let commands = replay(&log, cfg.navigator_config())?;
    create_dir(out)?;
    write_file(&out.join(COMMANDS_FILE), &commands_csv(&commands))?;
    Ok(ReplayResult {
        commands,
        truncated: log.truncated,
    })
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> anyhow::Result<T> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read {what} {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("invalid {what} {}", path.display()))
}

/// Recomputes the metrics of a stored run log, against its world if given.
pub fn eval(
    run_log: &Path,
    world: Option<&Path>,
    out: Option<&Path>,
) -> anyhow::Result<MetricsReport> {
    let log: RunLog = read_json(run_log, "run log")?;
    log.validate()?;
    let world: Option<World> = world.map(|p| read_json(p, "world file")).transpose()?;
    let metrics = evaluate(&log, world.as_ref());
    if let Some(out) = out {
        create_dir(out)?;
        write_file(&out.join(METRICS_FILE), &to_json(&metrics))?;
        write_file(&out.join(METRICS_TABLE_FILE), &metrics_table(&metrics))?;
    }
    Ok(metrics)
}
