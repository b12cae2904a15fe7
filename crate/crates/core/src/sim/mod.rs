//! Deterministic closed-loop simulation: world generation, lidar model,
//! skid-steer dynamics and the mission loop tying them to the navigator.

mod dynamics;
mod sensor;
mod world;

pub use dynamics::{
    command_treads, footprint_hits, limit_twist, step_dynamics, true_twist, DynamicsConfig,
};
pub use sensor::{exact_ranges, raycast_scan, SensorConfig};
pub use world::{generate_world, Obstacle, ObstacleKind, VegetativeStage, World, WorldConfig};

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::geometry::Pose2;
use crate::log::{Outcome, RunLog, ScanRecord, TrajectorySample};
use crate::navigator::{Navigator, Phase};
use crate::odometry::{tread_to_twist, TreadSpeeds, Twist};
use crate::scan::{process, Scan2D};
use crate::Result;

/// Decimal places kept in scans handed to the navigator, so that a scan
/// log written at this precision replays to the same commands.
pub const SCAN_DECIMALS: i32 = 6;

/// One simulation tick as seen from outside.
#[derive(Debug, Clone, Copy)]
pub struct Tick<'a> {
    /// Tick number, starting at 1; `t = index · dt`.
    pub index: u64,
    pub t: f64,
    pub dt: f64,
    pub true_pose: Pose2,
    pub odom: Twist,
    pub scan: Option<&'a Scan2D>,
    pub command: Twist,
    pub phase: Phase,
}

/// Streams per-tick data out of the mission loop.
pub trait MissionObserver {
    fn on_tick(&mut self, tick: &Tick<'_>);
}

impl MissionObserver for () {
    fn on_tick(&mut self, _tick: &Tick<'_>) {}
}

/// Runs the navigator against the simulator until it reaches `Done` or
/// `Fault`, or `max_duration` elapses.
pub fn run_mission<O: MissionObserver + ?Sized>(
    cfg: &RunConfig,
    world: &World,
    observer: &mut O,
) -> Result<RunLog> {
    cfg.validate()?;
    let dt = cfg.dynamics.dt();
    let scan_every = cfg.scan_every();
    let params = cfg.kinematics;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.sensor_seed());
    let mut nav = Navigator::new(cfg.navigator_config())?;
    let mut pose = world.start_pose(cfg.start_offset);
    let mut treads = TreadSpeeds::default();

    let mut records = Vec::new();
    let mut trajectory = Vec::new();
    let mut collisions = 0;
    let mut collision_ticks = 0;
    let mut touching = false;
    let mut timed_out = false;
    let mut t = 0.0;

    for k in 1u64.. {
        t = k as f64 * dt;
        pose = step_dynamics(&pose, treads, &cfg.dynamics, &params, dt)?;
        let odom = tread_to_twist(treads, &params)?;
        let scan = (k % scan_every as u64 == 0).then(|| {
            let raw = raycast_scan(world, &pose, t, &cfg.sensor, &mut rng);
            process(&raw, &cfg.filter).quantized(SCAN_DECIMALS)
        });

        let out = nav.step(scan.as_ref(), odom, dt);
        treads = command_treads(out.command, &cfg.dynamics, &params);

        let hit = world
            .obstacles
            .iter()
            .any(|o| footprint_hits(&pose, o, &cfg.dynamics));
        if hit {
            collision_ticks += 1;
            if !touching {
                collisions += 1;
            }
        }
        touching = hit;

        if scan.is_some() {
            trajectory.push(TrajectorySample {
                t,
                pose,
                odom_pose: nav.odom_pose(),
                phase: nav.phase(),
            });
        }
        if let Some(report) = out.report {
            records.push(ScanRecord {
                true_pose: Some(pose),
                report,
            });
        }
        observer.on_tick(&Tick {
            index: k,
            t,
            dt,
            true_pose: pose,
            odom,
            scan: scan.as_ref(),
            command: out.command,
            phase: nav.phase(),
        });

        if nav.phase().is_terminal() {
            break;
        }
        if scan.is_some() && t >= cfg.max_duration {
            timed_out = true;
            break;
        }
    }

    let transitions = nav.transitions().to_vec();
    let corridors_completed = transitions
        .iter()
        .filter(|tr| tr.from == Phase::InRow && matches!(tr.to, Phase::ExitStraight | Phase::Done))
        .count();
    Ok(RunLog {
        config: cfg.clone(),
        outcome: Outcome {
            final_phase: nav.phase(),
            fault: nav.fault(),
            timed_out,
            duration: t,
            corridors_completed,
            collisions,
            collision_ticks,
        },
        transitions,
        trajectory,
        records,
    })
}
