use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vinenav::app;
use vinenav::config::load_config;
use vinenav::output::metrics_table;
use vinenav_core::config::RunConfig;

/// Map-free row-crop navigation: simulate, replay and evaluate.
#[derive(Parser)]
#[command(name = "vinenav", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a world and write it as JSON.
    Generate(Common),
    /// Run a closed-loop simulated mission and write its logs and metrics.
    Run {
        #[command(flatten)]
        common: Common,
        /// Also plot the trajectory as SVG.
        #[arg(long)]
        svg: bool,
    },
    /// Feed a recorded scan log through the controllers.
    Replay {
        /// Scan log (JSON lines).
        scan_log: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Compute metrics for a stored run log.
    Eval {
        /// Run log written by `run`.
        run_log: PathBuf,
        /// World file for ground-truth metrics.
        #[arg(long)]
        world: Option<PathBuf>,
        /// Directory for metrics.json and metrics.txt.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Run configuration (TOML); defaults apply to anything not set.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to `output_dir` from the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<(RunConfig, PathBuf), ExitCode> {
        let mut cfg = match &self.config {
            Some(path) => load_config(path).map_err(|e| {
                eprintln!("error: {}: {e}", path.display());
                ExitCode::from(2)
            })?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        let out = self
            .out
            .clone()
            .unwrap_or_else(|| PathBuf::from(&cfg.output_dir));
        Ok((cfg, out))
    }
}

fn fail(err: anyhow::Error) -> ExitCode {
    eprintln!("error: {err:#}");
    ExitCode::from(2)
}

fn execute(cli: Cli) -> ExitCode {
    match cli.command {
        Command::Generate(common) => {
            let (cfg, out) = match common.load() {
                Ok(v) => v,
                Err(code) => return code,
            };
            match app::generate(&cfg, &out) {
                Ok(world) => {
                    println!(
                        "{} obstacles, {} corridors -> {}",
                        world.obstacles.len(),
                        world.config.corridors(),
                        out.join(app::WORLD_FILE).display()
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Run { common, svg } => {
            let (cfg, out) = match common.load() {
                Ok(v) => v,
                Err(code) => return code,
            };
            match app::run(&cfg, &out, svg) {
                Ok(run) => {
                    print!("{}", metrics_table(&run.metrics));
                    println!("outputs in {}", out.display());
                    if run.log.outcome.succeeded() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e) => fail(e),
            }
        }
        Command::Replay { scan_log, common } => {
            let (cfg, out) = match common.load() {
                Ok(v) => v,
                Err(code) => return code,
            };
            match app::replay_log(&cfg, &scan_log, &out) {
                Ok(r) => {
                    if r.truncated {
                        eprintln!("warning: {} ends in a truncated line", scan_log.display());
                    }
                    println!(
                        "{} commands -> {}",
                        r.commands.len(),
                        out.join(app::COMMANDS_FILE).display()
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Eval { run_log, world, out } => {
            match app::eval(&run_log, world.as_deref(), out.as_deref().map(Path::new)) {
                Ok(m) => {
                    print!("{}", metrics_table(&m));
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    execute(cli)
}
