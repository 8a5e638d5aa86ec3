//! Command-line driver.
//!
//! ```text
//! barrier-mppi run --mission mission2 --controller vanilla,log,dbas-log \
//!     --trials 30 --seed 7 --out out/ --plot
//! barrier-mppi config --mission run.toml --set controller.lambda=5
//! barrier-mppi presets
//! ```
//!
//! Exit codes: 0 on success, 2 for configuration errors, 3 for I/O errors.
//! `BARRIER_MPPI_THREADS` caps the number of worker threads.

mod config;
mod output;
mod plot;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use config::{resolve, RunConfig, Selection};
pub use output::{atomic_write, trajectory_csv, MetricsDocument};
pub use plot::{emit_plot, render_svg};

use crate::controller::Variant;
use crate::error::{Error, Result};
use crate::sim::{self, ControllerReport, EpisodeOptions, EpisodeResult, PRESETS};

pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;

pub const THREADS_ENV: &str = "BARRIER_MPPI_THREADS";

/// Sampled rollouts drawn in plots with a snapshot.
const SNAPSHOT_SAMPLES: usize = 48;

#[derive(Debug, Parser)]
#[command(name = "barrier-mppi", version, about = "MPPI, Log-MPPI and DBaS-Log-MPPI benchmark runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a mission with one or more controllers and write metrics and logs.
    Run(RunArgs),
    /// Print the resolved configuration as TOML.
    Config(SelectArgs),
    /// List the built-in missions.
    Presets,
}

#[derive(Debug, Args)]
struct SelectArgs {
    /// Mission preset, TOML configuration file, or metrics.json of an earlier run.
    #[arg(long)]
    mission: String,
    /// Comma-separated controllers (vanilla, log, dbas-log).
    #[arg(long, value_delimiter = ',')]
    controller: Option<Vec<Variant>>,
    #[arg(long)]
    trials: Option<usize>,
    /// Base seed; trial i uses seed + i for every controller.
    #[arg(long)]
    seed: Option<u64>,
    /// Override a configuration key, e.g. `controller.lambda=5` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl SelectArgs {
    fn selection(&self) -> Selection {
        Selection {
            mission: self.mission.clone(),
            controllers: self.controller.clone(),
            trials: self.trials,
            seed: self.seed,
            overrides: self.set.clone(),
        }
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    select: SelectArgs,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also write one SVG plot per trial.
    #[arg(long)]
    plot: bool,
    /// Draw the sampled rollouts of this step in the plots.
    #[arg(long, requires = "plot")]
    snapshot_step: Option<usize>,
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn parse_and_run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::Config(_) => EXIT_CONFIG,
        Error::Io { .. } => EXIT_IO,
        Error::DegenerateBatch(_) => EXIT_RUNTIME,
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Presets => {
            for p in PRESETS {
                println!("{p}");
            }
            Ok(())
        }
        Command::Config(select) => {
            print!("{}", resolve(&select.selection())?.to_toml()?);
            Ok(())
        }
        Command::Run(args) => {
            let config = resolve(&args.select.selection())?;
            let plots = args.plot.then_some(PlotOptions {
                snapshot_step: args.snapshot_step,
            });
            let outcome = run(&config, &args.out, plots)?;
            print_table(&outcome.reports);
            println!("wrote {}", args.out.join("metrics.json").display());
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PlotOptions {
    pub snapshot_step: Option<usize>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub reports: Vec<ControllerReport>,
    pub episodes: Vec<Vec<EpisodeResult>>,
}

/// Worker pool sized by `BARRIER_MPPI_THREADS`, or rayon's default.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|n| *n >= 1)
            .ok_or_else(|| Error::config(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::config(format!("cannot start worker pool: {e}")))
}

/// Runs every episode, then writes `metrics.json`, one CSV per trial and
/// optional plots into `out`. Nothing is written if a simulation fails.
pub fn run(config: &RunConfig, out: &Path, plots: Option<PlotOptions>) -> Result<RunOutcome> {
    config.validate()?;
    let options = EpisodeOptions {
        snapshot_step: plots.and_then(|p| p.snapshot_step),
        snapshot_samples: SNAPSHOT_SAMPLES,
    };
    let episodes = thread_pool()?.install(|| {
        sim::run_mission_episodes_with(&config.mission, &config.controllers, config.trials, config.seed, options)
    })?;
    let reports = sim::summarize(&config.controllers, &episodes);

    let mut files: Vec<(PathBuf, String)> = Vec::new();
    files.push((out.join("metrics.json"), MetricsDocument::new(config, &reports).to_json()));
    for (c, eps) in config.controllers.iter().zip(&episodes) {
        for e in eps {
            let stem = output::trial_file_stem(e, c.variant.name());
            files.push((
                out.join(format!("{stem}.csv")),
                trajectory_csv(e, &config.mission.model),
            ));
            if plots.is_some() {
                files.push((out.join(format!("{stem}.svg")), render_svg(e, &config.mission)));
            }
        }
    }
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    for (path, contents) in &files {
        atomic_write(path, contents.as_bytes())?;
    }
    Ok(RunOutcome { reports, episodes })
}

fn print_table(reports: &[ControllerReport]) {
    let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.3}"));
    println!("{:<14} {:>9} {:>10} {:>10}", "controller", "success%", "error[m]", "speed[m/s]");
    for r in reports {
        let m = &r.metrics;
        println!(
            "{:<14} {:>9.1} {:>10} {:>10}",
            m.controller.display_name(),
            m.success_rate,
            fmt(m.error_mean),
            fmt(m.speed_mean)
        );
    }
}
