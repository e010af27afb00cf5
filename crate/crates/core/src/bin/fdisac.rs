//! Command-line driver: single solves, beampattern export, sweeps and the
//! oracle suites.
//!
//! Exit codes: 0 converged, 2 configuration error, 3 infeasible, 4 solver
//! failure (including runs that stop at the iteration limit).

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fdisac::harness::config::{ConfigFile, SweepSpec};
use fdisac::harness::{exit, exit_code, output, sweep};
use fdisac::metrics::beampattern_gain;
use fdisac::sca::solve_joint;
use fdisac::scenario::realize_channels;
use fdisac::{Error, JointSolution, Result, SystemConfig};

#[derive(Parser)]
#[command(name = "fdisac", version, about = "Full-duplex ISAC transmit power minimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Directory for the written artifacts (created if missing).
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Overrides the configured channel seed (the base seed of a sweep).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario; writes trace.csv, sinr.csv and design.json.
    Solve(Common),
    /// Solve, then write beampattern.csv over [-90°, 90°].
    Beampattern {
        #[command(flatten)]
        common: Common,
        /// Angle step in degrees; must divide 180.
        #[arg(long, default_value_t = 1.0)]
        grid_step: f64,
    },
    /// Run a sweep file; writes sweep.csv and summary.csv.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Worker threads (defaults to the number of cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Run the oracle suites.
    Validate,
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    std::fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn load_config(c: &Common) -> Result<ConfigFile> {
    let mut cfg = ConfigFile::load(&c.config)?;
    if let Some(seed) = c.seed {
        cfg.system.rng_seed = seed;
    }
    Ok(cfg)
}

/// Solves and writes the common artifacts; returns the solution and the
/// exit code its termination maps to.
fn solve_and_write(c: &Common) -> Result<(SystemConfig, JointSolution, i32)> {
    let cfg = load_config(c)?;
    let ch = realize_channels(&cfg.system, cfg.system.rng_seed);
    let sol = solve_joint(&ch, &cfg.system, &cfg.sca).inspect_err(|e| {
        if let Some(t) = e.trace() {
            let _ = create(&c.out_dir, "trace.csv").and_then(|w| output::write_trace_csv(t, w));
        }
    })?;
    output::write_trace_csv(&sol.trace, create(&c.out_dir, "trace.csv")?)?;
    output::write_sinr_csv(&sol, &cfg.system, create(&c.out_dir, "sinr.csv")?)?;
    output::write_design_json(&sol, create(&c.out_dir, "design.json")?)?;
    println!("{}", output::summary_line(&sol));
    let code = if sol.trace.converged() { exit::CONVERGED } else { exit::SOLVER_FAILURE };
    Ok((cfg.system, sol, code))
}

fn beampattern(c: &Common, step: f64) -> Result<i32> {
    let angles = output::angle_grid(step)?;
    let (cfg, sol, code) = solve_and_write(c)?;
    let ch = realize_channels(&cfg, cfg.rng_seed);
    let gains = beampattern_gain(&sol.receive.u, &sol.transmit, &ch, &angles)?;
    output::write_beampattern_csv(&cfg, &angles, &gains, create(&c.out_dir, "beampattern.csv")?)?;
    Ok(code)
}

fn run_sweep(c: &Common, jobs: Option<usize>) -> Result<i32> {
    let mut spec = SweepSpec::load(&c.config)?;
    if let Some(seed) = c.seed {
        spec.base_config.rng_seed = seed;
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(Error::Config("--jobs must be at least 1".into()));
        }
        pool = pool.num_threads(j);
    }
    let pool = pool.build().map_err(|e| Error::Config(format!("--jobs: {e}")))?;
    let rows = pool.install(|| sweep::run_sweep(&spec));
    sweep::write_rows(&rows, create(&c.out_dir, "sweep.csv")?)?;
    let summary = sweep::summarize(&rows);
    sweep::write_rows(&summary, create(&c.out_dir, "summary.csv")?)?;
    let failed = rows.iter().filter(|r| r.power_mw.is_none()).count();
    println!("{} runs, {} converged, {} failed", rows.len(), rows.iter().filter(|r| r.converged).count(), failed);
    Ok(exit::CONVERGED)
}

fn run_validate() -> i32 {
    let checks = fdisac::validate::quick_suite();
    for c in &checks {
        println!("{c}");
    }
    if checks.iter().all(|c| c.passed) {
        exit::CONVERGED
    } else {
        exit::SOLVER_FAILURE
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::PARSE_ERROR as u8 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Solve(c) => solve_and_write(c).map(|r| r.2),
        Command::Beampattern { common, grid_step } => beampattern(common, *grid_step),
        Command::Sweep { common, jobs } => run_sweep(common, *jobs),
        Command::Validate => Ok(run_validate()),
    };
    let code = result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        exit_code(&e)
    });
    ExitCode::from(code as u8)
}
