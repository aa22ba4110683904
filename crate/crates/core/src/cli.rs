//! Command-line front end. Exit codes: 0 success, 2 usage or configuration
//! error, 3 I/O error.

use std::ffi::OsString;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::ExperimentFile;
use crate::error::PgpeError;
use crate::format::sig17;
use crate::harness::{aggregate, evaluation_grid, grid_search, run_batch, GridSpec};
use crate::objectives::{emit_surface_grid, write_surface_csv, Objective, ObjectiveSpec};
use crate::report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "pgpe", version, about = "PGPE / SupSyS-PGPE benchmark runner")]
pub struct Cli {
    /// Override `base_seed` of every config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a seeded batch and write per-run and aggregate curves.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run several configs on the same objective and compare them.
    Compare {
        /// Repeat once per variant.
        #[arg(long = "config")]
        configs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Grid-search the step sizes of a config.
    Gridsearch {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a 2-D objective surface as CSV.
    Surface {
        #[arg(long)]
        objective: String,
        #[arg(long)]
        range: f64,
        #[arg(long)]
        resolution: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Io(String),
}

impl From<PgpeError> for CliError {
    fn from(e: PgpeError) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Io(msg)) => {
            eprintln!("I/O error: {msg}");
            EXIT_IO
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    let seed = cli.seed;
    pool.install(|| match cli.command {
        Command::Run { config, out } => cmd_run(&config, &out, seed),
        Command::Compare { configs, out } => cmd_compare(&configs, &out, seed),
        Command::Gridsearch { config, out } => cmd_gridsearch(&config, &out, seed),
        Command::Surface {
            objective,
            range,
            resolution,
            out,
        } => cmd_surface(&objective, range, resolution, &out),
    })
}

fn load(path: &Path, seed: Option<u64>) -> Result<ExperimentFile, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let mut file = ExperimentFile::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    if let Some(seed) = seed {
        file.run.base_seed = seed;
    }
    Ok(file)
}

fn write_file<F>(dir: &Path, name: &str, body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>,
{
    let path = dir.join(name);
    let file = fs::File::create(&path).map_err(|e| io_error(&path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| io_error(&path, e))
}

fn prepare_out(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))
}

fn cmd_run(config: &Path, out: &Path, seed: Option<u64>) -> Result<(), CliError> {
    let file = load(config, seed)?;
    prepare_out(out)?;
    let batch = run_batch(&file.run)?;
    write_file(out, "aggregate.csv", |w| report::write_aggregate_csv(w, &batch.stats))?;
    write_file(out, "runs.csv", |w| report::write_records_csv(w, &batch.records))?;
    write_file(out, "config.json", |w| w.write_all(file.to_json().as_bytes()))?;
    let s = &batch.stats;
    println!(
        "{}: {} runs, final mean best reward {}, success rate {}, median evaluations to target {}",
        file.label(),
        s.run_count,
        sig17(s.mean_final_best_reward),
        sig17(s.final_success_rate),
        s.median_evaluations_to_target
            .map_or_else(|| "n/a".to_string(), sig17)
    );
    Ok(())
}

fn cmd_compare(configs: &[PathBuf], out: &Path, seed: Option<u64>) -> Result<(), CliError> {
    if configs.is_empty() {
        return Err(CliError::Usage("compare needs at least one --config".into()));
    }
    let files = configs
        .iter()
        .map(|p| load(p, seed))
        .collect::<Result<Vec<_>, _>>()?;
    let first = &files[0].run;
    for (path, f) in configs.iter().zip(&files) {
        if f.run.objective != first.objective || f.run.dim != first.dim {
            return Err(CliError::Usage(format!(
                "{}: objective {} d={} does not match {} d={}",
                path.display(),
                f.run.objective,
                f.run.dim,
                first.objective,
                first.dim
            )));
        }
    }
    prepare_out(out)?;
    let max_evaluations = files.iter().map(|f| f.run.max_evaluations).max().unwrap_or(4);
    let grid = evaluation_grid(max_evaluations, first.grid_points);
    let mut curves = Vec::new();
    let mut summary = Vec::new();
    for f in &files {
        let batch = run_batch(&f.run)?;
        let stats = aggregate(&batch.records, &grid);
        println!(
            "{}: median evaluations to target {}, final mean best reward {}",
            f.label(),
            stats
                .median_evaluations_to_target
                .map_or_else(|| "n/a".to_string(), sig17),
            sig17(stats.mean_final_best_reward)
        );
        curves.push((f.label(), stats.clone()));
        summary.push((f.label(), f.run.meta.variant.name().to_string(), stats));
    }
    write_file(out, "comparison.csv", |w| report::write_comparison_csv(w, &curves))?;
    write_file(out, "comparison_summary.csv", |w| {
        report::write_comparison_summary_csv(w, &summary)
    })?;
    Ok(())
}

fn cmd_gridsearch(config: &Path, out: &Path, seed: Option<u64>) -> Result<(), CliError> {
    let file = load(config, seed)?;
    let grid = file.grid.clone().unwrap_or_else(GridSpec::default_grid);
    grid.validate()?;
    prepare_out(out)?;
    let result = grid_search(&grid, &file.run)?;
    write_file(out, "grid_scores.csv", |w| report::write_grid_csv(w, &result.cells))?;
    let best = serde_json::json!({
        "label": file.label(),
        "best_alpha_mu": result.best_alpha_mu,
        "best_alpha_sigma": result.best_alpha_sigma,
        "metric": result.metric,
        "fell_back_to_mean_final_reward": result.fell_back,
    });
    let text = serde_json::to_string_pretty(&best).expect("report serializes") + "\n";
    write_file(out, "grid_best.json", |w| w.write_all(text.as_bytes()))?;
    println!(
        "best alpha_mu {} alpha_sigma {}{}",
        sig17(result.best_alpha_mu),
        sig17(result.best_alpha_sigma),
        if result.fell_back {
            " (no cell reached the target; ranked by mean final reward)"
        } else {
            ""
        }
    );
    Ok(())
}

fn cmd_surface(objective: &str, range: f64, resolution: usize, out: &Path) -> Result<(), CliError> {
    let objective: Objective = objective.parse()?;
    let spec = ObjectiveSpec::new(objective, 2)?;
    let points = emit_surface_grid(&spec, range, resolution)?;
    prepare_out(out)?;
    write_file(out, "surface.csv", |w| write_surface_csv(w, &points))
}
