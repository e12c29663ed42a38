//! Batch front end: configs, experiment pipelines, sweeps and run manifests.

pub mod config;
pub mod output;
pub mod pipelines;
pub mod sweep;

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};

pub use config::{Experiment, ExperimentConfig};
pub use output::{CsvTable, OutputDir, RunInfo, RunManifest};
pub use pipelines::Outcome;

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "TIMELOC_OUT";

/// `<root>/<experiment>` with the root taken from [`OUT_ENV`] or `runs`.
pub fn default_out_dir(experiment: Experiment) -> PathBuf {
    let root = std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("runs"));
    root.join(experiment.name())
}

/// Runs `f` on a dedicated pool of `workers` threads (0 = all cores), with
/// the dense eigensolvers pinned to one thread so results do not depend on
/// the pool size.
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    timeloc::linalg::set_sequential(true);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().context("building worker pool")?;
    Ok(pool.install(f))
}

/// Executes the configured pipeline and writes its CSVs, the resolved config
/// and finally the manifest into `out`.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path, workers: usize) -> Result<RunManifest> {
    let start = Instant::now();
    let outcome = with_workers(workers, || pipelines::run(cfg))?
        .with_context(|| format!("experiment `{}` failed", cfg.experiment.name))?;
    let manifest = write_outcome(cfg, &outcome, out, workers, start.elapsed().as_secs_f64())?;
    if let Some(msg) = &outcome.partial_failure {
        anyhow::bail!("{msg} (completed points written to {})", out.display());
    }
    Ok(manifest)
}

pub fn write_outcome(
    cfg: &ExperimentConfig,
    outcome: &Outcome,
    out: &Path,
    workers: usize,
    wall_time_s: f64,
) -> Result<RunManifest> {
    let mut dir = OutputDir::create(out)?;
    for (stem, table) in &outcome.tables {
        dir.write_table(stem, table)?;
    }
    dir.write(output::CONFIG_ECHO, cfg.to_toml().as_bytes())?;
    let manifest = RunManifest {
        run: RunInfo {
            experiment: cfg.experiment.name.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s,
            workers: if workers == 0 { rayon::current_num_threads() } else { workers },
            warnings: outcome.warnings.clone(),
        },
        results: outcome.results.clone(),
        files: dir.files.clone(),
        config: cfg.clone(),
    };
    manifest.write(out)?;
    for w in &outcome.warnings {
        log::warn!("{w}");
    }
    Ok(manifest)
}
