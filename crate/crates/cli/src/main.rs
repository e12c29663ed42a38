use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use timeloc::disorder::{potential_on_grid, realization, synthesize_line_potential, write_coefficients, DriveSpec};
use timeloc::num::ring_grid;
use timeloc_cli::config::{set, ExperimentConfig};
use timeloc_cli::output::{CsvTable, OutputDir};
use timeloc_cli::sweep::sweep;
use timeloc_cli::{default_out_dir, run_experiment, with_workers, write_outcome, Experiment, Outcome, RunManifest};
use toml::Value;

#[derive(Parser)]
#[command(name = "timeloc", version, about = "Anderson localization in the time domain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Config file (flat TOML sections) or a previous run's manifest.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Output directory [default: $TIMELOC_OUT/<experiment>, else runs/<experiment>].
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Override a config value, e.g. `--set physics.v=15`.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run any experiment named on the command line or in the config.
    Run {
        #[arg(long, short)]
        experiment: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Write drive and effective disorder coefficients of one realization.
    GenDisorder {
        #[arg(long, default_value_t = 0)]
        realization: u64,
        /// Also synthesize a line potential of this length.
        #[arg(long)]
        line_length: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Effective-model spectrum and one eigenstate density (`custom`).
    EffSpectrum {
        #[command(flatten)]
        common: Common,
    },
    /// Born and transfer-matrix localization lengths (`born-vs-tm`).
    Loclength {
        #[command(flatten)]
        common: Common,
    },
    /// Time-crystal lattice (`fig2`, or `lattice-sweep` with --sweep).
    Lattice {
        #[arg(long)]
        sweep: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Stroboscopic sections against the secular Hamiltonian (`sos`).
    Classical {
        #[command(flatten)]
        common: Common,
    },
    /// Floquet comparison (`eigenstate-compare`, or `levels` with --levels).
    Floquet {
        #[arg(long)]
        levels: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Run an experiment over a numeric config field.
    Sweep {
        /// Field as section.key, e.g. physics.omega_plus_alpha.
        #[arg(long)]
        axis: String,
        /// Comma-separated values; empty gives an empty table.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Vec<f64>,
        #[arg(long, short)]
        experiment: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Summarize a finished run and verify its checksums.
    Report {
        dir: PathBuf,
    },
}

fn resolve(common: &Common, experiment: Option<&str>, allowed: &[Experiment]) -> Result<ExperimentConfig> {
    let mut table = match &common.config {
        Some(p) => timeloc_cli::config::read_table(p)?,
        None => toml::Table::new(),
    };
    for o in &common.overrides {
        let (section, key, value) = timeloc_cli::config::parse_override(o)?;
        set(&mut table, &section, &key, value);
    }
    let named = table
        .get("experiment")
        .and_then(|e| e.get("name"))
        .and_then(Value::as_str)
        .map(str::to_string);
    let name = match (experiment, named) {
        (Some(e), _) => e.to_string(),
        (None, Some(n)) if allowed.is_empty() || allowed.iter().any(|a| a.name() == n) => n,
        (None, Some(n)) => bail!("this verb runs {} but the config names `{n}`", names(allowed)),
        (None, None) if !allowed.is_empty() => allowed[0].name().to_string(),
        (None, None) => bail!("no experiment given; pass --experiment or set experiment.name"),
    };
    let exp: Experiment = name.parse()?;
    if !allowed.is_empty() && !allowed.contains(&exp) {
        bail!("this verb runs {}, not `{exp}`", names(allowed));
    }
    set(&mut table, "experiment", "name", Value::String(exp.name().into()));
    if let Some(seed) = common.seed {
        set(&mut table, "experiment", "seed", Value::Integer(seed as i64));
    }
    Ok(ExperimentConfig::resolve(table)?)
}

fn names(list: &[Experiment]) -> String {
    list.iter().map(|e| format!("`{e}`")).collect::<Vec<_>>().join(" or ")
}

fn out_dir(common: &Common, cfg: &ExperimentConfig) -> PathBuf {
    common.out.clone().unwrap_or_else(|| default_out_dir(cfg.experiment.name))
}

fn execute(common: &Common, cfg: ExperimentConfig) -> Result<()> {
    let dir = out_dir(common, &cfg);
    let manifest = run_experiment(&cfg, &dir, common.threads)?;
    summarize(&manifest, &dir);
    Ok(())
}

fn summarize(manifest: &RunManifest, dir: &Path) {
    println!("{} → {} ({:.2} s)", manifest.run.experiment, dir.display(), manifest.run.wall_time_s);
    for (k, v) in &manifest.results {
        println!("  {k} = {v}");
    }
    for w in &manifest.run.warnings {
        println!("  warning: {w}");
    }
}

fn gen_disorder(common: &Common, index: u64, line_length: Option<f64>) -> Result<()> {
    let cfg = resolve(common, None, &[Experiment::Custom])?;
    let p = &cfg.physics;
    let start = Instant::now();
    let dir = common.out.clone().unwrap_or_else(|| default_out_dir(cfg.experiment.name).with_file_name("disorder"));
    let (drive, c) = realization(&DriveSpec::new(p.k0, cfg.experiment.seed), index)?;
    let mut out = OutputDir::create(&dir)?;
    let mut buf = Vec::new();
    write_coefficients(&drive.f, &format!("drive f_k, k0={} seed={} realization={index}", p.k0, cfg.experiment.seed), &mut buf)?;
    out.write("drive_coefficients.txt", &buf)?;
    buf.clear();
    write_coefficients(&c.c, &format!("effective c_k, k0={} seed={} realization={index}", p.k0, cfg.experiment.seed), &mut buf)?;
    out.write("effective_coefficients.txt", &buf)?;

    let grid = ring_grid::<f64>(cfg.numerics.grid);
    let u = potential_on_grid(&c, p.v, &grid)?;
    let mut ring = CsvTable::new(&["theta", "potential"])
        .comment(format!("ring potential V*sum_k c_k exp(ik theta), V={} k0={}", p.v, p.k0))
        .comment("units: theta in rad");
    for (t, x) in grid.iter().zip(u) {
        ring.push(vec![(*t).into(), x.into()]);
    }
    let mut outcome = Outcome::default();
    outcome.tables.push(("ring_potential".into(), ring));
    if let Some(length) = line_length {
        let h = std::f64::consts::SQRT_2 / p.k0 / 10.0;
        let line = synthesize_line_potential(p.k0, p.v, length, h, timeloc::rng::realization_seed(cfg.experiment.seed, index))?;
        let mut t = CsvTable::new(&["x", "potential"]).comment(format!("line potential, h={h} length={}", line.length));
        for (j, x) in line.samples.iter().enumerate() {
            t.push(vec![(j as f64 * h).into(), (*x).into()]);
        }
        outcome.tables.push(("line_potential".into(), t));
    }
    outcome.results.insert("cutoff".into(), Value::Integer(drive.cutoff() as i64));
    outcome.results.insert("realization".into(), Value::Integer(index as i64));
    let mut manifest = write_outcome(&cfg, &outcome, &dir, common.threads, start.elapsed().as_secs_f64())?;
    // coefficient files were written outside write_outcome; fold them in
    manifest.files.extend(out.files);
    manifest.run.experiment = "gen-disorder".into();
    manifest.write(&dir)?;
    summarize(&manifest, &dir);
    Ok(())
}

fn run_sweep(common: &Common, experiment: Option<&str>, axis: &str, values: &[f64]) -> Result<bool> {
    let cfg = resolve(common, experiment, &[])?;
    let start = Instant::now();
    let result = with_workers(common.threads, || sweep(&cfg, axis, values))?;
    let dir = common.out.clone().unwrap_or_else(|| default_out_dir(cfg.experiment.name).with_extension("sweep"));
    let mut table = result.table.clone();
    table.comments = vec![
        format!("timeloc {} sweep of {} over {axis}", env!("CARGO_PKG_VERSION"), cfg.experiment.name),
        format!("values: {values:?}"),
    ];
    let mut outcome = Outcome::default();
    outcome.tables.push(("sweep".into(), table));
    if !result.failures.is_empty() {
        outcome.tables.push(("sweep_failures".into(), result.failure_table()));
        outcome.warnings = result.failures.iter().map(|(v, e)| format!("{axis}={v}: {e}")).collect();
    }
    outcome.results.insert("axis".into(), Value::String(axis.into()));
    outcome.results.insert("points".into(), Value::Integer(values.len() as i64));
    outcome.results.insert("failed_points".into(), Value::Integer(result.failures.len() as i64));
    let manifest = write_outcome(&cfg, &outcome, &dir, common.threads, start.elapsed().as_secs_f64())?;
    summarize(&manifest, &dir);
    Ok(result.failures.is_empty())
}

fn report(dir: &Path) -> Result<bool> {
    let manifest = RunManifest::read(dir)?;
    summarize(&manifest, dir);
    println!("  version {}, {} worker(s)", manifest.run.version, manifest.run.workers);
    let bad = manifest.verify(dir);
    for name in &bad {
        println!("  checksum mismatch: {name}");
    }
    if bad.is_empty() {
        println!("  {} file(s) verified", manifest.files.len());
    }
    Ok(bad.is_empty())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result: Result<bool> = match &cli.command {
        Command::Run { experiment, common } => {
            resolve(common, experiment.as_deref(), &[]).and_then(|cfg| execute(common, cfg)).map(|_| true)
        }
        Command::GenDisorder { realization, line_length, common } => {
            gen_disorder(common, *realization, *line_length).map(|_| true)
        }
        Command::EffSpectrum { common } => {
            resolve(common, None, &[Experiment::Custom]).and_then(|c| execute(common, c)).map(|_| true)
        }
        Command::Loclength { common } => {
            resolve(common, None, &[Experiment::BornVsTm]).and_then(|c| execute(common, c)).map(|_| true)
        }
        Command::Lattice { sweep, common } => {
            let e = if *sweep { Experiment::LatticeSweep } else { Experiment::Fig2 };
            resolve(common, Some(e.name()), &[Experiment::Fig2, Experiment::LatticeSweep])
                .and_then(|c| execute(common, c))
                .map(|_| true)
        }
        Command::Classical { common } => {
            resolve(common, None, &[Experiment::Sos]).and_then(|c| execute(common, c)).map(|_| true)
        }
        Command::Floquet { levels, common } => {
            let e = if *levels { Experiment::Levels } else { Experiment::EigenstateCompare };
            resolve(common, Some(e.name()), &[Experiment::EigenstateCompare, Experiment::Levels])
                .and_then(|c| execute(common, c))
                .map(|_| true)
        }
        Command::Sweep { axis, values, experiment, common } => run_sweep(common, experiment.as_deref(), axis, values),
        Command::Report { dir } => report(dir),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
