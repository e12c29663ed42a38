use std::collections::BTreeMap;
use std::path::Path;

use timeloc_cli::config::{Experiment, ExperimentConfig};
use timeloc_cli::{run_experiment, RunManifest};

fn config(name: Experiment, extra: &[&str]) -> ExperimentConfig {
    let mut o = vec![format!("experiment.name={name}")];
    o.extend(extra.iter().map(|s| s.to_string()));
    ExperimentConfig::load(None, &o).unwrap()
}

fn csvs(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect()
}

#[test]
fn manifest_round_trips_the_resolved_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(Experiment::Custom, &["physics.v=3"]);
    let written = run_experiment(&cfg, tmp.path(), 2).unwrap();
    let read = RunManifest::read(tmp.path()).unwrap();
    assert_eq!(read.config, cfg);
    assert_eq!(read.files, written.files);
    assert_eq!(read.run.workers, 2);
    let echo = std::fs::read_to_string(tmp.path().join("config.toml")).unwrap();
    assert_eq!(echo, cfg.to_toml());
}

#[test]
fn seeds_change_results_and_repeat_exactly() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |seed: u64, sub: &str| {
        let cfg = config(Experiment::Fig2, &["numerics.realizations=2", &format!("experiment.seed={seed}")]);
        let dir = tmp.path().join(sub);
        run_experiment(&cfg, &dir, 3).unwrap();
        csvs(&dir)
    };
    let a = run(11, "a");
    let b = run(11, "b");
    let c = run(12, "c");
    assert_eq!(a, b);
    assert_ne!(a["fig2_sites.csv"], c["fig2_sites.csv"]);
}

#[test]
fn csv_headers_carry_units_and_provenance() {
    let tmp = tempfile::tempdir().unwrap();
    run_experiment(&config(Experiment::BornVsTm, &["numerics.length=20", "numerics.realizations=10"]), tmp.path(), 1)
        .unwrap();
    for (name, bytes) in csvs(tmp.path()) {
        let text = String::from_utf8(bytes).unwrap();
        let comments: Vec<&str> = text.lines().take_while(|l| l.starts_with('#')).collect();
        assert!(comments.iter().any(|l| l.contains("timeloc")), "{name}");
        assert!(comments.iter().any(|l| l.contains("units")), "{name}");
    }
}
