//! Parallel parameter sweeps with ordered aggregation.

use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::output::{Cell, CsvTable};
use crate::pipelines;

#[derive(Clone, Debug, Default)]
pub struct SweepOutcome {
    /// Point tables concatenated in ascending axis order, axis value first.
    pub table: CsvTable,
    /// `(axis value, error)` of points that failed.
    pub failures: Vec<(f64, String)>,
}

impl SweepOutcome {
    pub fn failure_table(&self) -> CsvTable {
        let mut t = CsvTable::new(&["value", "error"]);
        for (v, e) in &self.failures {
            // keep the CSV one line per point
            t.push(vec![(*v).into(), e.replace(['\n', ','], " ").into()]);
        }
        t
    }
}

/// Runs `template` at every value of `axis` (a `section.key` numeric field).
///
/// Points run concurrently on the current rayon pool; rows are reduced by
/// point index after sorting the values, so the output does not depend on
/// the worker count. Failed points are reported without discarding the rest.
pub fn sweep(template: &ExperimentConfig, axis: &str, values: &[f64]) -> SweepOutcome {
    let mut values = values.to_vec();
    values.sort_by(f64::total_cmp);
    let column = axis.rsplit('.').next().unwrap_or(axis);
    let results: Vec<Result<CsvTable, String>> = values
        .par_iter()
        .map(|&v| {
            let cfg = template.with_value(axis, v).map_err(|e| e.to_string())?;
            pipelines::point_table(&cfg).map_err(|e| format!("{e:#}"))
        })
        .collect();

    let mut out = SweepOutcome::default();
    for (&v, r) in values.iter().zip(results) {
        match r {
            Ok(t) => {
                if out.table.columns.is_empty() {
                    out.table.columns = std::iter::once(column.to_string()).chain(t.columns.iter().cloned()).collect();
                } else if out.table.columns[1..] != t.columns[..] {
                    out.failures.push((v, "point table has different columns".into()));
                    continue;
                }
                for row in t.rows {
                    out.table.rows.push(std::iter::once(Cell::Float(v)).chain(row).collect());
                }
            }
            Err(e) => out.failures.push((v, e)),
        }
    }
    if out.table.columns.is_empty() {
        out.table.columns = vec![column.to_string()];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Experiment;

    #[test]
    fn empty_sweep_succeeds() {
        let cfg = ExperimentConfig::defaults_for(Experiment::Levels);
        let out = sweep(&cfg, "physics.v", &[]);
        assert!(out.table.is_empty() && out.failures.is_empty());
        assert_eq!(out.table.columns, vec!["v"]);
    }

    #[test]
    fn failures_are_reported_alongside_results() {
        let mut cfg = ExperimentConfig::defaults_for(Experiment::Custom);
        cfg.numerics.levels = 3;
        cfg.numerics.basis_halfwidth = 30;
        // k0 = -1 is rejected by the disorder module; the other points survive
        let out = sweep(&cfg, "physics.k0", &[3.0, -1.0, 2.0]);
        assert_eq!(out.failures.len(), 1);
        assert_eq!(out.failures[0].0, -1.0);
        let ks = out.table.floats("k0");
        assert_eq!(ks, vec![2.0, 2.0, 2.0, 3.0, 3.0, 3.0]);
        assert_eq!(out.failure_table().len(), 1);
    }
}
