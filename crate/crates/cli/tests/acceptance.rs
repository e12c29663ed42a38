//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the report is always shown:
//! `cargo test -p timeloc-cli --test acceptance`.

use std::f64::consts::PI;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use timeloc::disorder::{potential_on_grid, realization, sample_autocovariance, synthesize_line_potential, DriveSpec};
use timeloc::effmodel::{build_matrix, diagonalize, second_order_correction_with, CorrectionForm, EffectiveModelSpec, PlaneWaveBasis};
use timeloc::lattice::{hopping, lattice_xi, Band};
use timeloc::localization::{born_xi, BornInput};
use timeloc::num::{median, ring_grid};
use timeloc::rng::realization_seed;
use timeloc::DriveCoefficients;
use timeloc_cli::config::{Experiment, ExperimentConfig};
use timeloc_cli::pipelines::{self, Outcome};
use timeloc_cli::{run_experiment, with_workers};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

type Check = fn() -> Result<Verdict, String>;

fn cfg(name: Experiment, overrides: &[&str]) -> ExperimentConfig {
    let mut all = vec![format!("experiment.name={name}")];
    all.extend(overrides.iter().map(|s| s.to_string()));
    ExperimentConfig::load(None, &all).expect("acceptance config")
}

fn run(c: &ExperimentConfig) -> Result<Outcome, String> {
    with_workers(0, || pipelines::run(c)).map_err(|e| e.to_string())?.map_err(|e| format!("{e:#}"))
}

fn number(out: &Outcome, key: &str) -> Result<f64, String> {
    out.number(key).ok_or_else(|| format!("result `{key}` missing"))
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn born_closed_form() -> Result<Verdict, String> {
    let est = born_xi(&BornInput { energy: 8e3, k0: 1e3, v: 4e3 }).map_err(|e| e.to_string())?;
    Ok(verdict(
        within(est.xi, 0.30, 0.005) && within(est.indicator, 0.004, 5e-4),
        format!("xi_born = {:.5} (0.30 ± 0.005), V²/(Ẽ E_ζ) = {:.5} (0.004 ± 5e-4)", est.xi, est.indicator),
    ))
}

fn transfer_matrix() -> Result<Verdict, String> {
    let c = cfg(Experiment::BornVsTm, &[]);
    let out = run(&c)?;
    let xi = number(&out, "xi_tm")?;
    let length = number(&out, "length")?;
    let h = number(&out, "h")?;
    let zeta = number(&out, "zeta")?;
    let n = c.numerics.realizations;
    let rel = (xi - 0.30).abs() / 0.30;
    let setup = length >= 100.0 * 0.30 && h <= zeta / 10.0 * (1.0 + 1e-12) && n >= 10;
    Ok(verdict(
        rel <= 0.05 && setup,
        format!(
            "xi_tm = {xi:.4} ± {:.4}, |Δ|/0.30 = {:.2}% (≤ 5%), L = {length}, h/ζ = {:.3}, {n} realizations",
            number(&out, "xi_tm_stderr")?,
            100.0 * rel,
            h / zeta
        ),
    ))
}

fn lattice_formulas() -> Result<Verdict, String> {
    let j = hopping(2e4_f64, 100, Band::Lowest).map_err(|e| e.to_string())?;
    let xi = lattice_xi(7.57_f64, 100, 10.0).map_err(|e| e.to_string())?;
    let lowest = run(&cfg(Experiment::Fig2, &["numerics.realizations=1"]))?;
    let excited = run(&cfg(Experiment::Fig2, &["physics.band=first-excited", "numerics.realizations=1"]))?;
    let (jm, xim) = (number(&lowest, "J")?, number(&lowest, "xi_formula")?);
    let xe = number(&excited, "xi_formula")?;
    Ok(verdict(
        within(j, 7.57, 0.01)
            && within(xi, 0.144, 0.001)
            && within(jm, 7.57, 0.01)
            && within(xim, 0.144, 0.001)
            && within(xe, 0.164, 0.002),
        format!(
            "J = {j:.4} (7.57 ± 0.01), xi(7.57, 100, 10) = {xi:.5} (0.144 ± 0.001), manifest J = {jm:.4} \
             xi = {xim:.5}, excited band xi = {xe:.5} (0.164 ± 0.002)"
        ),
    ))
}

fn band_cross_check() -> Result<Verdict, String> {
    let (lambda, s) = (2e4, 100u32);
    let omega = 2000.0 - timeloc_cli::config::GOLDEN;
    let (_, c) = realization(&DriveSpec::new(10.0, 1), 0).map_err(|e| e.to_string())?;
    let spec = EffectiveModelSpec::new(c, 0.0, omega, timeloc_cli::config::GOLDEN).with_lattice(lambda, s);
    let basis = PlaneWaveBasis::centered(800, spec.beta);
    let sol = with_workers(0, || diagonalize(&build_matrix(&spec, &basis)?))
        .map_err(|e| e.to_string())?
        .map_err(|e| e.to_string())?;
    let width = sol.energies[s as usize - 1] - sol.energies[0];
    let gap = sol.energies[s as usize] - sol.energies[s as usize - 1];
    let four_j = 4.0 * hopping(lambda, s, Band::Lowest).map_err(|e| e.to_string())?;
    let rel = (width - four_j).abs() / four_j;
    Ok(verdict(
        rel <= 0.15 && gap > width,
        format!("lowest-band width = {width:.3}, 4J = {four_j:.3}, |Δ|/4J = {:.1}% (≤ 15%), gap above = {gap:.1}", 100.0 * rel),
    ))
}

fn eigenstate_localization() -> Result<Verdict, String> {
    let c = cfg(
        Experiment::Fig1,
        &[
            "physics.k0=10",
            "physics.v=20",
            "physics.energy=14",
            "numerics.shell_lo=8",
            "numerics.shell_hi=20",
            "numerics.grid=1024",
            "numerics.realizations=2000",
            "numerics.min_realizations=5",
            "numerics.min_fits=20",
        ],
    );
    let survey = with_workers(0, || pipelines::eigenstate_survey(&c))
        .map_err(|e| e.to_string())?
        .map_err(|e| format!("{e:#}"))?;
    let accepted = survey.accepted();
    let ratio = survey.median_ratio_accepted().unwrap_or(f64::NAN);
    let all_r2 = accepted.iter().all(|r| r.r_squared > 0.9);
    let xi = survey.median_xi_accepted().unwrap_or(f64::NAN);
    Ok(verdict(
        accepted.len() >= 20 && survey.realizations >= 5 && all_r2 && (0.5..=2.0).contains(&ratio),
        format!(
            "{} accepted fits (R² > 0.9) from {} realizations, median xi = {xi:.3}, median xi/xi_born = {ratio:.3} \
             (within ×2); unselected median ratio {:.3}, acceptance {:.1}%",
            accepted.len(),
            survey.realizations,
            survey.median_ratio_all().unwrap_or(f64::NAN),
            100.0 * survey.acceptance_fraction()
        ),
    ))
}

fn secular_validity() -> Result<Verdict, String> {
    let at = |w: &str| -> Result<pipelines::Comparison, String> {
        let c = cfg(Experiment::EigenstateCompare, &[&format!("physics.omega_plus_alpha={w}"), "numerics.levels=8"]);
        with_workers(0, || pipelines::compare(&c)).map_err(|e| e.to_string())?.map_err(|e| format!("{e:#}"))
    };
    let low = at("300")?;
    let high = at("2000")?;
    let ratio = low.report.max_residual() / high.report.max_residual();
    let overlap = high.report.min_overlap();
    Ok(verdict(
        ratio >= 10.0 && overlap >= 0.99 && high.report.pairs.len() == 8,
        format!(
            "max residual {:.4} (ω=300-α) / {:.5} (ω=2000-α) = {ratio:.1} (≥ 10), min overlap at 2000-α = {overlap:.5} \
             (≥ 0.99), window dimension {}",
            low.report.max_residual(),
            high.report.max_residual(),
            high.window.dimension()
        ),
    ))
}

/// `-(V²/2ω²) Σ_{m≠0} A_m(Θ) B_m(Θ)/m²` by direct summation, with
/// `A_m(Θ) = Σ_n n g_n f_{m-n} e^{inΘ}` and `B_m = A_m` or `A_{-m}`.
fn correction_oracle(drive: &DriveCoefficients, v: f64, omega: f64, theta: f64, paired: bool) -> f64 {
    let k = drive.cutoff() as i64;
    let g = |n: i64| -> Complex64 {
        if n == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            Complex64::new(0.0, sign / (PI * n as f64))
        }
    };
    let f = |q: i64| if q.abs() <= k { drive.f.get(q) } else { Complex64::new(0.0, 0.0) };
    let a = |m: i64| -> Complex64 {
        (-k..=k).map(|n| g(n) * n as f64 * f(m - n) * Complex64::from_polar(1.0, n as f64 * theta)).sum()
    };
    let mut total = Complex64::new(0.0, 0.0);
    for m in (-2 * k..=2 * k).filter(|&m| m != 0) {
        let b = if paired { a(-m) } else { a(m) };
        total += a(m) * b / (m * m) as f64;
    }
    -(v * v) / (2.0 * omega * omega) * total.re
}

fn second_order() -> Result<Verdict, String> {
    let (drive, _) = realization(&DriveSpec::new(10.0, 1), 0).map_err(|e| e.to_string())?;
    let (v, omega) = (20.0, 2000.0 - timeloc_cli::config::GOLDEN);
    let grid = ring_grid::<f64>(64);
    let mut scaling = 0.0_f64;
    let mut oracle_err = 0.0_f64;
    for (form, paired) in [(CorrectionForm::Paired, true), (CorrectionForm::Squared, false)] {
        let base = second_order_correction_with(&drive, v, omega, &grid, form);
        for factor in [2.0, 3.7] {
            let scaled = second_order_correction_with(&drive, v, omega * factor, &grid, form);
            scaling = scaling.max((base.rms() / scaled.rms() / (factor * factor) - 1.0).abs());
        }
        let exact: Vec<f64> = grid.iter().map(|&t| correction_oracle(&drive, v, omega, t, paired)).collect();
        let scale = exact.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let err = base.samples.iter().zip(&exact).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        oracle_err = oracle_err.max(err / scale);
    }
    Ok(verdict(
        scaling < 1e-6 && oracle_err < 1e-8,
        format!("1/ω² scaling deviation {scaling:.2e} (< 1e-6), max relative error vs double sum on 64 points {oracle_err:.2e} (< 1e-8), both pairings"),
    ))
}

fn classical_agreement() -> Result<Verdict, String> {
    let spreads = |w: &str| -> Result<(f64, f64), String> {
        let c = cfg(Experiment::Sos, &[&format!("physics.omega_plus_alpha={w}")]);
        let secs = with_workers(0, || pipelines::sections(&c)).map_err(|e| e.to_string())?.map_err(|e| format!("{e:#}"))?;
        let raw: Vec<f64> = secs.iter().map(|s| s.spread).collect();
        let max = raw.iter().copied().fold(0.0, f64::max);
        Ok((median(&raw).unwrap_or(f64::NAN), max))
    };
    let (high, high_max) = spreads("2000")?;
    let (low, _) = spreads("300")?;
    let v = 20.0;
    Ok(verdict(
        high <= 0.05 * v && low > high,
        format!(
            "median std of H_eff along 8 sections: {high:.4} at ω=2000-α (≤ {:.2}; max {high_max:.3}), {low:.3} at ω=300-α",
            0.05 * v
        ),
    ))
}

fn disorder_statistics() -> Result<Verdict, String> {
    let (k0, v, n) = (100.0, 3.0, 120u64);
    let spec = DriveSpec::new(k0, 17);
    let grid = ring_grid::<f64>(512);
    let mut sum = 0.0;
    let mut count = 0usize;
    for r in 0..n {
        let (_, c) = realization(&spec, r).map_err(|e| e.to_string())?;
        for u in potential_on_grid(&c, v, &grid).map_err(|e| e.to_string())? {
            sum += u * u;
            count += 1;
        }
    }
    let ring = sum / count as f64 / (v * v);

    let zeta = 2f64.sqrt() / k0;
    let h = zeta / 10.0;
    let mut c0 = 0.0;
    let mut cz = 0.0;
    for r in 0..n {
        let line = synthesize_line_potential(k0, v, 20.0, h, realization_seed(5, r)).map_err(|e| e.to_string())?;
        c0 += sample_autocovariance(&line.samples, 0);
        cz += sample_autocovariance(&line.samples, 10);
    }
    let (c0, cz) = (c0 / n as f64, cz / n as f64);
    let target = (-0.5_f64).exp() * v * v;
    let rel = (cz - target).abs() / target;
    Ok(verdict(
        (0.98..=1.02).contains(&ring) && rel <= 0.03,
        format!(
            "ring variance / V² = {ring:.4} ([0.98, 1.02], k0 = {k0}, {n} realizations), line C(ζ) / (e^-1/2 V²) - 1 = \
             {:+.2}% (≤ 3%), C(0)/V² = {:.4}",
            100.0 * (cz / target - 1.0),
            c0 / (v * v)
        ),
    ))
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .map(|it| {
            it.filter_map(Result::ok)
                .filter(|e| e.path().extension().is_some_and(|x| x == "csv"))
                .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap_or_default()))
                .collect()
        })
        .unwrap_or_default();
    files.sort();
    files
}

fn determinism() -> Result<Verdict, String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let runs = [
        cfg(Experiment::Fig1, &["numerics.realizations=24", "numerics.min_fits=3", "numerics.grid=1024"]),
        cfg(Experiment::Fig2, &["numerics.realizations=6"]),
        cfg(Experiment::Sos, &["numerics.periods=40", "numerics.trajectories=6"]),
        cfg(Experiment::Levels, &["physics.k0=5", "numerics.floquet_halfwidth=10", "sweep.values=[0, 10, 20]"]),
        cfg(Experiment::BornVsTm, &["numerics.length=40", "numerics.realizations=12"]),
        cfg(Experiment::LatticeSweep, &["numerics.realizations=6"]),
    ];
    let mut compared = 0;
    for c in &runs {
        let name = c.experiment.name.name();
        let one = tmp.path().join(format!("{name}-1"));
        let eight = tmp.path().join(format!("{name}-8"));
        let again = tmp.path().join(format!("{name}-manifest"));
        run_experiment(c, &one, 1).map_err(|e| format!("{e:#}"))?;
        run_experiment(c, &eight, 8).map_err(|e| format!("{e:#}"))?;
        // re-run from the written manifest alone
        let from_manifest = ExperimentConfig::load(Some(one.join("manifest.toml").as_path()), &[]).map_err(|e| e.to_string())?;
        run_experiment(&from_manifest, &again, 8).map_err(|e| format!("{e:#}"))?;
        let (a, b, m) = (csv_files(&one), csv_files(&eight), csv_files(&again));
        if a.is_empty() || a != b || a != m {
            let diff: Vec<&str> = a.iter().zip(&b).filter(|(x, y)| x != y).map(|(x, _)| x.0.as_str()).collect();
            return Ok(verdict(false, format!("{name}: CSVs differ between 1 and 8 workers or on manifest re-run {diff:?}")));
        }
        compared += a.len();
    }
    Ok(verdict(
        true,
        format!("{compared} CSV files from {} pipelines byte-identical with 1 and 8 workers and on manifest re-run", runs.len()),
    ))
}

fn main() -> ExitCode {
    let checks: [(&str, Check); 10] = [
        ("Born closed form", born_closed_form),
        ("transfer matrix vs Born", transfer_matrix),
        ("lattice formulas", lattice_formulas),
        ("band width vs 4J", band_cross_check),
        ("eigenstate localization", eigenstate_localization),
        ("secular validity (Floquet)", secular_validity),
        ("second-order correction", second_order),
        ("classical/secular agreement", classical_agreement),
        ("disorder statistics", disorder_statistics),
        ("determinism", determinism),
    ];
    let filter: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let id = i + 1;
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let v = check().unwrap_or_else(|e| verdict(false, format!("error: {e}")));
        let secs = start.elapsed().as_secs_f64();
        if !v.pass {
            failed += 1;
        }
        println!("criterion {id:>2} {} {name}: {} [{secs:.1} s]", if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
