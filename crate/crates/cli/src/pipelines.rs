//! Named experiment pipelines. Each returns its tables and headline numbers;
//! writing them out is left to [`crate::run_experiment`].

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use anyhow::{bail, ensure, Context, Result};
use rayon::prelude::*;
use timeloc::classical::{
    heff_energy, initial_fan, section_spread, stroboscopic, ClassicalState, ClassicalSystem, EffectiveClassical,
    Micromotion,
};
use timeloc::disorder::{realization, DriveSpec};
use timeloc::effmodel::{
    build_matrix, build_matrix_with, diagonalize, lab_frame_series, second_order_correction, EffectiveModelSpec,
    EigenSolution, PlaneWaveBasis,
};
use timeloc::floquet::{
    build_floquet, circular_distance, compare_with_effective, matched_effective_basis, quasienergies,
    second_order_check, ComparisonReport, FloquetBasisWindow, FloquetSpec, QuasienergySpectrum,
};
use timeloc::lattice::{chain_tail_fit, diagonalize_chain, onsite_energies, site_positions, Band, TightBindingChain};
use timeloc::localization::{born_xi, fit_tail, BornInput, Smoothing, TailFitOptions, TransferMatrixRun};
use timeloc::num::{median, ring_grid, wrap_angle};
use timeloc::{DriveCoefficients, EffectiveDisorderCoefficients, LatticeSpec};
use toml::Value;

use crate::config::{Experiment, ExperimentConfig};
use crate::output::CsvTable;

/// Tables and headline values of one pipeline run.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    /// `(file stem, table)` in output order.
    pub tables: Vec<(String, CsvTable)>,
    pub results: BTreeMap<String, Value>,
    pub warnings: Vec<String>,
    /// Index into `tables` of the table aggregated by sweeps.
    pub primary: usize,
    /// Set when some sweep points failed; completed points are still written.
    pub partial_failure: Option<String>,
}

impl Outcome {
    fn table(&mut self, stem: &str, t: CsvTable) -> &mut Self {
        self.tables.push((stem.to_string(), t));
        self
    }

    fn result(&mut self, key: &str, v: impl Into<Value>) -> &mut Self {
        self.results.insert(key.to_string(), v.into());
        self
    }

    pub fn primary_table(&self) -> Option<&CsvTable> {
        self.tables.get(self.primary).map(|(_, t)| t)
    }

    pub fn get(&self, stem: &str) -> Option<&CsvTable> {
        self.tables.iter().find(|(s, _)| s == stem).map(|(_, t)| t)
    }

    pub fn number(&self, key: &str) -> Option<f64> {
        match self.results.get(key)? {
            Value::Float(x) => Some(*x),
            Value::Integer(i) => Some(*i as f64),
            Value::Boolean(b) => Some(f64::from(u8::from(*b))),
            _ => None,
        }
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    match cfg.experiment.name {
        Experiment::Fig1 => fig1(cfg),
        Experiment::Fig2 => fig2(cfg),
        Experiment::Sos => sos(cfg),
        Experiment::Levels => levels(cfg),
        Experiment::EigenstateCompare => eigenstate_compare(cfg),
        Experiment::BornVsTm => born_vs_tm(cfg),
        Experiment::LatticeSweep => lattice_sweep(cfg),
        Experiment::Custom => custom(cfg),
    }
}

/// The table a sweep aggregates for one point. For `levels` this is the
/// per-point level comparison (the experiment itself is a sweep).
pub fn point_table(cfg: &ExperimentConfig) -> Result<CsvTable> {
    if cfg.experiment.name == Experiment::Levels {
        return Ok(level_table(&compare(cfg)?.report));
    }
    let out = run(cfg)?;
    out.primary_table().cloned().context("pipeline produced no table")
}

fn provenance(cfg: &ExperimentConfig) -> String {
    format!(
        "timeloc {} experiment={} seed={}",
        env!("CARGO_PKG_VERSION"),
        cfg.experiment.name,
        cfg.experiment.seed
    )
}

fn physics_line(cfg: &ExperimentConfig) -> String {
    let p = &cfg.physics;
    format!(
        "omega={} alpha={} V={} lambda={} s={} k0={} mu={}",
        p.omega, p.alpha, p.v, p.lambda, p.s, p.k0, p.mu
    )
}

fn header(cfg: &ExperimentConfig, columns: &[&str], units: &str) -> CsvTable {
    CsvTable::new(columns)
        .comment(provenance(cfg))
        .comment(physics_line(cfg))
        .comment(format!("units: {units}"))
}

fn drive_spec(cfg: &ExperimentConfig) -> DriveSpec<f64> {
    DriveSpec::new(cfg.physics.k0, cfg.experiment.seed)
}

fn realization_of(cfg: &ExperimentConfig, index: u64) -> Result<(DriveCoefficients, EffectiveDisorderCoefficients)> {
    Ok(realization(&drive_spec(cfg), index)?)
}

fn effective_spec(cfg: &ExperimentConfig, c: EffectiveDisorderCoefficients) -> EffectiveModelSpec {
    let p = &cfg.physics;
    let mut spec = EffectiveModelSpec::new(c, p.v, p.omega, p.alpha).with_mass(p.mu);
    if p.lambda != 0.0 {
        spec = spec.with_lattice(p.lambda, p.s);
    }
    spec
}

/// Half-width covering the disorder cutoff plus a margin of momenta above
/// the largest energy of interest.
pub fn effective_halfwidth(cfg: &ExperimentConfig, e_top: f64) -> i64 {
    if cfg.numerics.basis_halfwidth > 0 {
        return cfg.numerics.basis_halfwidth;
    }
    let k = drive_spec(cfg).cutoff as i64;
    let p_top = (2.0 * (e_top.max(0.0) + cfg.physics.lambda.abs()) / cfg.physics.mu).sqrt().ceil() as i64;
    (k + 1) / 2 + 2 * p_top + 16
}

pub fn floquet_halfwidth(cfg: &ExperimentConfig) -> i64 {
    if cfg.numerics.floquet_halfwidth > 0 {
        cfg.numerics.floquet_halfwidth
    } else {
        (2.0 * cfg.physics.k0).ceil() as i64
    }
}

const EDGE_HARMONICS: usize = 4;
const EDGE_TOLERANCE: f64 = 1e-6;

fn check_edges(sol: &EigenSolution, states: &[usize]) -> Result<()> {
    for &i in states {
        let w = sol.edge_weight(i, EDGE_HARMONICS);
        if w > EDGE_TOLERANCE {
            bail!(
                "invariant `basis truncation` violated: state {i} (Ẽ = {:.4}) has weight {w:.2e} on the outermost \
                 harmonics; raise numerics.basis_halfwidth",
                sol.shifted[i]
            );
        }
    }
    Ok(())
}

fn born_at(cfg: &ExperimentConfig, energy: f64) -> Result<timeloc::BornEstimate> {
    // μP²/2 + V at Ẽ is the unit-mass problem at (Ẽ/μ, V/μ)
    let mu = cfg.physics.mu;
    Ok(born_xi(&BornInput { energy: energy / mu, k0: cfg.physics.k0, v: cfg.physics.v / mu })?)
}

/// One single-eigenstate tail fit.
#[derive(Clone, Debug, PartialEq)]
pub struct FitRecord {
    pub realization: u64,
    pub state: usize,
    pub energy: f64,
    pub xi: f64,
    pub r_squared: f64,
    pub accepted: bool,
    pub xi_born: f64,
}

impl FitRecord {
    pub fn ratio(&self) -> f64 {
        self.xi / self.xi_born
    }
}

#[derive(Clone, Debug)]
pub struct EigenstateSurvey {
    pub records: Vec<FitRecord>,
    pub realizations: usize,
    /// Realization 0, kept for figures.
    pub first: EigenSolution,
}

impl EigenstateSurvey {
    pub fn accepted(&self) -> Vec<&FitRecord> {
        self.records.iter().filter(|r| r.accepted).collect()
    }

    pub fn median_ratio_accepted(&self) -> Option<f64> {
        median(&self.accepted().iter().map(|r| r.ratio()).collect::<Vec<_>>())
    }

    pub fn median_ratio_all(&self) -> Option<f64> {
        median(&self.records.iter().filter(|r| r.xi.is_finite()).map(FitRecord::ratio).collect::<Vec<_>>())
    }

    pub fn median_xi_accepted(&self) -> Option<f64> {
        median(&self.accepted().iter().map(|r| r.xi).collect::<Vec<_>>())
    }

    pub fn acceptance_fraction(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        self.accepted().len() as f64 / self.records.len() as f64
    }
}

const SURVEY_CHUNK: usize = 16;

/// Tail fits of every effective eigenstate with `shell_lo ≤ Ẽ < shell_hi`.
///
/// Realizations are processed in fixed chunks and consumed in order until at
/// least `min_fits` fits are accepted from at least `min_realizations`
/// realizations, or `realizations` is exhausted; the stopping point does not
/// depend on the worker count.
pub fn eigenstate_survey(cfg: &ExperimentConfig) -> Result<EigenstateSurvey> {
    let n = &cfg.numerics;
    ensure!(n.shell_lo > 0.0, "numerics.shell_lo must be positive for Born comparisons");
    ensure!(n.realizations >= 1, "numerics.realizations must be at least 1");
    let hw = effective_halfwidth(cfg, n.shell_hi);
    let grid = ring_grid::<f64>(n.grid);
    let one = |r: u64| -> Result<(Vec<FitRecord>, EigenSolution)> {
        let (_, c) = realization_of(cfg, r)?;
        let spec = effective_spec(cfg, c);
        let basis = PlaneWaveBasis::centered(hw, spec.beta);
        let sol = diagonalize(&build_matrix(&spec, &basis)?)?;
        let states = sol.shell(n.shell_lo, n.shell_hi);
        check_edges(&sol, &states)?;
        let mut records = Vec::with_capacity(states.len());
        for i in states {
            let energy = sol.shifted[i];
            let half_wavelength = PI / (2.0 * energy / cfg.physics.mu).sqrt();
            let opts = TailFitOptions::periodic(TAU).with_smoothing(Smoothing::Mean(half_wavelength));
            let fit = fit_tail(&grid, &sol.density(i, &grid), &opts)?;
            records.push(FitRecord {
                realization: r,
                state: i,
                energy,
                xi: fit.xi,
                r_squared: fit.r_squared,
                accepted: fit.accepted,
                xi_born: born_at(cfg, energy)?.xi,
            });
        }
        Ok((records, sol))
    };
    let mut records = Vec::new();
    let mut first = None;
    let mut used = 0;
    let mut accepted = 0;
    'outer: for start in (0..n.realizations).step_by(SURVEY_CHUNK) {
        let end = (start + SURVEY_CHUNK).min(n.realizations);
        let chunk: Vec<_> = (start..end).into_par_iter().map(|r| one(r as u64)).collect::<Result<_>>()?;
        for (recs, sol) in chunk {
            if first.is_none() {
                first = Some(sol);
            }
            accepted += recs.iter().filter(|r| r.accepted).count();
            records.extend(recs);
            used += 1;
            if accepted >= n.min_fits && used >= n.min_realizations {
                break 'outer;
            }
        }
    }
    Ok(EigenstateSurvey { records, realizations: used, first: first.expect("at least one realization") })
}

fn fig1(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = &cfg.physics;
    let n = &cfg.numerics;
    let born = born_at(cfg, p.energy)?;
    let survey = eigenstate_survey(cfg)?;
    let sol = &survey.first;
    let state = (0..sol.len())
        .min_by(|&a, &b| (sol.shifted[a] - p.energy).abs().total_cmp(&(sol.shifted[b] - p.energy).abs()))
        .context("empty spectrum")?;
    check_edges(sol, &[state])?;

    let grid = ring_grid::<f64>(n.grid);
    let rho = sol.density(state, &grid);
    let mut density = header(cfg, &["theta", "density"], "theta in rad (rotating frame at t=0), density per rad");
    for (t, r) in grid.iter().zip(&rho) {
        density.push(vec![(*t).into(), (*r).into()]);
    }

    // two drive periods at the fixed lab point θ = 0
    let period = TAU / p.omega;
    let times: Vec<f64> = (0..2 * n.times).map(|i| period * i as f64 / n.times as f64).collect();
    let series = lab_frame_series(sol, state, 0.0, &times);
    let mut lab = header(cfg, &["t_over_period", "density"], "time in drive periods, density per rad at theta=0");
    for (t, r) in times.iter().zip(&series) {
        lab.push(vec![(t / period).into(), (*r).into()]);
    }

    let half_wavelength = PI / (2.0 * sol.shifted[state].max(1e-12) / p.mu).sqrt();
    let fig_fit = fit_tail(&grid, &rho, &TailFitOptions::periodic(TAU).with_smoothing(Smoothing::Mean(half_wavelength)))?;

    let mut fits = header(
        cfg,
        &["realization", "state", "energy", "xi_fit", "r_squared", "accepted", "xi_born"],
        "energy = E - omega^2/2, xi in rad (density decay length)",
    );
    for r in &survey.records {
        fits.push(vec![
            r.realization.into(),
            r.state.into(),
            r.energy.into(),
            r.xi.into(),
            r.r_squared.into(),
            r.accepted.into(),
            r.xi_born.into(),
        ]);
    }

    let mut out = Outcome::default();
    out.table("fig1_density", density).table("fig1_lab", lab).table("fig1_fits", fits);
    out.primary = 2;
    out.result("xi_born", born.xi)
        .result("indicator", born.indicator)
        .result("zeta", born.zeta)
        .result("state_energy", sol.shifted[state])
        .result("state_xi_fit", fig_fit.xi)
        .result("state_r_squared", fig_fit.r_squared)
        .result("realizations", survey.realizations as i64)
        .result("fits", survey.records.len() as i64)
        .result("fits_accepted", survey.accepted().len() as i64)
        .result("acceptance_fraction", survey.acceptance_fraction());
    if let Some(m) = survey.median_ratio_accepted() {
        out.result("median_ratio_accepted", m);
    }
    if let Some(m) = survey.median_ratio_all() {
        out.result("median_ratio_all", m);
    }
    if survey.accepted().len() < n.min_fits {
        out.warnings.push(format!(
            "only {} accepted fits after {} realizations (wanted {})",
            survey.accepted().len(),
            survey.realizations,
            n.min_fits
        ));
    }
    if born.indicator > 0.1 {
        out.warnings.push(format!("weak-scattering indicator {:.3} is not small", born.indicator));
    }
    Ok(out)
}

fn lattice_spec(cfg: &ExperimentConfig) -> LatticeSpec {
    let p = &cfg.physics;
    LatticeSpec::new(p.s, p.lambda, p.v, p.k0, cfg.experiment.seed).with_band(p.band)
}

#[derive(Clone, Debug)]
pub struct ChainFit {
    pub realization: u64,
    pub state: usize,
    pub energy: f64,
    pub xi: f64,
    pub r_squared: f64,
    pub accepted: bool,
}

fn chain_fits(cfg: &ExperimentConfig, spec: &LatticeSpec, j: f64) -> Result<Vec<Vec<ChainFit>>> {
    (0..cfg.numerics.realizations as u64)
        .into_par_iter()
        .map(|r| {
            let chain = TightBindingChain::new(j, onsite_energies(spec, r)?)?;
            let spectrum = diagonalize_chain(&chain)?;
            spectrum
                .mid_band(cfg.numerics.states)
                .into_iter()
                .map(|i| {
                    let fit = chain_tail_fit(&spectrum, i)?;
                    Ok(ChainFit {
                        realization: r,
                        state: i,
                        energy: spectrum.values[i],
                        xi: fit.xi,
                        r_squared: fit.r_squared,
                        accepted: fit.accepted,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect()
}

/// Harmonic-oscillator Wannier density of `band` around a lattice minimum.
fn wannier_density(x: f64, width: f64, band: Band) -> f64 {
    let g = (-(x * x) / (width * width)).exp() / (width * PI.sqrt());
    match band {
        Band::Lowest => g,
        Band::FirstExcited => 2.0 * x * x / (width * width) * g,
    }
}

fn fig2(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = &cfg.physics;
    let spec = lattice_spec(cfg);
    spec.validate()?;
    let j = spec.hopping()?;
    let xi_formula = timeloc::lattice::lattice_xi(j, p.s, p.v)?;
    let fits = chain_fits(cfg, &spec, j)?;

    let eps = onsite_energies(&spec, 0)?;
    let spectrum = diagonalize_chain(&TightBindingChain::new(j, eps.clone())?)?;
    let state = spectrum.mid_band(1)[0];
    let amp = spectrum.density(state);
    let sites: Vec<f64> = site_positions(p.s);
    let mut site_table = header(cfg, &["site", "theta", "onsite", "density"], "theta in rad, onsite energy, site occupation");
    for (i, ((th, e), d)) in sites.iter().zip(&eps).zip(&amp).enumerate() {
        site_table.push(vec![i.into(), (*th).into(), (*e).into(), (*d).into()]);
    }

    // lab-frame density at θ = 0 over one period, from site occupations
    let width = (2.0 * p.mu / (p.lambda * (p.s as f64).powi(2))).powf(0.25);
    let samples = cfg.numerics.grid;
    let mut lab = header(cfg, &["t_over_period", "density"], "time in drive periods, density per rad at theta=0");
    for i in 0..samples {
        let frac = i as f64 / samples as f64;
        let theta = wrap_angle(-TAU * frac);
        let rho: f64 = sites
            .iter()
            .zip(&amp)
            .map(|(&th, &a)| a * wannier_density(wrap_angle(theta - th), width, p.band))
            .sum();
        lab.push(vec![frac.into(), rho.into()]);
    }

    let mut fit_table = header(
        cfg,
        &["realization", "state", "energy", "xi_fit", "r_squared", "accepted"],
        "chain energy, xi in rad",
    );
    let flat: Vec<&ChainFit> = fits.iter().flatten().collect();
    for f in &flat {
        fit_table.push(vec![
            f.realization.into(),
            f.state.into(),
            f.energy.into(),
            f.xi.into(),
            f.r_squared.into(),
            f.accepted.into(),
        ]);
    }
    let all: Vec<f64> = flat.iter().filter(|f| f.xi.is_finite()).map(|f| f.xi).collect();
    let acc: Vec<f64> = flat.iter().filter(|f| f.accepted).map(|f| f.xi).collect();

    let mut out = Outcome::default();
    out.table("fig2_sites", site_table).table("fig2_lab", lab).table("fig2_fits", fit_table);
    out.primary = 2;
    out.result("band", p.band.to_string())
        .result("J", j)
        .result("xi_formula", xi_formula)
        .result("wannier_width", width)
        .result("fits", flat.len() as i64)
        .result("fits_accepted", acc.len() as i64);
    if let Some(m) = median(&all) {
        out.result("xi_fit_median", m);
    }
    if let Some(m) = median(&acc) {
        out.result("xi_fit_median_accepted", m);
    }
    out.warnings.extend(spec.diagnostics());
    Ok(out)
}

fn lattice_sweep(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = &cfg.physics;
    let spec = lattice_spec(cfg);
    spec.validate()?;
    let j = spec.hopping()?;
    let xi_formula = timeloc::lattice::lattice_xi(j, p.s, p.v)?;
    let fits = chain_fits(cfg, &spec, j)?;
    let mut table = header(
        cfg,
        &["realization", "band", "J", "xi_formula", "xi_fit_median", "accepted"],
        "xi in rad; median over mid-band states of each realization",
    );
    let mut medians = Vec::new();
    for (r, per) in fits.iter().enumerate() {
        let xs: Vec<f64> = per.iter().filter(|f| f.xi.is_finite()).map(|f| f.xi).collect();
        let m = median(&xs).unwrap_or(f64::NAN);
        medians.push(m);
        table.push(vec![
            r.into(),
            p.band.to_string().into(),
            j.into(),
            xi_formula.into(),
            m.into(),
            per.iter().filter(|f| f.accepted).count().into(),
        ]);
    }
    let mut out = Outcome::default();
    out.table("lattice_sweep", table);
    out.result("J", j).result("xi_formula", xi_formula).result("band", p.band.to_string());
    if let Some(m) = median(&medians.into_iter().filter(|x| x.is_finite()).collect::<Vec<_>>()) {
        out.result("xi_fit_median", m);
    }
    out.warnings.extend(spec.diagnostics());
    Ok(out)
}

/// Per-trajectory section spreads of the `sos` pipeline.
#[derive(Clone, Debug)]
pub struct SectionSummary {
    pub theta0: f64,
    pub p0: f64,
    pub energy_mean: f64,
    pub spread: f64,
    pub spread_averaged: f64,
    pub points: Vec<(f64, f64, f64)>,
}

pub fn sections(cfg: &ExperimentConfig) -> Result<Vec<SectionSummary>> {
    let p = &cfg.physics;
    let n = &cfg.numerics;
    let (drive, c) = realization_of(cfg, 0)?;
    let cutoff = if n.fourier_cutoff == 0 { drive.cutoff() } else { n.fourier_cutoff.min(drive.cutoff()) };
    let mut sys = ClassicalSystem::new(drive.clone(), p.v, p.omega, p.alpha);
    let mut heff = EffectiveClassical::new(c, p.v, p.omega);
    if p.lambda != 0.0 {
        sys = sys.with_lattice(p.lambda, p.s);
        heff = heff.with_lattice(p.lambda, p.s);
    }
    heff.mass = p.mu;
    let mm = Micromotion::new(&drive, p.v, p.omega);
    initial_fan(p.v, n.trajectories, cfg.experiment.seed)
        .into_par_iter()
        .map(|(theta0, p0)| {
            let start = ClassicalState::resonant(theta0, p0, p.omega, p.alpha);
            let sec = stroboscopic(&sys, start, n.steps_per_period, cutoff, n.periods)?;
            let avg = mm.averaged(&sec);
            let energies: Vec<f64> =
                sec.points.iter().map(|&(t, q)| heff_energy(&heff, t, q) - 0.5 * p.omega * p.omega).collect();
            Ok(SectionSummary {
                theta0,
                p0,
                energy_mean: energies.iter().sum::<f64>() / energies.len().max(1) as f64,
                spread: section_spread(&heff, &sec),
                spread_averaged: section_spread(&heff, &avg),
                points: sec.points.iter().zip(&avg.points).map(|(&(t, q), &(_, qa))| (t, q, qa)).collect(),
            })
        })
        .collect()
}

fn sos(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = &cfg.physics;
    let secs = sections(cfg)?;
    let mut points = header(
        cfg,
        &["trajectory", "period", "theta", "p", "p_averaged"],
        "Theta in rad, P = p - alpha - omega; p_averaged removes the first-order micromotion",
    );
    let mut spread = header(
        cfg,
        &["trajectory", "theta0", "p0", "energy_mean", "spread", "spread_averaged"],
        "energies are H_eff - omega^2/2; spread is the std along the section",
    );
    for (k, s) in secs.iter().enumerate() {
        for (i, &(t, q, qa)) in s.points.iter().enumerate() {
            points.push(vec![k.into(), i.into(), t.into(), q.into(), qa.into()]);
        }
        spread.push(vec![
            k.into(),
            s.theta0.into(),
            s.p0.into(),
            s.energy_mean.into(),
            s.spread.into(),
            s.spread_averaged.into(),
        ]);
    }

    // secular energy landscape for contour plots
    let (_, c) = realization_of(cfg, 0)?;
    let mut heff = EffectiveClassical::new(c, p.v, p.omega);
    if p.lambda != 0.0 {
        heff = heff.with_lattice(p.lambda, p.s);
    }
    heff.mass = p.mu;
    let span = 1.5 * (2.0 * p.v.abs()).sqrt().max(1.0);
    let (nt, np) = (128, 64);
    let mut landscape = header(cfg, &["theta", "p", "energy"], "H_eff - omega^2/2 on a grid");
    for i in 0..nt {
        let t = -PI + TAU * i as f64 / nt as f64;
        for k in 0..np {
            let q = -span + 2.0 * span * k as f64 / (np - 1) as f64;
            landscape.push(vec![t.into(), q.into(), (heff_energy(&heff, t, q) - 0.5 * p.omega * p.omega).into()]);
        }
    }

    let raw: Vec<f64> = secs.iter().map(|s| s.spread).collect();
    let avg: Vec<f64> = secs.iter().map(|s| s.spread_averaged).collect();
    let mut out = Outcome::default();
    out.table("sos_spread", spread).table("sos_points", points).table("sos_heff", landscape);
    out.primary = 0;
    let max = |xs: &[f64]| xs.iter().copied().fold(0.0, f64::max);
    out.result("spread_median", median(&raw).unwrap_or(0.0))
        .result("spread_max", max(&raw))
        .result("spread_averaged_median", median(&avg).unwrap_or(0.0))
        .result("spread_averaged_max", max(&avg))
        .result("spread_median_over_v", median(&raw).unwrap_or(0.0) / p.v.abs().max(f64::MIN_POSITIVE));
    Ok(out)
}

/// Floquet-versus-effective comparison at one parameter point.
pub struct Comparison {
    pub spec: FloquetSpec,
    pub window: FloquetBasisWindow,
    pub spectrum: QuasienergySpectrum,
    pub effective: EigenSolution,
    pub report: ComparisonReport,
}

fn floquet_setup(cfg: &ExperimentConfig, window: FloquetBasisWindow) -> Result<(FloquetSpec, QuasienergySpectrum, EigenSolution)> {
    let p = &cfg.physics;
    ensure!(p.mu == 1.0, "physics.mu must be 1 for Floquet comparisons (the lab Hamiltonian has unit mass)");
    let (drive, c) = realization_of(cfg, 0)?;
    let mut spec = FloquetSpec::new(drive, p.v, p.omega, p.alpha);
    if p.lambda != 0.0 {
        spec = spec.with_lattice(p.lambda, p.s);
    }
    let spectrum = quasienergies(&build_floquet(&spec, &window)?, &window, p.omega, 0.0)?;
    let eff = effective_spec(cfg, c);
    let effective = diagonalize(&build_matrix(&eff, &matched_effective_basis(&spec, &window))?)?;
    Ok((spec, spectrum, effective))
}

pub fn compare(cfg: &ExperimentConfig) -> Result<Comparison> {
    let p = &cfg.physics;
    let window = FloquetBasisWindow::resonant(p.omega, p.alpha, floquet_halfwidth(cfg));
    let (spec, spectrum, effective) = floquet_setup(cfg, window)?;
    let count = cfg.numerics.levels.max(cfg.numerics.state + 1);
    let report = compare_with_effective(&spectrum, &effective, &spec, count)?;
    Ok(Comparison { spec, window, spectrum, effective, report })
}

fn level_table(report: &ComparisonReport) -> CsvTable {
    let mut t = CsvTable::new(&["level", "e_eff", "e_floquet", "target", "residual", "overlap", "ambiguous"]);
    for pair in &report.pairs {
        t.push(vec![
            pair.index.into(),
            pair.e_eff.into(),
            pair.quasienergy.into(),
            pair.target.into(),
            pair.residual.into(),
            pair.overlap.into(),
            pair.ambiguous.into(),
        ]);
    }
    t
}

fn levels(cfg: &ExperimentConfig) -> Result<Outcome> {
    let sweep = crate::sweep::sweep(cfg, &cfg.sweep.axis, &cfg.sweep.values);
    let mut table = sweep.table.clone();
    table.comments = vec![
        provenance(cfg),
        physics_line(cfg),
        "units: e_eff absolute effective energy; e_floquet folded into [0, omega); residual is the circular distance"
            .into(),
    ];
    let mut out = Outcome::default();
    let failed = sweep.failures.len();
    out.table("levels", table);
    if failed > 0 {
        out.table("levels_failures", sweep.failure_table());
        for (v, e) in &sweep.failures {
            out.warnings.push(format!("{}={v}: {e}", cfg.sweep.axis));
        }
    }
    out.result("points", cfg.sweep.values.len() as i64).result("failed_points", failed as i64);
    if failed > 0 {
        out.partial_failure = Some(format!("{failed} sweep point(s) failed: {}", out.warnings.join("; ")));
    }
    Ok(out)
}

fn eigenstate_compare(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = &cfg.physics;
    let n = &cfg.numerics;
    let cmp = compare(cfg)?;
    let pair = &cmp.report.pairs[n.state];
    let grid = ring_grid::<f64>(n.grid);
    let rho_eff = cmp.effective.density(n.state, &grid);
    let rho_fl = cmp.spectrum.density(pair.floquet_state, &grid);
    let mut density = header(
        cfg,
        &["theta", "density_effective", "density_floquet"],
        "theta in rad (lab frame at t=0), density per rad",
    );
    for ((t, a), b) in grid.iter().zip(&rho_eff).zip(&rho_fl) {
        density.push(vec![(*t).into(), (*a).into(), (*b).into()]);
    }
    let mut report = level_table(&cmp.report);
    report.comments = header(cfg, &[], "energies absolute; e_floquet folded into [0, omega)").comments;

    let mut out = Outcome::default();
    out.table("compare_levels", report).table("compare_density", density);
    out.primary = 0;
    out.result("max_residual", cmp.report.max_residual())
        .result("median_residual", cmp.report.median_residual())
        .result("min_overlap", cmp.report.min_overlap())
        .result("state_overlap", pair.overlap)
        .result("ambiguous", cmp.report.ambiguous() as i64)
        .result("candidates", cmp.report.candidates as i64)
        .result("dimension", cmp.window.dimension() as i64);

    if n.second_order {
        let (drive, c) = realization_of(cfg, 0)?;
        let h2 = second_order_correction(&drive, p.v, p.omega, &ring_grid(64));
        let basis = matched_effective_basis(&cmp.spec, &cmp.window);
        let corrected = diagonalize(&build_matrix_with(&effective_spec(cfg, c), &basis, Some(&h2.harmonics))?)?;
        let check = second_order_check(&cmp.effective, &corrected, &cmp.spectrum, &cmp.spec, cmp.report.pairs.len())?;
        let mut t = header(cfg, &["level", "residual", "residual_corrected"], "energy");
        for (a, b) in check.without.pairs.iter().zip(&check.with.pairs) {
            t.push(vec![a.index.into(), a.residual.into(), b.residual.into()]);
        }
        out.table("compare_second_order", t);
        out.result("median_residual_corrected", check.median_with())
            .result("second_order_improves", check.improves())
            .result("correction_rms", h2.rms());
    }
    if n.window_check {
        let wider = cmp.window.scaled(1.25);
        let (spec, spectrum, effective) = floquet_setup(cfg, wider)?;
        let r = compare_with_effective(&spectrum, &effective, &spec, cmp.report.pairs.len())?;
        let shift = cmp
            .report
            .pairs
            .iter()
            .zip(&r.pairs)
            .map(|(a, b)| circular_distance(a.quasienergy, b.quasienergy, p.omega))
            .fold(0.0, f64::max);
        out.result("window_shift", shift);
        if shift > 0.25 * cmp.report.max_residual().max(1e-9) {
            out.warnings.push(format!(
                "enlarging the Floquet window moved levels by {shift:.3e}, comparable to the residuals"
            ));
        }
    }
    if cmp.report.ambiguous() > 0 {
        out.warnings.push(format!("{} level pairing(s) were ambiguous", cmp.report.ambiguous()));
    }
    Ok(out)
}

fn born_vs_tm(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = &cfg.physics;
    let n = &cfg.numerics;
    ensure!(p.mu == 1.0, "physics.mu must be 1 for the transfer-matrix pipeline");
    let born = born_at(cfg, p.energy)?;
    let length = if n.length > 0.0 { n.length } else { 100.0 * born.xi };
    let tm = TransferMatrixRun::new(p.k0, p.v, length, n.realizations, cfg.experiment.seed).estimate(p.energy)?;
    let mut table = header(
        cfg,
        &["energy", "k0", "v", "xi_born", "indicator", "xi_tm", "xi_tm_stderr", "rel_diff", "length", "h", "realizations"],
        "lengths in rad (density decay length), energy above the potential mean",
    );
    let rel = (tm.xi - born.xi) / born.xi;
    table.push(vec![
        p.energy.into(),
        p.k0.into(),
        p.v.into(),
        born.xi.into(),
        born.indicator.into(),
        tm.xi.into(),
        tm.xi_stderr.into(),
        rel.into(),
        tm.length.into(),
        tm.h.into(),
        tm.realizations.into(),
    ]);
    let mut per = header(cfg, &["realization", "gamma", "xi"], "gamma is the amplitude exponent; xi = 1/(2 gamma)");
    for (i, g) in tm.per_realization.iter().enumerate() {
        per.push(vec![i.into(), (*g).into(), (0.5 / g).into()]);
    }
    let mut out = Outcome::default();
    out.table("born_vs_tm", table).table("tm_realizations", per);
    out.result("xi_born", born.xi)
        .result("indicator", born.indicator)
        .result("zeta", born.zeta)
        .result("correlation_energy", born.correlation_energy)
        .result("xi_tm", tm.xi)
        .result("xi_tm_stderr", tm.xi_stderr)
        .result("rel_diff", rel)
        .result("length", tm.length)
        .result("h", tm.h);
    out.warnings.extend(tm.warnings);
    Ok(out)
}

fn custom(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = &cfg.physics;
    let n = &cfg.numerics;
    let (_, c) = realization_of(cfg, 0)?;
    let spec = effective_spec(cfg, c);
    let e_top = p.energy.max(n.shell_hi);
    let basis = PlaneWaveBasis::centered(effective_halfwidth(cfg, e_top), spec.beta);
    let sol = diagonalize(&build_matrix(&spec, &basis)?)?;
    let count = n.levels.min(sol.len());
    check_edges(&sol, &(0..count).collect::<Vec<_>>())?;
    let mut levels = header(cfg, &["level", "energy", "shifted", "edge_weight"], "energy absolute, shifted = E - omega^2/2");
    for i in 0..count {
        levels.push(vec![i.into(), sol.energies[i].into(), sol.shifted[i].into(), sol.edge_weight(i, EDGE_HARMONICS).into()]);
    }
    let state = (0..sol.len())
        .min_by(|&a, &b| (sol.shifted[a] - p.energy).abs().total_cmp(&(sol.shifted[b] - p.energy).abs()))
        .context("empty spectrum")?;
    check_edges(&sol, &[state])?;
    let grid = ring_grid::<f64>(n.grid);
    let mut density = header(cfg, &["theta", "density"], "theta in rad, density per rad");
    for (t, r) in grid.iter().zip(sol.density(state, &grid)) {
        density.push(vec![(*t).into(), r.into()]);
    }
    let mut out = Outcome::default();
    out.table("custom_levels", levels).table("custom_density", density);
    out.result("beta", spec.beta)
        .result("dimension", basis.len() as i64)
        .result("state", state as i64)
        .result("state_energy", sol.shifted[state]);
    Ok(out)
}
