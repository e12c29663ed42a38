//! Level and eigenstate comparison between the Floquet and effective models.

use crate::effmodel::{EigenSolution, PlaneWaveBasis};
use crate::error::{invalid, Result};
use crate::linalg::C64;
use crate::num::median;

use super::{circular_distance, fold, FloquetBasisWindow, FloquetSpec, QuasienergySpectrum};

/// Effective basis covering the same lab momenta as the Floquet window.
pub fn matched_effective_basis(spec: &FloquetSpec, window: &FloquetBasisWindow) -> PlaneWaveBasis {
    let n0 = spec.resonant_shift();
    PlaneWaveBasis::new(
        window.n_center - window.n_halfwidth - n0,
        window.n_center + window.n_halfwidth - n0,
        spec.offset(),
    )
}

/// One effective level and its Floquet partner.
#[derive(Clone, Debug)]
pub struct LevelPair {
    pub index: usize,
    /// Effective energy including `ω²/2`.
    pub e_eff: f64,
    /// `e_eff + ωβ` folded into the spectrum's interval.
    pub target: f64,
    pub quasienergy: f64,
    pub residual: f64,
    pub overlap: f64,
    pub floquet_state: usize,
    pub ambiguous: bool,
}

#[derive(Clone, Debug)]
pub struct ComparisonReport {
    pub pairs: Vec<LevelPair>,
    pub omega: f64,
    pub v: f64,
    pub k0: f64,
    /// Floquet states kept as candidates (`|copy index| < 1/2`).
    pub candidates: usize,
}

impl ComparisonReport {
    pub fn residuals(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.residual).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.pairs.iter().map(|p| p.residual).fold(0.0, f64::max)
    }

    pub fn median_residual(&self) -> f64 {
        median(&self.residuals()).unwrap_or(0.0)
    }

    pub fn min_overlap(&self) -> f64 {
        self.pairs.iter().map(|p| p.overlap).fold(1.0, f64::min)
    }

    pub fn ambiguous(&self) -> usize {
        self.pairs.iter().filter(|p| p.ambiguous).count()
    }
}

/// Pairs the lowest `count` effective levels with Floquet quasienergies.
///
/// Only the copy of each Floquet state whose temporal shift is closest to
/// zero is eligible, so the folded duplicates of one physical level never
/// compete. Each effective level takes the nearest unclaimed candidate
/// (distance modulo `ω`); a level is flagged ambiguous when a second
/// unclaimed candidate also lies within `10⁻³ ω`.
pub fn compare_with_effective(
    spectrum: &QuasienergySpectrum,
    effective: &EigenSolution,
    spec: &FloquetSpec,
    count: usize,
) -> Result<ComparisonReport> {
    let omega = spectrum.omega;
    if (effective.omega - omega).abs() > 1e-12 * omega {
        return Err(invalid("omega", "effective and Floquet frequencies differ"));
    }
    if count > effective.len() {
        return Err(invalid("count", format!("{count} levels requested, {} available", effective.len())));
    }
    let n0 = spec.resonant_shift();
    let beta = spec.offset();
    let candidates: Vec<usize> = (0..spectrum.len())
        .filter(|&i| spectrum.copy_index(i, n0).abs() < 0.5)
        .collect();
    let mut claimed = vec![false; spectrum.len()];
    let tolerance = 1e-3 * omega;
    let mut pairs = Vec::with_capacity(count);
    for index in 0..count {
        let e_eff = effective.energies[index];
        let target = fold(e_eff + omega * beta, spectrum.e_ref, omega);
        let mut ranked: Vec<(f64, usize)> = candidates
            .iter()
            .filter(|&&i| !claimed[i])
            .map(|&i| (circular_distance(spectrum.folded[i], target, omega), i))
            .collect();
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0));
        let Some(&(residual, state)) = ranked.first() else {
            return Err(invalid("window", "no unclaimed Floquet candidates left"));
        };
        let ambiguous = ranked.get(1).is_some_and(|&(d, _)| d <= tolerance);
        claimed[state] = true;
        pairs.push(LevelPair {
            index,
            e_eff,
            target,
            quasienergy: spectrum.folded[state],
            residual,
            overlap: overlap(spectrum, state, effective, index, n0),
            floquet_state: state,
            ambiguous,
        });
    }
    Ok(ComparisonReport {
        pairs,
        omega,
        v: spec.v,
        k0: spec.drive.k0,
        candidates: candidates.len(),
    })
}

/// `|⟨ψ_F(t=0)|ψ_eff⟩|` with the effective harmonic `k` sitting at lab
/// momentum `k + n₀`; the Floquet state is renormalized at `t = 0`.
fn overlap(spectrum: &QuasienergySpectrum, state: usize, effective: &EigenSolution, level: usize, n0: i64) -> f64 {
    let amps = spectrum.spatial_amplitudes(state);
    let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return 0.0;
    }
    let n_min = *spectrum.window.n_range().start();
    let mut acc = C64::new(0.0, 0.0);
    for (i, a) in amps.iter().enumerate() {
        let k = n_min + i as i64 - n0;
        if let Some(row) = effective.basis.index_of(k) {
            acc += a.conj() * effective.vectors[(row, level)];
        }
    }
    acc.norm() / norm
}

#[derive(Clone, Debug)]
pub struct SecondOrderReport {
    pub without: ComparisonReport,
    pub with: ComparisonReport,
}

impl SecondOrderReport {
    pub fn median_without(&self) -> f64 {
        self.without.median_residual()
    }

    pub fn median_with(&self) -> f64 {
        self.with.median_residual()
    }

    /// Whether the correction does not worsen the median level residual.
    pub fn improves(&self) -> bool {
        self.median_with() <= self.median_without()
    }
}

/// Compares the effective levels with and without the second-order
/// correction against the same quasienergy spectrum.
pub fn second_order_check(
    without: &EigenSolution,
    with: &EigenSolution,
    spectrum: &QuasienergySpectrum,
    spec: &FloquetSpec,
    count: usize,
) -> Result<SecondOrderReport> {
    Ok(SecondOrderReport {
        without: compare_with_effective(spectrum, without, spec, count)?,
        with: compare_with_effective(spectrum, with, spec, count)?,
    })
}
