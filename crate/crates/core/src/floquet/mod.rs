//! Exact Floquet treatment of the driven ring.
//!
//! `H_F = H(t) - i∂_t` is represented in the product basis
//! `|n, m⟩ = e^{inθ} e^{imωt}` with spatial harmonics near the resonant
//! momentum and temporal harmonics near zero. Quasienergies are defined modulo
//! `ω`; every physical state appears once per temporal shift of the window.

mod compare;

pub use compare::{
    compare_with_effective, matched_effective_basis, second_order_check, ComparisonReport, LevelPair,
    SecondOrderReport,
};

use faer::Mat;

use crate::disorder::{sawtooth_coefficient, DriveCoefficients};
use crate::effmodel::default_offset;
use crate::error::{invalid, Error, Result};
use crate::linalg::{self, C64};

/// Rectangular window of spatial (`n`) and temporal (`m`) harmonics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FloquetBasisWindow {
    pub n_center: i64,
    pub n_halfwidth: i64,
    pub m_halfwidth: i64,
}

impl FloquetBasisWindow {
    /// Window centred on `round(ω + α)` with equal half-widths.
    pub fn resonant(omega: f64, alpha: f64, halfwidth: i64) -> Self {
        Self {
            n_center: (omega + alpha).round() as i64,
            n_halfwidth: halfwidth,
            m_halfwidth: halfwidth,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n_center: self.n_center,
            n_halfwidth: (self.n_halfwidth as f64 * factor).ceil() as i64,
            m_halfwidth: (self.m_halfwidth as f64 * factor).ceil() as i64,
        }
    }

    pub fn n_len(&self) -> usize {
        (2 * self.n_halfwidth + 1) as usize
    }

    pub fn m_len(&self) -> usize {
        (2 * self.m_halfwidth + 1) as usize
    }

    pub fn dimension(&self) -> usize {
        self.n_len() * self.m_len()
    }

    pub fn n_range(&self) -> std::ops::RangeInclusive<i64> {
        self.n_center - self.n_halfwidth..=self.n_center + self.n_halfwidth
    }

    pub fn m_range(&self) -> std::ops::RangeInclusive<i64> {
        -self.m_halfwidth..=self.m_halfwidth
    }

    /// Row index of `|n, m⟩`; `m` runs fastest.
    pub fn index(&self, n: i64, m: i64) -> usize {
        let i = (n - self.n_center + self.n_halfwidth) as usize;
        let j = (m + self.m_halfwidth) as usize;
        i * self.m_len() + j
    }

    pub fn labels(&self, index: usize) -> (i64, i64) {
        let i = (index / self.m_len()) as i64;
        let j = (index % self.m_len()) as i64;
        (self.n_center - self.n_halfwidth + i, j - self.m_halfwidth)
    }

    fn check(&self, cutoff: usize) -> Result<()> {
        if self.n_halfwidth < 0 || self.m_halfwidth < 0 {
            return Err(invalid("window", "half-widths must be non-negative"));
        }
        let k = cutoff as i64;
        if 2 * self.n_halfwidth < k || 2 * self.m_halfwidth < k {
            return Err(Error::BasisTooNarrow {
                reason: format!(
                    "Floquet window ({}, {}) clips the drive cutoff {k}; need half-widths ≥ {}",
                    self.n_halfwidth,
                    self.m_halfwidth,
                    (k + 1) / 2
                ),
            });
        }
        Ok(())
    }
}

/// Physical parameters of the laboratory-frame drive.
#[derive(Clone, Debug)]
pub struct FloquetSpec {
    pub drive: DriveCoefficients<f64>,
    pub v: f64,
    pub lambda: f64,
    pub s: u32,
    pub omega: f64,
    pub alpha: f64,
}

impl FloquetSpec {
    pub fn new(drive: DriveCoefficients<f64>, v: f64, omega: f64, alpha: f64) -> Self {
        Self { drive, v, lambda: 0.0, s: 1, omega, alpha }
    }

    pub fn with_lattice(mut self, lambda: f64, s: u32) -> Self {
        self.lambda = lambda;
        self.s = s;
        self
    }

    /// Integer lab momentum `N₀ = α + ω + β` that carries rotating-frame
    /// harmonic zero.
    pub fn resonant_shift(&self) -> i64 {
        (self.alpha + self.omega + default_offset(self.alpha, self.omega)).round() as i64
    }

    pub fn offset(&self) -> f64 {
        default_offset(self.alpha, self.omega)
    }
}

/// Assembles `H_F` on `window`.
pub fn build_floquet(spec: &FloquetSpec, window: &FloquetBasisWindow) -> Result<Mat<C64>> {
    if !(spec.omega > 0.0) {
        return Err(invalid("omega", "drive frequency must be positive"));
    }
    if spec.lambda != 0.0 && spec.s == 0 {
        return Err(invalid("s", "lattice harmonic must be ≥ 1"));
    }
    window.check(spec.drive.cutoff())?;
    let dim = window.dimension();
    let mut h = Mat::<C64>::zeros(dim, dim);
    let k = spec.drive.cutoff() as i64;
    let quarter = 0.25 * spec.lambda;
    let s = spec.s as i64;
    for n in window.n_range() {
        for m in window.m_range() {
            let row = window.index(n, m);
            let kin = n as f64 - spec.alpha;
            h[(row, row)] = C64::new(0.5 * kin * kin + m as f64 * spec.omega, 0.0);
            if spec.v != 0.0 {
                for n2 in window.n_range().filter(|&n2| n2 != n) {
                    let g = sawtooth_coefficient::<f64>(n - n2) * spec.v;
                    let lo = (m - k).max(-window.m_halfwidth);
                    let hi = (m + k).min(window.m_halfwidth);
                    for m2 in lo..=hi {
                        let f = spec.drive.f.get(m - m2);
                        if f.re != 0.0 || f.im != 0.0 {
                            h[(row, window.index(n2, m2))] = g * f;
                        }
                    }
                }
            }
            if spec.lambda != 0.0 {
                for dn in [-s, s] {
                    for dm in [-s, s] {
                        let (n2, m2) = (n - dn, m - dm);
                        if window.n_range().contains(&n2) && window.m_range().contains(&m2) {
                            h[(row, window.index(n2, m2))] += C64::new(quarter, 0.0);
                        }
                    }
                }
            }
        }
    }
    Ok(h)
}

/// Folds `x` into `[e_ref, e_ref + ω)`.
pub fn fold(x: f64, e_ref: f64, omega: f64) -> f64 {
    let y = e_ref + (x - e_ref).rem_euclid(omega);
    // rem_euclid can round up to exactly ω
    if y >= e_ref + omega {
        e_ref
    } else {
        y
    }
}

/// Shortest distance between two quasienergies modulo `ω`.
pub fn circular_distance(a: f64, b: f64, omega: f64) -> f64 {
    let d = (a - b).rem_euclid(omega);
    d.min(omega - d)
}

/// Diagonalized Floquet Hamiltonian.
#[derive(Clone, Debug)]
pub struct QuasienergySpectrum {
    /// Ascending eigenvalues of the truncated `H_F`.
    pub raw: Vec<f64>,
    /// `raw` folded into `[e_ref, e_ref + ω)`, same order.
    pub folded: Vec<f64>,
    pub e_ref: f64,
    pub omega: f64,
    pub window: FloquetBasisWindow,
    pub vectors: Mat<C64>,
}

pub fn quasienergies(matrix: &Mat<C64>, window: &FloquetBasisWindow, omega: f64, e_ref: f64) -> Result<QuasienergySpectrum> {
    if matrix.nrows() != window.dimension() {
        return Err(invalid("matrix", "dimension does not match the window"));
    }
    let pairs = linalg::hermitian_eigen(matrix)?;
    let folded = pairs.values.iter().map(|&e| fold(e, e_ref, omega)).collect();
    Ok(QuasienergySpectrum {
        raw: pairs.values,
        folded,
        e_ref,
        omega,
        window: *window,
        vectors: pairs.vectors,
    })
}

impl QuasienergySpectrum {
    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    pub fn refolded(&self, e_ref: f64) -> Vec<f64> {
        self.raw.iter().map(|&e| fold(e, e_ref, self.omega)).collect()
    }

    /// Spatial amplitudes at `t = 0`: `Σ_m C_{n,m}` for each `n` in the window.
    pub fn spatial_amplitudes(&self, state: usize) -> Vec<C64> {
        let w = &self.window;
        w.n_range()
            .map(|n| w.m_range().map(|m| self.vectors[(w.index(n, m), state)]).sum())
            .collect()
    }

    /// Mean temporal shift `⟨m + n - n₀⟩` of a state; near an integer `q` for
    /// the copy displaced by `qω`.
    pub fn copy_index(&self, state: usize, n0: i64) -> f64 {
        (0..self.len())
            .map(|row| {
                let (n, m) = self.window.labels(row);
                self.vectors[(row, state)].norm_sqr() * (m + n - n0) as f64
            })
            .sum()
    }

    /// Normalized lab-frame density `|ψ(θ, 0)|²` on `grid`.
    pub fn density(&self, state: usize, grid: &[f64]) -> Vec<f64> {
        let amps = self.spatial_amplitudes(state);
        let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        let n_min = *self.window.n_range().start();
        grid.iter()
            .map(|&theta| {
                let z: C64 = amps
                    .iter()
                    .enumerate()
                    .map(|(i, a)| a * C64::from_polar(1.0, (n_min + i as i64) as f64 * theta))
                    .sum();
                z.norm_sqr() / (norm * std::f64::consts::TAU)
            })
            .collect()
    }
}
