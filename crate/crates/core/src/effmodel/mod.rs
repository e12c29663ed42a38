//! Secular effective Hamiltonians in the rotating frame.
//!
//! In the plane-wave basis `e^{i(n+β)Θ}` the model
//!
//! ```text
//! H = μ P²/2 + (λ/2) cos(sΘ) + V Σ_k c_k e^{ikΘ} + ω²/2
//! ```
//!
//! has diagonal `μ(n+β)²/2 + ω²/2` and couplings `V c_{n-n'}` plus `λ/4` at
//! `|n - n'| = s`. The offset `β` is the fractional part of the rotating-frame
//! momentum left over once the lab momentum is integer on the ring.

mod correction;

pub use correction::{second_order_correction, second_order_correction_with, CorrectionForm, SecondOrderCorrection};

use faer::Mat;

use crate::disorder::EffectiveDisorderCoefficients;
use crate::error::{invalid, Error, Result};
use crate::linalg::{self, C64};
use crate::num::wrap_angle;
use crate::series::HarmonicSeries;

/// Offset `β = -frac(α + ω) mod 1`, snapped to 0 when within 1e-9 of an integer.
pub fn default_offset(alpha: f64, omega: f64) -> f64 {
    let beta = (-(alpha + omega)).rem_euclid(1.0);
    if beta < 1e-9 || 1.0 - beta < 1e-9 {
        0.0
    } else {
        beta
    }
}

/// All parameters of one effective Hamiltonian instance.
#[derive(Clone, Debug)]
pub struct EffectiveModelSpec {
    /// Kinetic coefficient `μ = H₀''(J₀)`; 1 for the free particle on a ring.
    pub mass: f64,
    pub v: f64,
    pub lambda: f64,
    pub s: u32,
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
    pub coefficients: EffectiveDisorderCoefficients<f64>,
}

impl EffectiveModelSpec {
    pub fn new(coefficients: EffectiveDisorderCoefficients<f64>, v: f64, omega: f64, alpha: f64) -> Self {
        Self {
            mass: 1.0,
            v,
            lambda: 0.0,
            s: 1,
            omega,
            alpha,
            beta: default_offset(alpha, omega),
            coefficients,
        }
    }

    pub fn with_lattice(mut self, lambda: f64, s: u32) -> Self {
        self.lambda = lambda;
        self.s = s;
        self
    }

    pub fn with_mass(mut self, mass: f64) -> Self {
        self.mass = mass;
        self
    }

    pub fn with_offset(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0) {
            return Err(invalid("mass", "kinetic coefficient must be positive"));
        }
        if self.lambda != 0.0 && self.s == 0 {
            return Err(invalid("s", "lattice harmonic must be ≥ 1"));
        }
        if !(0.0..1.0).contains(&self.beta) {
            return Err(invalid("beta", format!("offset must lie in [0, 1), got {}", self.beta)));
        }
        Ok(())
    }

    /// Potential energy (without `ω²/2`) at `Θ`.
    pub fn potential(&self, theta: f64) -> f64 {
        let lattice = if self.lambda != 0.0 {
            0.5 * self.lambda * (self.s as f64 * theta).cos()
        } else {
            0.0
        };
        lattice + self.v * self.coefficients.unit_potential(theta)
    }
}

/// Harmonic window `n ∈ [n_min, n_max]` of the basis `e^{i(n+β)Θ}/√(2π)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneWaveBasis {
    pub n_min: i64,
    pub n_max: i64,
    pub beta: f64,
}

impl PlaneWaveBasis {
    pub fn new(n_min: i64, n_max: i64, beta: f64) -> Self {
        assert!(n_max >= n_min, "empty basis");
        Self { n_min, n_max, beta }
    }

    pub fn centered(halfwidth: i64, beta: f64) -> Self {
        Self::new(-halfwidth, halfwidth, beta)
    }

    pub fn len(&self) -> usize {
        (self.n_max - self.n_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn harmonic(&self, index: usize) -> i64 {
        self.n_min + index as i64
    }

    pub fn index_of(&self, n: i64) -> Option<usize> {
        (self.n_min..=self.n_max).contains(&n).then(|| (n - self.n_min) as usize)
    }

    /// Window enlarged about its centre by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let centre = (self.n_min + self.n_max) as f64 / 2.0;
        let half = (self.n_max - self.n_min) as f64 / 2.0 * factor;
        Self::new((centre - half).floor() as i64, (centre + half).ceil() as i64, self.beta)
    }
}

/// Assembled matrix together with the data needed to interpret its spectrum.
#[derive(Clone, Debug)]
pub struct EffectiveHamiltonian {
    pub matrix: Mat<C64>,
    pub basis: PlaneWaveBasis,
    pub omega: f64,
}

/// Builds the effective Hamiltonian on `basis`.
pub fn build_matrix(spec: &EffectiveModelSpec, basis: &PlaneWaveBasis) -> Result<EffectiveHamiltonian> {
    build_matrix_with(spec, basis, None)
}

/// As [`build_matrix`], adding an extra real potential given by its harmonics
/// (used for the second-order correction).
pub fn build_matrix_with(
    spec: &EffectiveModelSpec,
    basis: &PlaneWaveBasis,
    extra: Option<&HarmonicSeries<f64>>,
) -> Result<EffectiveHamiltonian> {
    spec.validate()?;
    if (spec.beta - basis.beta).abs() > 0.0 {
        return Err(invalid("basis", "basis offset differs from the model offset"));
    }
    let cutoff = spec.coefficients.cutoff() as i64;
    if spec.v != 0.0 && basis.n_max - basis.n_min < cutoff {
        return Err(Error::BasisTooNarrow {
            reason: format!(
                "window [{}, {}] is narrower than the disorder cutoff {cutoff}",
                basis.n_min, basis.n_max
            ),
        });
    }
    let dim = basis.len();
    let shift = 0.5 * spec.omega * spec.omega;
    let quarter = 0.25 * spec.lambda;
    let s = spec.s as i64;
    let matrix = Mat::from_fn(dim, dim, |i, j| {
        let d = i as i64 - j as i64;
        if d == 0 {
            let p = basis.harmonic(i) as f64 + basis.beta;
            let extra0 = extra.map_or(0.0, |e| e.get(0).re);
            return C64::new(0.5 * spec.mass * p * p + shift + extra0, 0.0);
        }
        let mut z = spec.coefficients.c.get(d) * spec.v;
        if spec.lambda != 0.0 && d.abs() == s {
            z += C64::new(quarter, 0.0);
        }
        if let Some(e) = extra {
            z += e.get(d);
        }
        z
    });
    Ok(EffectiveHamiltonian { matrix, basis: *basis, omega: spec.omega })
}

/// Eigenpairs of an effective Hamiltonian.
#[derive(Clone, Debug)]
pub struct EigenSolution {
    /// Ascending absolute energies (including `ω²/2`).
    pub energies: Vec<f64>,
    /// `Ẽ = E - ω²/2`.
    pub shifted: Vec<f64>,
    /// Column `i` holds the basis coefficients of state `i`.
    pub vectors: Mat<C64>,
    pub basis: PlaneWaveBasis,
    pub omega: f64,
}

pub fn diagonalize(h: &EffectiveHamiltonian) -> Result<EigenSolution> {
    let pairs = linalg::hermitian_eigen(&h.matrix)?;
    let shift = 0.5 * h.omega * h.omega;
    Ok(EigenSolution {
        shifted: pairs.values.iter().map(|e| e - shift).collect(),
        energies: pairs.values,
        vectors: pairs.vectors,
        basis: h.basis,
        omega: h.omega,
    })
}

impl EigenSolution {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn coefficients(&self, state: usize) -> Vec<C64> {
        (0..self.vectors.nrows()).map(|r| self.vectors[(r, state)]).collect()
    }

    /// `|ψ(Θ)|²` in the rotating frame, normalized so `∫ |ψ|² dΘ = 1`.
    pub fn density_at(&self, state: usize, theta: f64) -> f64 {
        let step = C64::from_polar(1.0, theta);
        let mut phase = C64::from_polar(1.0, self.basis.n_min as f64 * theta);
        let mut acc = C64::new(0.0, 0.0);
        for r in 0..self.vectors.nrows() {
            acc += self.vectors[(r, state)] * phase;
            phase *= step;
        }
        acc.norm_sqr() / std::f64::consts::TAU
    }

    pub fn density(&self, state: usize, grid: &[f64]) -> Vec<f64> {
        grid.iter().map(|&t| self.density_at(state, t)).collect()
    }

    /// Indices of states with `lo ≤ Ẽ < hi`.
    pub fn shell(&self, lo: f64, hi: f64) -> Vec<usize> {
        (0..self.len()).filter(|&i| (lo..hi).contains(&self.shifted[i])).collect()
    }

    /// Weight of state `state` on the outermost `edge` harmonics of each side.
    pub fn edge_weight(&self, state: usize, edge: usize) -> f64 {
        let n = self.vectors.nrows();
        let edge = edge.min(n / 2);
        (0..edge)
            .chain(n - edge..n)
            .map(|r| self.vectors[(r, state)].norm_sqr())
            .sum()
    }
}

/// Laboratory-frame density at fixed `θ` versus time: `|ψ(θ - ωt)|²`.
pub fn lab_frame_series(solution: &EigenSolution, state: usize, theta_fixed: f64, times: &[f64]) -> Vec<f64> {
    times
        .iter()
        .map(|&t| solution.density_at(state, wrap_angle(theta_fixed - solution.omega * t)))
        .collect()
}
