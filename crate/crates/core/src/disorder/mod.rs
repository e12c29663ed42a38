//! Temporally disordered drives and the effective disorder they produce.
//!
//! The drive `f(t) = Σ_k f_k e^{ikωt}` has Fourier amplitudes tailored so that
//! the resonant products `c_k = g_k f_{-k}` with the sawtooth coefficients
//! `g_n` have the Gaussian magnitude
//! `|c_k| = exp(-k²/(2k0²)) / (√k0 π^{1/4})` and uniformly random phases.
//! The resulting ring potential `V Σ_k c_k e^{ikΘ}` has variance `V²` and
//! autocovariance `V² exp(-k0²Δ²/4)`.

mod io;
mod line;

pub use io::{read_coefficients, write_coefficients};
pub use line::{sample_autocovariance, synthesize_line_potential, LinePotential};

use num_complex::Complex;

use crate::error::{invalid, Error, Result};
use crate::num::Real;
use crate::rng;
use crate::series::HarmonicSeries;

/// Default harmonic cutoff in units of `k0`.
pub const DEFAULT_CUTOFF_FACTOR: f64 = 4.0;

/// Fourier coefficient `g_n` of the sawtooth `g(θ) = θ/π` on `[-π, π)`.
pub fn sawtooth_coefficient<T: Real>(n: i64) -> Complex<T> {
    if n == 0 {
        return Complex::new(T::zero(), T::zero());
    }
    let sign = if n % 2 == 0 { T::one() } else { -T::one() };
    Complex::new(T::zero(), sign / (T::PI() * T::from_index(n)))
}

/// Gaussian envelope `|g_k f_k|` of the resonant products.
pub fn envelope<T: Real>(k: i64, k0: T) -> T {
    if k == 0 {
        return T::zero();
    }
    let kk = T::from_index(k);
    (-(kk * kk) / (T::lit(2.0) * k0 * k0)).exp() / (k0.sqrt() * T::PI().powf(T::lit(0.25)))
}

/// Parameters of one disordered drive realization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriveSpec<T> {
    pub k0: T,
    pub cutoff: usize,
    pub seed: u64,
}

impl<T: Real> DriveSpec<T> {
    /// Spec with the default cutoff `ceil(4·k0)`.
    pub fn new(k0: T, seed: u64) -> Self {
        let cutoff = (k0 * T::lit(DEFAULT_CUTOFF_FACTOR)).ceil().to_usize().unwrap_or(1).max(1);
        Self { k0, cutoff, seed }
    }

    pub fn with_cutoff(mut self, cutoff: usize) -> Self {
        self.cutoff = cutoff;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k0 > T::zero()) || !self.k0.is_finite() {
            return Err(invalid("k0", format!("must be positive, got {}", self.k0)));
        }
        if self.cutoff < 1 {
            return Err(invalid("cutoff", "must be at least 1"));
        }
        Ok(())
    }

    /// Weight of the envelope power `Σ exp(-k²/k0²)` lost beyond the cutoff.
    pub fn truncation_error(&self) -> T {
        let k0 = self.k0;
        let weight = |k: i64| {
            let kk = T::from_index(k);
            (-(kk * kk) / (k0 * k0)).exp()
        };
        let far = (self.cutoff as i64 + (k0 * T::lit(40.0)).to_i64().unwrap_or(0) + 10).max(self.cutoff as i64 + 10);
        let kept: T = (1..=self.cutoff as i64).map(weight).sum();
        let lost: T = (self.cutoff as i64 + 1..=far).map(weight).sum();
        lost / (kept + lost)
    }
}

/// Amplitudes `f_k` of the periodic drive, `k ∈ [-K, K]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DriveCoefficients<T> {
    pub k0: T,
    pub seed: u64,
    pub f: HarmonicSeries<T>,
}

impl<T: Real> DriveCoefficients<T> {
    pub fn cutoff(&self) -> usize {
        self.f.cutoff()
    }

    /// `f(t)` at drive phase `ωt`.
    pub fn eval(&self, phase: T) -> T {
        self.f.eval_real(phase)
    }
}

/// Resonant products `c_k = g_k f_{-k}` entering the effective potential.
#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveDisorderCoefficients<T> {
    pub k0: T,
    pub c: HarmonicSeries<T>,
}

impl<T: Real> EffectiveDisorderCoefficients<T> {
    pub fn cutoff(&self) -> usize {
        self.c.cutoff()
    }

    /// Unit-strength potential `Σ_k c_k e^{ikΘ}` at one point.
    pub fn unit_potential(&self, theta: T) -> T {
        self.c.eval_real(theta)
    }
}

/// Draws the drive amplitudes: `f_k = E(k)/|g_k| · e^{iφ_k}` with `φ_k`
/// uniform on `[0, 2π)` from the stream `(seed, k)`.
pub fn synthesize_drive<T: Real>(spec: &DriveSpec<T>) -> Result<DriveCoefficients<T>> {
    spec.validate()?;
    let mut f = HarmonicSeries::zeros(spec.cutoff);
    for k in 1..=spec.cutoff as i64 {
        let phase = T::TAU() * T::lit(rng::uniform_at(spec.seed, k as u64));
        let magnitude = envelope(k, spec.k0) / sawtooth_coefficient::<T>(k).norm();
        let fk = Complex::from_polar(magnitude, phase);
        f.set(k, fk);
        f.set(-k, fk.conj());
    }
    Ok(DriveCoefficients { k0: spec.k0, seed: spec.seed, f })
}

/// Forms `c_k = g_k f_{-k}`. The magnitude is taken from the envelope and the
/// phase from the product, so `|c_k|` is a deterministic function of `k, k0`.
pub fn effective_coefficients<T: Real>(drive: &DriveCoefficients<T>) -> EffectiveDisorderCoefficients<T> {
    let cutoff = drive.cutoff();
    let mut c = HarmonicSeries::zeros(cutoff);
    for k in 1..=cutoff as i64 {
        let product = sawtooth_coefficient::<T>(k) * drive.f.get(-k);
        let ck = Complex::from_polar(envelope(k, drive.k0), product.arg());
        c.set(k, ck);
        c.set(-k, ck.conj());
    }
    EffectiveDisorderCoefficients { k0: drive.k0, c }
}

/// Convenience: drive and effective coefficients for realization `index` of
/// an ensemble rooted at `spec.seed`.
pub fn realization<T: Real>(
    spec: &DriveSpec<T>,
    index: u64,
) -> Result<(DriveCoefficients<T>, EffectiveDisorderCoefficients<T>)> {
    let drive = synthesize_drive(&spec.with_seed(rng::realization_seed(spec.seed, index)))?;
    let c = effective_coefficients(&drive);
    Ok((drive, c))
}

/// Samples `V Σ_k c_k e^{ikΘ}` on `grid`, failing if the sum is not real.
pub fn potential_on_grid<T: Real>(c: &EffectiveDisorderCoefficients<T>, v: T, grid: &[T]) -> Result<Vec<T>> {
    let tol = T::realness_tolerance() * v.abs().max(T::min_positive_value());
    grid.iter()
        .map(|&theta| {
            let z = c.c.eval_complex(theta) * v;
            if z.im.abs() > tol {
                return Err(Error::Invariant {
                    invariant: "real potential",
                    detail: format!("imaginary residue {} at Θ={theta}", z.im),
                });
            }
            Ok(z.re)
        })
        .collect()
}
