//! Gaussian-correlated disorder on a long line for transfer-matrix runs.

use num_complex::Complex;
use rand::Rng;
use rustfft::FftPlanner;

use crate::error::{invalid, Error, Result};
use crate::num::Real;
use crate::rng;

/// Sampled potential `U(x_j)`, `x_j = j·h`, periodic over `length`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinePotential<T> {
    pub samples: Vec<T>,
    pub h: T,
    pub length: T,
    pub v: T,
    pub k0: T,
    pub seed: u64,
}

impl<T: Real> LinePotential<T> {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn correlation_length(&self) -> T {
        T::SQRT_2() / self.k0
    }
}

/// Smallest `2^a 3^b ≥ n`.
fn smooth_size(n: usize) -> usize {
    let mut best = usize::MAX;
    let mut p3 = 1usize;
    while p3 < 2 * n.max(1) {
        let mut m = p3;
        while m < n {
            m *= 2;
        }
        best = best.min(m);
        p3 *= 3;
    }
    best
}

/// Spectral synthesis of a line potential with autocovariance
/// `V² exp(-k0²Δ²/4)`.
///
/// Modes sit at `k_j = 2πj/L` with amplitudes following the Gaussian power
/// spectrum and independent uniform phases; the grid size is rounded up to a
/// 3-smooth FFT length, so the returned `length` may exceed the request.
pub fn synthesize_line_potential<T: Real>(k0: T, v: T, length: T, h: T, seed: u64) -> Result<LinePotential<T>> {
    if !(k0 > T::zero()) {
        return Err(invalid("k0", "must be positive"));
    }
    if !(h > T::zero()) || !(length > h) {
        return Err(invalid("length", "need 0 < h < length"));
    }
    let zeta = T::SQRT_2() / k0;
    if h > zeta / T::lit(2.0) {
        return Err(Error::UnderResolved {
            step: h.to_f64_lossy(),
            limit: (zeta / T::lit(2.0)).to_f64_lossy(),
            what: "disorder correlation length ζ/2",
        });
    }
    if h > zeta / T::lit(10.0) {
        log::warn!("line potential step h={h} is coarser than ζ/10={}", zeta / T::lit(10.0));
    }
    if length < zeta * T::lit(100.0) {
        log::warn!("line potential length {length} is shorter than 100ζ");
    }

    let n = smooth_size((length / h).ceil().to_usize().ok_or_else(|| invalid("length", "grid too large"))?);
    let n = n.max(4);
    let total = h * T::from_usize(n).unwrap();
    let zero = Complex::new(T::zero(), T::zero());
    let mut spectrum = vec![zero; n];

    if v != T::zero() {
        let dk = T::TAU() / total;
        // Σ_j 2A_j² cos(k_jΔ) is a Riemann sum of the Gaussian spectral integral
        let norm = v * (dk / (k0 * T::PI().sqrt())).sqrt();
        let mut phases = rng::stream(seed, 0);
        for j in 1..n.div_ceil(2) {
            let k = dk * T::from_usize(j).unwrap();
            let amp = norm * (-(k * k) / (T::lit(2.0) * k0 * k0)).exp();
            let phi = T::TAU() * T::lit(phases.gen::<f64>());
            let z = Complex::from_polar(amp, phi);
            spectrum[j] = z;
            spectrum[n - j] = z.conj();
        }
        FftPlanner::new().plan_fft_inverse(n).process(&mut spectrum);
    }

    let rms = {
        let s: T = spectrum.iter().map(|z| z.re * z.re).sum();
        (s / T::from_usize(n).unwrap()).sqrt()
    };
    let tol = T::realness_tolerance() * rms.max(T::min_positive_value());
    if let Some(z) = spectrum.iter().find(|z| z.im.abs() > tol) {
        return Err(Error::Invariant {
            invariant: "real potential",
            detail: format!("imaginary residue {} (rms {rms})", z.im),
        });
    }

    Ok(LinePotential {
        samples: spectrum.into_iter().map(|z| z.re).collect(),
        h,
        length: total,
        v,
        k0,
        seed,
    })
}

/// Periodic sample autocovariance `⟨U_j U_{j+lag}⟩` (zero-mean assumed).
pub fn sample_autocovariance<T: Real>(samples: &[T], lag: usize) -> T {
    let n = samples.len();
    if n == 0 {
        return T::zero();
    }
    let s: T = (0..n).map(|j| samples[j] * samples[(j + lag) % n]).sum();
    s / T::from_usize(n).unwrap()
}
