//! Transfer-matrix Lyapunov exponent of `-ψ''/2 + U ψ = Ẽ ψ`.

use rayon::prelude::*;

use super::born::{born_xi, BornInput};
use crate::disorder::{synthesize_line_potential, LinePotential};
use crate::error::{invalid, Error, Result};
use crate::num::{mean, variance, Real};
use crate::rng;

pub const DEFAULT_RENORM_EVERY: usize = 64;

/// Amplitude growth rate `ln‖(ψ_N, ψ_{N-1})‖ / (N h)` for one potential.
///
/// Uses the three-point recursion `ψ_{j+1} = 2ψ_j - ψ_{j-1} + 2h²(U_j - Ẽ)ψ_j`
/// and rescales the pair every `renorm_every` steps.
pub fn lyapunov_exponent<T: Real>(samples: &[T], h: T, energy: T, renorm_every: usize) -> T {
    if samples.is_empty() {
        return T::zero();
    }
    let renorm_every = renorm_every.max(1);
    let two = T::lit(2.0);
    let scale = two * h * h;
    let (mut cur, mut prev) = (T::one(), T::one());
    let mut log_norm = T::zero();
    for (j, &u) in samples.iter().enumerate() {
        let next = two * cur - prev + scale * (u - energy) * cur;
        prev = cur;
        cur = next;
        if (j + 1) % renorm_every == 0 {
            let norm = cur.hypot(prev);
            log_norm += norm.ln();
            cur /= norm;
            prev /= norm;
        }
    }
    log_norm += cur.hypot(prev).ln();
    log_norm / (h * T::from_usize(samples.len()).unwrap())
}

/// Ensemble estimate of the amplitude Lyapunov exponent.
#[derive(Clone, Debug, PartialEq)]
pub struct LyapunovEstimate<T> {
    /// Mean amplitude exponent over realizations (inverse length).
    pub gamma: T,
    /// Standard error of `gamma` from the across-realization spread.
    pub stderr: T,
    /// Density decay length `1/(2γ)`.
    pub xi: T,
    pub xi_stderr: T,
    pub energy: T,
    pub realizations: usize,
    pub length: T,
    pub h: T,
    pub per_realization: Vec<T>,
    pub warnings: Vec<String>,
}

fn check_resolution<T: Real>(h: T, k0: T, energy: T) -> Result<()> {
    let zeta = T::SQRT_2() / k0;
    if h > zeta / T::lit(10.0) {
        return Err(Error::UnderResolved {
            step: h.to_f64_lossy(),
            limit: (zeta / T::lit(10.0)).to_f64_lossy(),
            what: "disorder correlation length ζ/10",
        });
    }
    if energy != T::zero() {
        let wavelength = T::TAU() / (T::lit(2.0) * energy.abs()).sqrt();
        if h > wavelength / T::lit(10.0) {
            return Err(Error::UnderResolved {
                step: h.to_f64_lossy(),
                limit: (wavelength / T::lit(10.0)).to_f64_lossy(),
                what: "de Broglie wavelength / 10",
            });
        }
    }
    Ok(())
}

fn summarize<T: Real>(gammas: Vec<T>, energy: T, length: T, h: T, mut warnings: Vec<String>) -> LyapunovEstimate<T> {
    let n = gammas.len();
    let gamma = mean(&gammas).unwrap_or(T::zero());
    let stderr = variance(&gammas)
        .map(|v| (v / T::from_usize(n).unwrap()).sqrt())
        .unwrap_or(T::zero());
    let two = T::lit(2.0);
    if gamma <= T::zero() {
        warnings.push("non-positive Lyapunov exponent: extended or under-sampled".into());
    }
    LyapunovEstimate {
        gamma,
        stderr,
        xi: T::one() / (two * gamma),
        xi_stderr: stderr / (two * gamma * gamma),
        energy,
        realizations: n,
        length,
        h,
        per_realization: gammas,
        warnings,
    }
}

fn length_warning<T: Real>(k0: T, v: T, energy: T, length: T) -> Option<String> {
    if v == T::zero() || energy <= T::zero() {
        return None;
    }
    let predicted = born_xi(&BornInput { energy, k0, v }).ok()?.xi;
    (length < T::lit(50.0) * predicted)
        .then(|| format!("line length {length} < 50 × predicted ξ ({predicted}); estimate is biased"))
}

/// Lyapunov estimate over already synthesized potentials sharing `h`.
pub fn lyapunov<T: Real>(potentials: &[LinePotential<T>], energy: T) -> Result<LyapunovEstimate<T>> {
    let first = potentials.first().ok_or_else(|| invalid("potentials", "need at least one realization"))?;
    check_resolution(first.h, first.k0, energy)?;
    if potentials.iter().any(|p| p.h != first.h) {
        return Err(invalid("potentials", "realizations must share the grid step"));
    }
    let gammas = potentials
        .par_iter()
        .map(|p| lyapunov_exponent(&p.samples, p.h, energy, DEFAULT_RENORM_EVERY))
        .collect();
    let warnings = length_warning(first.k0, first.v, energy, first.length).into_iter().collect();
    Ok(summarize(gammas, energy, first.length, first.h, warnings))
}

/// Transfer-matrix run that synthesizes its own line realizations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferMatrixRun<T> {
    pub k0: T,
    pub v: T,
    pub length: T,
    pub h: T,
    pub realizations: usize,
    pub seed: u64,
    pub renorm_every: usize,
}

impl<T: Real> TransferMatrixRun<T> {
    /// Run with `h = ζ/10` and a line of `length`.
    pub fn new(k0: T, v: T, length: T, realizations: usize, seed: u64) -> Self {
        Self {
            k0,
            v,
            length,
            h: T::SQRT_2() / k0 / T::lit(10.0),
            realizations,
            seed,
            renorm_every: DEFAULT_RENORM_EVERY,
        }
    }

    pub fn estimate(&self, energy: T) -> Result<LyapunovEstimate<T>> {
        if self.realizations == 0 {
            return Err(invalid("realizations", "must be at least 1"));
        }
        check_resolution(self.h, self.k0, energy)?;
        // realizations are addressed by index, so the reduction order is fixed
        let gammas = (0..self.realizations as u64)
            .into_par_iter()
            .map(|r| {
                let p = synthesize_line_potential(self.k0, self.v, self.length, self.h, rng::realization_seed(self.seed, r))?;
                Ok(lyapunov_exponent(&p.samples, p.h, energy, self.renorm_every))
            })
            .collect::<Result<Vec<T>>>()?;
        let warnings = length_warning(self.k0, self.v, energy, self.length).into_iter().collect();
        Ok(summarize(gammas, energy, self.length, self.h, warnings))
    }
}
