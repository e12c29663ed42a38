//! Leading non-secular correction to the effective Hamiltonian.
//!
//! With `A_m(Θ) = Σ_n n g_n f_{m-n} e^{inΘ}` the correction is a sum over the
//! off-resonant drive harmonics `m ≠ 0` weighted by `1/m²`, suppressed by
//! `V²/ω²`. The sawtooth is truncated at the drive cutoff, so `|n| ≤ K` and
//! `|m| ≤ 2K`.

use num_complex::Complex64 as C64;

use crate::disorder::{sawtooth_coefficient, DriveCoefficients};
use crate::series::HarmonicSeries;

/// How the two factors of each `m` term are paired.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CorrectionForm {
    /// `-(V²/2ω²) Σ_{m≠0} A_m²/m²`, squaring each factor literally.
    Squared,
    /// `-(V²/2ω²) Σ_{m≠0} A_m A_{-m}/m² = (V²/2ω²) Σ_{m≠0} |A_m|²/m²`, the
    /// form produced by the high-frequency expansion.
    #[default]
    Paired,
}

/// Correction potential in harmonics and on a grid.
#[derive(Clone, Debug)]
pub struct SecondOrderCorrection {
    /// Harmonics up to twice the drive cutoff; Hermitian.
    pub harmonics: HarmonicSeries<f64>,
    pub grid: Vec<f64>,
    pub samples: Vec<f64>,
    pub omega: f64,
    pub v: f64,
    pub form: CorrectionForm,
}

impl SecondOrderCorrection {
    pub fn rms(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        (self.samples.iter().map(|x| x * x).sum::<f64>() / self.samples.len() as f64).sqrt()
    }

    pub fn at(&self, theta: f64) -> f64 {
        self.harmonics.eval_real(theta)
    }
}

/// Harmonics `a_{m,n} = n g_n f_{m-n}` of `A_m`, for `|n| ≤ K`.
fn amplitude(drive: &DriveCoefficients<f64>, m: i64) -> HarmonicSeries<f64> {
    let k = drive.cutoff();
    HarmonicSeries::from_fn(k, |n| sawtooth_coefficient::<f64>(n) * n as f64 * drive.f.get(m - n))
}

/// Evaluates the correction in the default [`CorrectionForm::Paired`] form.
pub fn second_order_correction(
    drive: &DriveCoefficients<f64>,
    v: f64,
    omega: f64,
    grid: &[f64],
) -> SecondOrderCorrection {
    second_order_correction_with(drive, v, omega, grid, CorrectionForm::default())
}

pub fn second_order_correction_with(
    drive: &DriveCoefficients<f64>,
    v: f64,
    omega: f64,
    grid: &[f64],
    form: CorrectionForm,
) -> SecondOrderCorrection {
    let k = drive.cutoff() as i64;
    let mut out = HarmonicSeries::zeros(2 * k as usize);
    if v != 0.0 {
        let prefactor = -v * v / (2.0 * omega * omega);
        let mut acc = vec![C64::new(0.0, 0.0); (4 * k + 1) as usize];
        for m in (-2 * k..=2 * k).filter(|&m| m != 0) {
            let a = amplitude(drive, m);
            let b = match form {
                CorrectionForm::Squared => a.clone(),
                CorrectionForm::Paired => amplitude(drive, -m),
            };
            let w = 1.0 / (m * m) as f64;
            for (n, an) in a.iter().filter(|(_, z)| z.norm_sqr() > 0.0) {
                for (n2, bn) in b.iter() {
                    acc[(n + n2 + 2 * k) as usize] += an * bn * w;
                }
            }
        }
        for (i, z) in acc.into_iter().enumerate() {
            out.set(i as i64 - 2 * k, z * prefactor);
        }
        // the ±m pairs make the sum Hermitian; drop rounding asymmetry
        for q in 0..=2 * k {
            let sym = 0.5 * (out.get(q) + out.get(-q).conj());
            out.set(q, sym);
            out.set(-q, sym.conj());
        }
    }
    let samples = grid.iter().map(|&t| out.eval_real(t)).collect();
    SecondOrderCorrection {
        harmonics: out,
        grid: grid.to_vec(),
        samples,
        omega,
        v,
        form,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disorder::{synthesize_drive, DriveSpec};
    use crate::num::ring_grid;

    fn drive() -> DriveCoefficients<f64> {
        synthesize_drive(&DriveSpec::new(3.0, 17)).unwrap()
    }

    /// Direct pointwise evaluation of every `A_m(Θ)` followed by the `m` sum.
    fn brute(drive: &DriveCoefficients<f64>, v: f64, omega: f64, theta: f64, form: CorrectionForm) -> C64 {
        let k = drive.cutoff() as i64;
        let a = |m: i64| -> C64 {
            (-k..=k)
                .map(|n| {
                    let g = C64::new(0.0, if n == 0 { 0.0 } else { (-1f64).powi(n as i32) / (std::f64::consts::PI * n as f64) });
                    g * n as f64 * drive.f.get(m - n) * C64::from_polar(1.0, n as f64 * theta)
                })
                .sum()
        };
        let mut total = C64::new(0.0, 0.0);
        for m in -2 * k..=2 * k {
            if m == 0 {
                continue;
            }
            let second = match form {
                CorrectionForm::Squared => a(m),
                CorrectionForm::Paired => a(-m),
            };
            total += a(m) * second / (m * m) as f64;
        }
        total * (-v * v / (2.0 * omega * omega))
    }

    #[test]
    fn zero_without_disorder() {
        let c = second_order_correction(&drive(), 0.0, 50.0, &ring_grid(32));
        assert!(c.samples.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn matches_pointwise_sum() {
        let d = drive();
        let grid = ring_grid(64);
        for form in [CorrectionForm::Squared, CorrectionForm::Paired] {
            let c = second_order_correction_with(&d, 2.0, 40.0, &grid, form);
            let reference: Vec<C64> = grid.iter().map(|&t| brute(&d, 2.0, 40.0, t, form)).collect();
            for (x, r) in c.samples.iter().zip(&reference) {
                // the ±m pairing leaves the pointwise sum real
                assert!(r.im.abs() < 1e-12 * r.norm().max(1e-6));
                assert!((x - r.re).abs() < 1e-10 * r.re.abs().max(1e-6));
            }
        }
    }

    #[test]
    fn paired_form_is_nonnegative() {
        let c = second_order_correction_with(&drive(), 1.0, 10.0, &ring_grid(128), CorrectionForm::Paired);
        assert!(c.samples.iter().all(|&x| x >= -1e-14));
    }

    #[test]
    fn inverse_square_in_frequency() {
        let d = drive();
        let grid = ring_grid(48);
        let a = second_order_correction(&d, 3.0, 25.0, &grid);
        let b = second_order_correction(&d, 3.0, 50.0, &grid);
        for (x, y) in a.samples.iter().zip(&b.samples) {
            assert!((y - x / 4.0).abs() <= 1e-14 * x.abs().max(1e-300));
        }
        assert!((b.rms() / a.rms() - 0.25).abs() < 1e-12);
    }
}
