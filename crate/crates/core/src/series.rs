//! Truncated Fourier series indexed by signed harmonic number.

use num_complex::Complex;

use crate::num::Real;

/// Complex coefficients `a_k` for `k ∈ [-cutoff, cutoff]`; zero outside.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicSeries<T> {
    cutoff: usize,
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> HarmonicSeries<T> {
    pub fn zeros(cutoff: usize) -> Self {
        Self {
            cutoff,
            coeffs: vec![Complex::new(T::zero(), T::zero()); 2 * cutoff + 1],
        }
    }

    /// Builds a series from `f(k)` for every retained harmonic.
    pub fn from_fn(cutoff: usize, mut f: impl FnMut(i64) -> Complex<T>) -> Self {
        let k = cutoff as i64;
        Self {
            cutoff,
            coeffs: (-k..=k).map(&mut f).collect(),
        }
    }

    #[inline]
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Coefficient of harmonic `k`, zero beyond the cutoff.
    #[inline]
    pub fn get(&self, k: i64) -> Complex<T> {
        if k.unsigned_abs() as usize > self.cutoff {
            Complex::new(T::zero(), T::zero())
        } else {
            self.coeffs[(k + self.cutoff as i64) as usize]
        }
    }

    #[inline]
    pub fn set(&mut self, k: i64, value: Complex<T>) {
        assert!(k.unsigned_abs() as usize <= self.cutoff, "harmonic {k} beyond cutoff");
        self.coeffs[(k + self.cutoff as i64) as usize] = value;
    }

    /// `(k, a_k)` pairs in ascending `k`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex<T>)> + '_ {
        let k0 = self.cutoff as i64;
        self.coeffs.iter().enumerate().map(move |(i, &c)| (i as i64 - k0, c))
    }

    /// Largest `|a_{-k} - conj(a_k)|` over the series.
    pub fn hermitian_defect(&self) -> T {
        (0..=self.cutoff as i64)
            .map(|k| (self.get(-k) - self.get(k).conj()).norm())
            .fold(T::zero(), T::max)
    }

    /// Evaluates `Σ_k a_k e^{ikx}` as a complex number.
    pub fn eval_complex(&self, x: T) -> Complex<T> {
        // walk e^{ikx} by repeated rotation from both ends
        let step = Complex::new(x.cos(), x.sin());
        let mut up = Complex::new(T::one(), T::zero());
        let mut acc = self.get(0);
        for k in 1..=self.cutoff as i64 {
            up = up * step;
            acc = acc + self.get(k) * up + self.get(-k) * up.conj();
        }
        acc
    }

    /// Evaluates the real part of `Σ_k a_k e^{ikx}`; exact for Hermitian series.
    pub fn eval_real(&self, x: T) -> T {
        self.eval_complex(x).re
    }

    /// Series of the derivative `d/dx`, i.e. `i k a_k`.
    pub fn derivative(&self) -> Self {
        Self::from_fn(self.cutoff, |k| self.get(k) * Complex::new(T::zero(), T::from_index(k)))
    }

    /// Copy truncated (or zero-padded) to a new cutoff.
    pub fn truncated(&self, cutoff: usize) -> Self {
        Self::from_fn(cutoff, |k| self.get(k))
    }

    /// `Σ_k |a_k|²`.
    pub fn power(&self) -> T {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn out_of_range_is_zero() {
        let s = HarmonicSeries::<f64>::from_fn(2, |k| Complex::new(k as f64, 0.0));
        assert_eq!(s.get(3), Complex::new(0.0, 0.0));
        assert_eq!(s.get(-2), Complex::new(-2.0, 0.0));
    }

    #[test]
    fn cosine_series_evaluates() {
        let mut s = HarmonicSeries::<f64>::zeros(3);
        s.set(3, Complex::new(0.5, 0.0));
        s.set(-3, Complex::new(0.5, 0.0));
        for &x in &[0.0, 0.3, -2.0] {
            assert!((s.eval_real(x) - (3.0 * x).cos()).abs() < 1e-14);
        }
        assert_eq!(s.hermitian_defect(), 0.0);
    }
}
