use crate::error::{invalid, Result};
use crate::num::Real;

/// Energy above the potential mean together with the disorder parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BornInput<T> {
    pub energy: T,
    pub k0: T,
    pub v: T,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BornEstimate<T> {
    /// Localization length `(k0 Ẽ / √π V²) exp(8Ẽ/k0²)`.
    pub xi: T,
    /// Correlation length `ζ = √2/k0`.
    pub zeta: T,
    /// Correlation energy `E_ζ = 1/ζ² = k0²/2`.
    pub correlation_energy: T,
    /// Weak-scattering indicator `V²/(Ẽ E_ζ)`; Born needs it ≪ 1.
    pub indicator: T,
}

impl<T: Real> BornEstimate<T> {
    /// Quantum-regime form `ζ √(2/π) E_ζ Ẽ / V²`, i.e. without the exponential.
    pub fn quantum_limit(&self, input: &BornInput<T>) -> T {
        self.zeta * (T::lit(2.0) / T::PI()).sqrt() * self.correlation_energy * input.energy / (input.v * input.v)
    }
}

/// Born-approximation localization length for the Gaussian-correlated potential.
pub fn born_xi<T: Real>(input: &BornInput<T>) -> Result<BornEstimate<T>> {
    let BornInput { energy, k0, v } = *input;
    if !(energy > T::zero()) {
        return Err(invalid("energy", format!("Born length needs Ẽ > 0, got {energy}")));
    }
    if !(k0 > T::zero()) {
        return Err(invalid("k0", "must be positive"));
    }
    let v2 = v * v;
    let correlation_energy = k0 * k0 / T::lit(2.0);
    let xi = k0 * energy / (T::PI().sqrt() * v2) * (T::lit(8.0) * energy / (k0 * k0)).exp();
    Ok(BornEstimate {
        xi,
        zeta: T::SQRT_2() / k0,
        correlation_energy,
        indicator: v2 / (energy * correlation_energy),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_point() {
        let est = born_xi(&BornInput { energy: 8e3_f64, k0: 1e3, v: 4e3 }).unwrap();
        assert!((est.xi - 0.30).abs() < 0.005, "{}", est.xi);
        assert!((est.indicator - 0.004).abs() < 1e-12);
        assert!((est.zeta - 2f64.sqrt() / 1e3).abs() < 1e-18);
    }

    #[test]
    fn quantum_limit_ratio() {
        let input = BornInput { energy: 1e-3_f64, k0: 1e3, v: 1.0 };
        let est = born_xi(&input).unwrap();
        assert!((est.xi / est.quantum_limit(&input) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn quartic_in_strength() {
        let a = born_xi(&BornInput { energy: 50.0_f64, k0: 10.0, v: 3.0 }).unwrap().xi;
        let b = born_xi(&BornInput { energy: 50.0_f64, k0: 10.0, v: 6.0 }).unwrap().xi;
        assert!((b / a - 0.25).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_positive_energy() {
        assert!(born_xi(&BornInput { energy: 0.0_f64, k0: 1.0, v: 1.0 }).is_err());
        assert!(born_xi(&BornInput { energy: -2.0_f32, k0: 1.0, v: 1.0 }).is_err());
    }

    #[test]
    fn monotone_in_energy() {
        let xs: Vec<f64> = (1..50)
            .map(|i| born_xi(&BornInput { energy: i as f64 * 3.0, k0: 100.0, v: 5.0 }).unwrap().xi)
            .collect();
        assert!(xs.windows(2).all(|w| w[1] > w[0]));
    }
}
