//! Ensemble localization estimates against closed forms.

use timeloc::lattice::{chain_tail_fit, diagonalize_chain, hopping, lattice_xi, onsite_energies, Band, LatticeSpec, TightBindingChain};
use timeloc::localization::{born_xi, BornInput, TransferMatrixRun};
use timeloc::num::median;

#[test]
fn transfer_matrix_follows_born_at_weak_disorder() {
    let (k0, energy, v) = (100.0_f64, 800.0, 200.0);
    let born = born_xi(&BornInput { energy, k0, v }).unwrap();
    assert!(born.indicator < 0.02);
    let run = TransferMatrixRun::new(k0, v, 150.0 * born.xi, 12, 5);
    let est = run.estimate(energy).unwrap();
    assert!(est.warnings.is_empty(), "{:?}", est.warnings);
    let rel = (est.xi / born.xi - 1.0).abs();
    assert!(rel < 0.08, "ξ_tm={} ξ_born={}", est.xi, born.xi);
}

#[test]
fn fig_parameters_chain_localization() {
    let spec = LatticeSpec::new(100, 2e4, 10.0, 100.0, 5);
    let j = spec.hopping().unwrap();
    let formula = lattice_xi(j, 100, 10.0).unwrap();
    let mut xs = Vec::new();
    for r in 0..40 {
        let chain = TightBindingChain::new(j, onsite_energies(&spec, r).unwrap()).unwrap();
        let s = diagonalize_chain(&chain).unwrap();
        for i in s.mid_band(5) {
            let fit = chain_tail_fit(&s, i).unwrap();
            if fit.accepted {
                xs.push(fit.xi);
            }
        }
    }
    assert!(xs.len() >= 20, "only {} accepted fits", xs.len());
    let m = median(&xs).unwrap();
    assert!((m / formula - 1.0).abs() < 0.5, "median {m} vs {formula}");
}

#[test]
fn weak_disorder_chain_matches_formula() {
    // long chain so that ξ ≪ half the ring; neighbours nearly uncorrelated
    let s = 1000;
    let j: f64 = 1.0;
    let v = j / 3.0;
    let spec = LatticeSpec::new(s, 2e4, v, 600.0, 9);
    let formula = lattice_xi(j, s, v).unwrap();
    // ξ is a sizeable fraction of the ring, so single fits are noisy; the
    // median over every mid-band state is compared
    let mut all = Vec::new();
    for r in 0..5 {
        let chain = TightBindingChain::new(j, onsite_energies(&spec, r).unwrap()).unwrap();
        let spectrum = diagonalize_chain(&chain).unwrap();
        for i in spectrum.mid_band(20) {
            let fit = chain_tail_fit(&spectrum, i).unwrap();
            all.push(fit.xi);
        }
    }
    let m = median(&all).unwrap();
    assert!(m / formula < 1.5 && formula / m < 1.5, "median {m} vs {formula}");
}

#[test]
fn excited_band_length() {
    let j: f64 = hopping(2e4, 100, Band::FirstExcited).unwrap();
    let xi = lattice_xi(j, 100, 300.0).unwrap();
    assert!((xi - 0.164).abs() < 0.002, "{xi}");
}
