//! Tight-binding reduction of the disordered driven lattice.
//!
//! For a deep lattice `(λ/2) cos(sΘ)` the lowest band is an Anderson chain of
//! `s` sites at the minima `Θ_j = (2j+1)π/s` with hopping `J` and on-site
//! energies sampled from the disorder potential. Localization lengths are
//! reported in Θ-radians; one site is `2π/s`.

use std::fmt;
use std::str::FromStr;

use faer::Mat;

use crate::disorder::{potential_on_grid, realization, DriveSpec, EffectiveDisorderCoefficients};
use crate::error::{invalid, Result};
use crate::linalg;
use crate::localization::{fit_tail, Smoothing, TailFit, TailFitOptions};
use crate::num::Real;

/// Ratio of the first-excited to the lowest-band hopping.
pub const EXCITED_BAND_FACTOR: f64 = 32.0;

/// Neighbour correlation above which sites are no longer independent.
pub const CORRELATION_WARNING: f64 = 0.05;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Band {
    #[default]
    Lowest,
    FirstExcited,
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Band::Lowest => "lowest",
            Band::FirstExcited => "first-excited",
        })
    }
}

impl FromStr for Band {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lowest" | "0" => Ok(Band::Lowest),
            "first-excited" | "excited" | "1" => Ok(Band::FirstExcited),
            other => Err(invalid("band", format!("unknown band `{other}`"))),
        }
    }
}

/// Deep-lattice hopping `(2⁵λ³s²/π²)^{1/4} e^{-√(32λ)/s}`, times 32 for the
/// first excited band.
pub fn hopping<T: Real>(lambda: T, s: u32, band: Band) -> Result<T> {
    if !(lambda > T::zero()) {
        return Err(invalid("lambda", "lattice depth must be positive"));
    }
    if s == 0 {
        return Err(invalid("s", "need at least one site"));
    }
    let s = T::from_index(s as i64);
    let pi = T::PI();
    let prefactor = (T::lit(32.0) * lambda.powi(3) * s * s / (pi * pi)).powf(T::lit(0.25));
    let j = prefactor * (-(T::lit(32.0) * lambda).sqrt() / s).exp();
    Ok(match band {
        Band::Lowest => j,
        Band::FirstExcited => j * T::lit(EXCITED_BAND_FACTOR),
    })
}

/// Band-centre localization length `8πJ²/(sV²)` in radians.
pub fn lattice_xi<T: Real>(j: T, s: u32, v: T) -> Result<T> {
    if !(v > T::zero()) {
        return Err(invalid("v", "disorder strength must be positive"));
    }
    if s == 0 {
        return Err(invalid("s", "need at least one site"));
    }
    if v >= j {
        log::warn!("V = {v} ≥ J = {j}: outside the weak-disorder regime of the band-centre formula");
    }
    Ok(T::lit(8.0) * T::PI() * j * j / (T::from_index(s as i64) * v * v))
}

/// Disorder autocorrelation between neighbouring minima, `e^{-k0²(2π/s)²/4}`.
pub fn neighbor_correlation<T: Real>(k0: T, s: u32) -> T {
    let a = T::TAU() / T::from_index(s as i64);
    (-(k0 * k0 * a * a) / T::lit(4.0)).exp()
}

/// Lattice minima `Θ_j = (2j+1)π/s`.
pub fn site_positions<T: Real>(s: u32) -> Vec<T> {
    let n = T::from_index(s as i64);
    (0..s as i64).map(|j| T::from_index(2 * j + 1) * T::PI() / n).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeSpec<T> {
    pub s: u32,
    pub lambda: T,
    pub v: T,
    pub k0: T,
    pub seed: u64,
    pub band: Band,
}

impl<T: Real> LatticeSpec<T> {
    pub fn new(s: u32, lambda: T, v: T, k0: T, seed: u64) -> Self {
        Self { s, lambda, v, k0, seed, band: Band::Lowest }
    }

    pub fn with_band(mut self, band: Band) -> Self {
        self.band = band;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.s < 2 {
            return Err(invalid("s", "a chain needs at least two sites"));
        }
        if !(self.lambda > T::zero()) {
            return Err(invalid("lambda", "lattice depth must be positive"));
        }
        if !(self.k0 > T::zero()) {
            return Err(invalid("k0", "must be positive"));
        }
        if self.v < T::zero() {
            return Err(invalid("v", "must be non-negative"));
        }
        Ok(())
    }

    /// `√λ/s`; the wavepacket-train picture needs this large.
    pub fn depth_ratio(&self) -> T {
        self.lambda.sqrt() / T::from_index(self.s as i64)
    }

    pub fn hopping(&self) -> Result<T> {
        hopping(self.lambda, self.s, self.band)
    }

    pub fn lattice_constant(&self) -> T {
        T::TAU() / T::from_index(self.s as i64)
    }

    /// Warnings about the regime, for reports.
    pub fn diagnostics(&self) -> Vec<String> {
        let mut out = Vec::new();
        let corr = neighbor_correlation(self.k0, self.s);
        if corr > T::lit(CORRELATION_WARNING) {
            out.push(format!("neighbour disorder correlation {corr:.3e} exceeds {CORRELATION_WARNING}"));
        }
        if let Ok(j) = self.hopping() {
            if self.v >= j {
                out.push(format!("V = {} ≥ J = {j:.4}: outside the weak-disorder regime", self.v));
            }
        }
        if self.depth_ratio() < T::one() {
            out.push(format!("√λ/s = {:.3} is not large", self.depth_ratio()));
        }
        out
    }
}

/// On-site energies `ε_j = V Σ_k c_k e^{ikΘ_j}` of realization `index`.
pub fn onsite_energies<T: Real>(spec: &LatticeSpec<T>, index: u64) -> Result<Vec<T>> {
    spec.validate()?;
    let corr = neighbor_correlation(spec.k0, spec.s);
    if corr > T::lit(CORRELATION_WARNING) {
        log::warn!("neighbouring sites are correlated ({corr:.3e}); the chain is not an uncorrelated Anderson model");
    }
    let (_, c) = realization(&DriveSpec::new(spec.k0, spec.seed), index)?;
    onsite_from_coefficients(&c, spec.v, spec.s)
}

pub fn onsite_from_coefficients<T: Real>(c: &EffectiveDisorderCoefficients<T>, v: T, s: u32) -> Result<Vec<T>> {
    potential_on_grid(c, v, &site_positions(s))
}

/// Periodic nearest-neighbour chain with hopping `-J`.
#[derive(Clone, Debug, PartialEq)]
pub struct TightBindingChain {
    pub j: f64,
    pub eps: Vec<f64>,
}

impl TightBindingChain {
    pub fn new(j: f64, eps: Vec<f64>) -> Result<Self> {
        if eps.len() < 2 {
            return Err(invalid("eps", "a chain needs at least two sites"));
        }
        Ok(Self { j, eps })
    }

    pub fn len(&self) -> usize {
        self.eps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps.is_empty()
    }

    pub fn matrix(&self) -> Mat<f64> {
        let n = self.len();
        let mut h = Mat::<f64>::zeros(n, n);
        for i in 0..n {
            h[(i, i)] = self.eps[i];
            let k = (i + 1) % n;
            if k != i {
                h[(i, k)] -= self.j;
                h[(k, i)] -= self.j;
            }
        }
        h
    }
}

#[derive(Clone, Debug)]
pub struct ChainSpectrum {
    pub values: Vec<f64>,
    pub vectors: Mat<f64>,
}

impl ChainSpectrum {
    pub fn density(&self, state: usize) -> Vec<f64> {
        (0..self.vectors.nrows()).map(|r| self.vectors[(r, state)].powi(2)).collect()
    }

    /// Indices of the `count` states nearest the middle of the spectrum.
    pub fn mid_band(&self, count: usize) -> Vec<usize> {
        let n = self.values.len();
        let count = count.min(n);
        let start = (n - count) / 2;
        (start..start + count).collect()
    }
}

pub fn diagonalize_chain(chain: &TightBindingChain) -> Result<ChainSpectrum> {
    let pairs = linalg::symmetric_eigen(&chain.matrix())?;
    Ok(ChainSpectrum { values: pairs.values, vectors: pairs.vectors })
}

/// Sites averaged over before a chain tail fit; band-centre states have
/// density nodes every other site.
pub const CHAIN_SMOOTHING_SITES: f64 = 4.0;

/// Tail fit of chain eigenstate `state`, with `ξ` converted to radians.
pub fn chain_tail_fit(spectrum: &ChainSpectrum, state: usize) -> Result<TailFit<f64>> {
    let n = spectrum.vectors.nrows();
    let sites: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let opts = TailFitOptions::periodic(n as f64).with_smoothing(Smoothing::Envelope(CHAIN_SMOOTHING_SITES));
    let fit = fit_tail(&sites, &spectrum.density(state), &opts)?;
    let a = std::f64::consts::TAU / n as f64;
    Ok(TailFit {
        xi: fit.xi * a,
        center: fit.center * a,
        window: (fit.window.0 * a, fit.window.1 * a),
        ..fit
    })
}
