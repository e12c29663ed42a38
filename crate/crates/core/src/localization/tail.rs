//! Exponential tail fits of localized densities.

use crate::error::{invalid, Result};
use crate::num::{median, Real};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailFitOptions<T> {
    /// Numerical floor; the decade above it is excluded as well.
    pub floor: T,
    /// Period of the ordinate (ring circumference or drive period), if any.
    pub period: Option<T>,
    /// Fits below this coefficient of determination are not accepted.
    pub min_r_squared: T,
    /// Fixed core exclusion radius; derived from a first-pass fit when `None`.
    pub core: Option<T>,
    /// Local filter applied before fitting. Standing-wave nodes otherwise
    /// dominate `ln ρ`.
    pub smoothing: Option<Smoothing<T>>,
}

/// Local filters over a window given in coordinate units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Smoothing<T> {
    /// Moving average (coarse-grained density).
    Mean(T),
    /// Moving maximum (upper envelope).
    Envelope(T),
}

impl<T: Real> Smoothing<T> {
    pub fn width(&self) -> T {
        match *self {
            Smoothing::Mean(w) | Smoothing::Envelope(w) => w,
        }
    }
}

impl<T: Real> Default for TailFitOptions<T> {
    fn default() -> Self {
        Self {
            floor: T::lit(1e-12),
            period: None,
            min_r_squared: T::lit(0.9),
            core: None,
            smoothing: None,
        }
    }
}

impl<T: Real> TailFitOptions<T> {
    pub fn periodic(period: T) -> Self {
        Self { period: Some(period), ..Self::default() }
    }

    pub fn with_floor(mut self, floor: T) -> Self {
        self.floor = floor;
        self
    }

    pub fn with_smoothing(mut self, smoothing: Smoothing<T>) -> Self {
        self.smoothing = Some(smoothing);
        self
    }
}

fn window_indices(i: usize, n: usize, half: usize, periodic: bool) -> Box<dyn Iterator<Item = usize>> {
    if periodic {
        let half = half.min((n - 1) / 2);
        Box::new((0..=2 * half).map(move |k| (i + n + k - half) % n))
    } else {
        Box::new(i.saturating_sub(half)..=(i + half).min(n - 1))
    }
}

/// Centred moving maximum over `2 * half + 1` samples.
pub fn moving_max<T: Real>(xs: &[T], half: usize, periodic: bool) -> Vec<T> {
    let n = xs.len();
    if half == 0 || n == 0 {
        return xs.to_vec();
    }
    (0..n)
        .map(|i| window_indices(i, n, half, periodic).map(|j| xs[j]).fold(T::neg_infinity(), T::max))
        .collect()
}

/// Centred moving average over `2 * half + 1` samples, wrapping if `periodic`
/// and shrinking at open ends.
pub fn moving_average<T: Real>(xs: &[T], half: usize, periodic: bool) -> Vec<T> {
    let n = xs.len();
    if half == 0 || n == 0 {
        return xs.to_vec();
    }
    (0..n)
        .map(|i| {
            let (sum, count) = window_indices(i, n, half, periodic).fold((T::zero(), 0usize), |(s, c), j| (s + xs[j], c + 1));
            sum / T::from_usize(count).unwrap()
        })
        .collect()
}

/// Result of regressing `ln ρ` against the distance from the peak.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailFit<T> {
    /// Density decay length: `ρ ∝ exp(-|x - x₀|/ξ)`.
    pub xi: T,
    pub center: T,
    /// Distance range `[core, max]` that entered the regression.
    pub window: (T, T),
    pub r_squared: T,
    pub points: usize,
    pub accepted: bool,
}

struct Line<T> {
    slope: T,
    r_squared: T,
    n: usize,
    max_distance: T,
}

fn regress<T: Real>(pts: &[(T, T)]) -> Option<Line<T>> {
    if pts.len() < 3 {
        return None;
    }
    let n = T::from_usize(pts.len()).unwrap();
    let mx = pts.iter().map(|p| p.0).sum::<T>() / n;
    let my = pts.iter().map(|p| p.1).sum::<T>() / n;
    let sxx: T = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: T = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: T = pts.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    if sxx <= T::zero() {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy > T::zero() { sxy * sxy / (sxx * syy) } else { T::one() };
    let max_distance = pts.iter().map(|p| p.0).fold(T::zero(), T::max);
    Some(Line { slope, r_squared, n: pts.len(), max_distance })
}

/// Fits `ρ(x) ∝ exp(-|x - x₀|/ξ)` to both flanks of a single-peaked density.
///
/// Points inside the core `|x - x₀| < max(ξ/2, 3h, w)` (with `w` the
/// smoothing width) and points within a decade of `floor` are dropped; both
/// flanks share one slope. A poor fit is returned with `accepted = false`
/// rather than an error.
pub fn fit_tail<T: Real>(coords: &[T], density: &[T], opts: &TailFitOptions<T>) -> Result<TailFit<T>> {
    if coords.len() != density.len() {
        return Err(invalid("density", "length differs from the ordinate grid"));
    }
    if coords.len() < 5 {
        return Err(invalid("density", "need at least five samples"));
    }
    if density.iter().any(|&d| d < T::zero() || !d.is_finite()) {
        return Err(invalid("density", "must be finite and non-negative"));
    }
    let spacings: Vec<T> = coords.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let h = median(&spacings).unwrap_or(T::zero());
    let smoothed;
    let (density, smooth_width) = match opts.smoothing {
        Some(filter) if filter.width() > T::zero() && h > T::zero() => {
            let w = filter.width();
            let half = (w / (T::lit(2.0) * h)).round().to_usize().unwrap_or(0);
            let periodic = opts.period.is_some();
            smoothed = match filter {
                Smoothing::Mean(_) => moving_average(density, half, periodic),
                Smoothing::Envelope(_) => moving_max(density, half, periodic),
            };
            (smoothed.as_slice(), w)
        }
        _ => (density, T::zero()),
    };
    let (peak, _) = density
        .iter()
        .enumerate()
        .fold((0, T::neg_infinity()), |acc, (i, &d)| if d > acc.1 { (i, d) } else { acc });
    let center = coords[peak];
    let cutoff = opts.floor * T::lit(10.0);
    let distance = |x: T| {
        let d = (x - center).abs();
        match opts.period {
            Some(p) => {
                let d = d % p;
                d.min(p - d)
            }
            None => d,
        }
    };
    let usable: Vec<(T, T)> = coords
        .iter()
        .zip(density)
        .filter(|(_, &d)| d > cutoff)
        .map(|(&x, &d)| (distance(x), d.ln()))
        .collect();

    let min_core = (T::lit(3.0) * h).max(smooth_width);
    let select = |core: T| -> Vec<(T, T)> { usable.iter().copied().filter(|p| p.0 >= core).collect() };
    let core = match opts.core {
        Some(c) => c.max(min_core),
        None => {
            let first = regress(&select(min_core)).ok_or_else(|| invalid("density", "too few points above the floor"))?;
            if first.slope < T::zero() {
                (-T::one() / first.slope / T::lit(2.0)).max(min_core)
            } else {
                min_core
            }
        }
    };
    let pts = select(core);
    let line = match regress(&pts) {
        Some(l) => l,
        // the core swallowed the tail; fall back to the minimal exclusion
        None => regress(&select(min_core)).ok_or_else(|| invalid("density", "too few points above the floor"))?,
    };
    let xi = if line.slope < T::zero() { -T::one() / line.slope } else { T::infinity() };
    Ok(TailFit {
        xi,
        center,
        window: (core, line.max_distance),
        r_squared: line.r_squared,
        points: line.n,
        accepted: line.slope < T::zero() && line.r_squared >= opts.min_r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn grid(n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn exact_exponential() {
        let x = grid(2001, -3.0, 3.0);
        let rho: Vec<f64> = x.iter().map(|t| (-(t - 0.3).abs() / 0.2).exp()).collect();
        let fit = fit_tail(&x, &rho, &TailFitOptions::default()).unwrap();
        assert!((fit.xi - 0.2).abs() < 1e-6, "{}", fit.xi);
        assert!((fit.center - 0.3).abs() < 1e-12);
        assert!(fit.accepted && fit.r_squared > 0.999_999);
    }

    #[test]
    fn noisy_exponential() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let x = grid(1501, -3.0, 3.0);
        let rho: Vec<f64> = x
            .iter()
            .map(|t| (-t.abs() / 0.25).exp() * (1.0 + 0.2 * (2.0 * rng.gen::<f64>() - 1.0)))
            .collect();
        let fit = fit_tail(&x, &rho, &TailFitOptions::default()).unwrap();
        assert!((fit.xi / 0.25 - 1.0).abs() < 0.1, "{}", fit.xi);
        assert!(fit.accepted);
    }

    #[test]
    fn periodic_wrap() {
        // peak near the seam of a ring
        let tau = std::f64::consts::TAU;
        let x: Vec<f64> = (0..1024).map(|i| -std::f64::consts::PI + tau * i as f64 / 1024.0).collect();
        let x0 = 3.0;
        let rho: Vec<f64> = x
            .iter()
            .map(|t| {
                let d = (t - x0).abs() % tau;
                (-d.min(tau - d) / 0.3).exp()
            })
            .collect();
        let fit = fit_tail(&x, &rho, &TailFitOptions::periodic(tau)).unwrap();
        assert!((fit.xi - 0.3).abs() < 1e-6);
    }

    #[test]
    fn two_peaks_are_flagged() {
        let x = grid(2001, -3.0, 3.0);
        let rho: Vec<f64> = x
            .iter()
            .map(|t| (-(t + 1.5).abs() / 0.1).exp() + 0.9 * (-(t - 1.5).abs() / 0.1).exp())
            .collect();
        let fit = fit_tail(&x, &rho, &TailFitOptions::default()).unwrap();
        assert!(!fit.accepted, "r2={}", fit.r_squared);
    }

    #[test]
    fn bad_input() {
        assert!(fit_tail(&[0.0, 1.0], &[1.0], &TailFitOptions::<f64>::default()).is_err());
        assert!(fit_tail(&grid(10, 0.0, 1.0), &[-1.0; 10], &TailFitOptions::default()).is_err());
    }
}
