//! Scalar abstraction shared by the generic numerics.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rustfft::FftNum;

/// Floating point scalar usable throughout the crate (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + FftNum
    + Sum
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into this scalar.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn from_index(i: i64) -> Self {
        Self::from_i64(i).expect("index fits the scalar")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Threshold on imaginary residues when a complex sum must be real.
    #[inline]
    fn realness_tolerance() -> Self {
        Self::epsilon() * Self::lit(1e5)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Arithmetic mean; `None` for an empty slice.
pub fn mean<T: Real>(xs: &[T]) -> Option<T> {
    if xs.is_empty() {
        return None;
    }
    Some(xs.iter().copied().sum::<T>() / T::from_usize(xs.len())?)
}

/// Unbiased sample variance; `None` with fewer than two samples.
pub fn variance<T: Real>(xs: &[T]) -> Option<T> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs)?;
    let ss: T = xs.iter().map(|&x| (x - m) * (x - m)).sum();
    Some(ss / T::from_usize(xs.len() - 1)?)
}

/// Median of a copy of the input (NaNs sort last).
pub fn median<T: Real>(xs: &[T]) -> Option<T> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Greater));
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / T::lit(2.0)
    })
}

/// Wraps an angle into `[-π, π)`.
#[inline]
pub fn wrap_angle<T: Real>(x: T) -> T {
    let two_pi = T::TAU();
    let y = (x + T::PI()) % two_pi;
    let y = if y < T::zero() { y + two_pi } else { y };
    let y = y - T::PI();
    // `%` can land exactly on +π after the shift
    if y >= T::PI() {
        y - two_pi
    } else {
        y
    }
}

/// `n` evenly spaced points covering `[-π, π)`.
pub fn ring_grid<T: Real>(n: usize) -> Vec<T> {
    let step = T::TAU() / T::from_usize(n).expect("grid size");
    (0..n)
        .map(|i| -T::PI() + step * T::from_usize(i).expect("grid index"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_angle_stays_in_range() {
        for &x in &[-10.0_f64, -3.2, -std::f64::consts::PI, 0.0, 3.1, std::f64::consts::PI, 25.0] {
            let w = wrap_angle(x);
            assert!((-std::f64::consts::PI..std::f64::consts::PI).contains(&w), "{x} -> {w}");
            assert!(((x - w) / std::f64::consts::TAU).fract().abs() < 1e-12 || ((x - w) / std::f64::consts::TAU).fract().abs() > 1.0 - 1e-12);
        }
    }

    #[test]
    fn basic_statistics() {
        let xs = [1.0_f32, 2.0, 3.0, 4.0];
        assert_eq!(mean(&xs), Some(2.5));
        assert!((variance(&xs).unwrap() - 5.0 / 3.0).abs() < 1e-6);
        assert_eq!(median(&xs), Some(2.5));
        assert_eq!(median::<f64>(&[]), None);
    }

    #[test]
    fn ring_grid_is_half_open() {
        let g: Vec<f64> = ring_grid(8);
        assert_eq!(g[0], -std::f64::consts::PI);
        assert!(g[7] < std::f64::consts::PI);
    }
}
