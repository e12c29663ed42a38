//! Exact classical dynamics of the driven ring and stroboscopic sections.
//!
//! `H = (p - α)²/2 + V g(θ) f(t) + λ cos(sθ) cos(sωt)` with the sawtooth `g`
//! and the drive `f` both truncated at a common harmonic cutoff, so the force
//! is smooth and the classical system matches the quantum one.

use num_complex::Complex;

use crate::disorder::{sawtooth_coefficient, DriveCoefficients, EffectiveDisorderCoefficients};
use crate::error::{invalid, Error, Result};
use crate::num::{wrap_angle, Real};
use crate::rng;

/// Minimum steps per drive period accepted by [`IntegratorConfig::validate`].
pub const MIN_STEPS_PER_PERIOD: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassicalState<T> {
    pub theta: T,
    pub p: T,
    pub t: T,
}

impl<T: Real> ClassicalState<T> {
    pub fn new(theta: T, p: T, t: T) -> Self {
        Self { theta, p, t }
    }

    pub fn wrapped(self) -> Self {
        Self { theta: wrap_angle(self.theta), ..self }
    }

    /// State at `t = 0` with rotating-frame coordinates `(Θ, P)`.
    pub fn resonant(theta: T, big_p: T, omega: T, alpha: T) -> Self {
        Self::new(theta, big_p + alpha + omega, T::zero())
    }
}

/// Driven ring in the laboratory frame.
#[derive(Clone, Debug)]
pub struct ClassicalSystem<T> {
    pub drive: DriveCoefficients<T>,
    pub v: T,
    pub lambda: T,
    pub s: u32,
    pub omega: T,
    pub alpha: T,
}

impl<T: Real> ClassicalSystem<T> {
    pub fn new(drive: DriveCoefficients<T>, v: T, omega: T, alpha: T) -> Self {
        Self { drive, v, lambda: T::zero(), s: 1, omega, alpha }
    }

    pub fn with_lattice(mut self, lambda: T, s: u32) -> Self {
        self.lambda = lambda;
        self.s = s;
        self
    }

    pub fn period(&self) -> T {
        T::TAU() / self.omega
    }

    /// Force field truncated at `cutoff` harmonics.
    pub fn field(&self, cutoff: usize) -> Result<ForceField<T>> {
        if cutoff > self.drive.cutoff() {
            return Err(invalid(
                "fourier_cutoff",
                format!("{cutoff} exceeds the drive cutoff {}", self.drive.cutoff()),
            ));
        }
        if !(self.omega > T::zero()) {
            return Err(invalid("omega", "drive frequency must be positive"));
        }
        Ok(ForceField {
            f: (1..=cutoff as i64).map(|k| self.drive.f.get(k)).collect(),
            cutoff,
            v: self.v,
            lambda: self.lambda,
            s: T::from_index(self.s as i64),
            omega: self.omega,
            alpha: self.alpha,
        })
    }

    pub fn force(&self, theta: T, t: T, cutoff: usize) -> Result<T> {
        Ok(self.field(cutoff)?.force(theta, t))
    }
}

/// Precomputed truncated force `-V g'(θ) f(t) + λ s sin(sθ) cos(sωt)`.
#[derive(Clone, Debug)]
pub struct ForceField<T> {
    /// `f_1..f_K`; the negative harmonics follow by conjugation.
    f: Vec<Complex<T>>,
    cutoff: usize,
    v: T,
    lambda: T,
    s: T,
    omega: T,
    alpha: T,
}

impl<T: Real> ForceField<T> {
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// `g'(θ) = -(2/π) Σ_{n=1}^{N} (-1)^n cos(nθ)` for the truncated sawtooth.
    pub fn sawtooth_slope(&self, theta: T) -> T {
        let step = Complex::new(theta.cos(), theta.sin());
        let mut z = Complex::new(T::one(), T::zero());
        let mut acc = T::zero();
        let mut sign = T::one();
        for _ in 0..self.cutoff {
            z = z * step;
            sign = -sign;
            acc += sign * z.re;
        }
        -T::lit(2.0) / T::PI() * acc
    }

    /// `f(t) = 2 Re Σ_{k≥1} f_k e^{ikωt}`.
    pub fn drive(&self, t: T) -> T {
        let phase = self.omega * t;
        let step = Complex::new(phase.cos(), phase.sin());
        let mut z = Complex::new(T::one(), T::zero());
        let mut acc = T::zero();
        for fk in &self.f {
            z = z * step;
            acc += (*fk * z).re;
        }
        T::lit(2.0) * acc
    }

    pub fn force(&self, theta: T, t: T) -> T {
        let mut out = T::zero();
        if self.v != T::zero() && self.cutoff > 0 {
            out -= self.v * self.sawtooth_slope(theta) * self.drive(t);
        }
        if self.lambda != T::zero() {
            out += self.lambda * self.s * (self.s * theta).sin() * (self.s * self.omega * t).cos();
        }
        out
    }

    /// Truncated sawtooth `g(θ) = Σ_{0<|n|≤N} g_n e^{inθ}`.
    pub fn sawtooth(&self, theta: T) -> T {
        (1..=self.cutoff as i64)
            .map(|n| {
                let g = sawtooth_coefficient::<T>(n);
                let a = T::from_index(n) * theta;
                T::lit(2.0) * (g * Complex::new(a.cos(), a.sin())).re
            })
            .sum()
    }

    pub fn energy(&self, state: &ClassicalState<T>) -> T {
        let k = state.p - self.alpha;
        let mut e = k * k / T::lit(2.0);
        if self.v != T::zero() {
            e += self.v * self.sawtooth(state.theta) * self.drive(state.t);
        }
        if self.lambda != T::zero() {
            e += self.lambda * (self.s * state.theta).cos() * (self.s * self.omega * state.t).cos();
        }
        e
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig<T> {
    pub dt: T,
    pub fourier_cutoff: usize,
}

impl<T: Real> IntegratorConfig<T> {
    /// Step dividing the drive period into `steps` equal parts.
    pub fn per_period(omega: T, steps: usize, fourier_cutoff: usize) -> Self {
        Self {
            dt: T::TAU() / (omega * T::from_usize(steps).unwrap()),
            fourier_cutoff,
        }
    }

    /// Default resolution: 16 steps per period for each retained harmonic,
    /// never fewer than [`MIN_STEPS_PER_PERIOD`].
    pub fn resolved(omega: T, fourier_cutoff: usize) -> Self {
        Self::per_period(omega, (16 * fourier_cutoff).max(MIN_STEPS_PER_PERIOD), fourier_cutoff)
    }

    pub fn validate(&self, omega: T) -> Result<()> {
        if !(self.dt > T::zero()) {
            return Err(invalid("dt", "step must be positive"));
        }
        let limit = T::TAU() / T::from_usize(MIN_STEPS_PER_PERIOD).unwrap();
        if self.dt * omega.abs() > limit * (T::one() + T::epsilon() * T::lit(16.0)) {
            return Err(Error::UnderResolved {
                step: self.dt.to_f64_lossy(),
                limit: (limit / omega.abs()).to_f64_lossy(),
                what: "drive period / 50",
            });
        }
        Ok(())
    }
}

/// Kick-drift-kick step with both half kicks at the midpoint time; time
/// symmetric and second order. `t` advances as `t0 + i·dt`.
fn step<T: Real>(field: &ForceField<T>, theta: &mut T, p: &mut T, t_mid: T, dt: T) {
    let half = dt / T::lit(2.0);
    *p += half * field.force(*theta, t_mid);
    *theta += dt * (*p - field.alpha);
    *p += half * field.force(*theta, t_mid);
}

/// Integrates `steps` steps from `state`, returning the initial state and
/// every `sample_every`-th state after it (angles wrapped).
pub fn integrate<T: Real>(
    system: &ClassicalSystem<T>,
    state: ClassicalState<T>,
    config: &IntegratorConfig<T>,
    steps: usize,
    sample_every: usize,
) -> Result<Vec<ClassicalState<T>>> {
    config.validate(system.omega)?;
    let field = system.field(config.fourier_cutoff)?;
    let every = sample_every.max(1);
    let mut out = Vec::with_capacity(steps / every + 1);
    out.push(state.wrapped());
    let (mut theta, mut p) = (state.theta, state.p);
    let dt = config.dt;
    let half = dt / T::lit(2.0);
    for i in 0..steps {
        let t0 = state.t + T::from_usize(i).unwrap() * dt;
        step(&field, &mut theta, &mut p, t0 + half, dt);
        if (i + 1) % every == 0 {
            let t = state.t + T::from_usize(i + 1).unwrap() * dt;
            out.push(ClassicalState::new(theta, p, t).wrapped());
        }
    }
    Ok(out)
}

/// Stroboscopic points `(Θ, P)` at `t_n = n·2π/ω`.
#[derive(Clone, Debug, PartialEq)]
pub struct PoincareSection<T> {
    /// `Θ = θ - ωt` wrapped into `[-π, π)`, `P = p - α - ω`.
    pub points: Vec<(T, T)>,
    pub omega: T,
    pub alpha: T,
    pub initial: ClassicalState<T>,
}

/// Converts states sampled at integer periods into section points. The
/// sample times are taken as exact multiples of the period.
pub fn poincare<T: Real>(trajectory: &[ClassicalState<T>], omega: T, alpha: T) -> PoincareSection<T> {
    let points = trajectory
        .iter()
        .map(|s| {
            // ωt_n = 2πn, so Θ = θ mod 2π
            (wrap_angle(s.theta), s.p - alpha - omega)
        })
        .collect();
    PoincareSection {
        points,
        omega,
        alpha,
        initial: trajectory.first().copied().unwrap_or(ClassicalState::new(T::zero(), T::zero(), T::zero())),
    }
}

/// Integrates `periods` drive periods from `state` (which must start at
/// `t = 0`) and samples once per period.
pub fn stroboscopic<T: Real>(
    system: &ClassicalSystem<T>,
    state: ClassicalState<T>,
    steps_per_period: usize,
    fourier_cutoff: usize,
    periods: usize,
) -> Result<PoincareSection<T>> {
    if state.t != T::zero() {
        return Err(invalid("state", "stroboscopic runs start at t = 0"));
    }
    let config = IntegratorConfig::per_period(system.omega, steps_per_period, fourier_cutoff);
    let traj = integrate(system, state, &config, steps_per_period * periods, steps_per_period)?;
    Ok(poincare(&traj, system.omega, system.alpha))
}

/// First-order stroboscopic momentum offset `δP(Θ) = (V/ω) Σ_{m≠0} A_m(Θ)/m`
/// with `A_m(Θ) = Σ_n n g_n f_{m-n} e^{inΘ}`. At integer periods the exact
/// momentum equals the slow one minus `δP`.
#[derive(Clone, Debug)]
pub struct Micromotion<T> {
    series: crate::series::HarmonicSeries<T>,
}

impl<T: Real> Micromotion<T> {
    pub fn new(drive: &DriveCoefficients<T>, v: T, omega: T) -> Self {
        let k = drive.cutoff() as i64;
        let series = crate::series::HarmonicSeries::from_fn(k as usize, |n| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for m in (n - k..=n + k).filter(|&m| m != 0) {
                acc = acc + drive.f.get(m - n) / T::from_index(m);
            }
            sawtooth_coefficient::<T>(n) * T::from_index(n) * acc * (v / omega)
        });
        Self { series }
    }

    pub fn shift(&self, theta: T) -> T {
        self.series.eval_real(theta)
    }

    /// Section with each `P` replaced by the slow momentum `P + δP(Θ)`.
    pub fn averaged(&self, section: &PoincareSection<T>) -> PoincareSection<T> {
        PoincareSection {
            points: section.points.iter().map(|&(t, p)| (t, p + self.shift(t))).collect(),
            ..section.clone()
        }
    }
}

/// Secular Hamiltonian `μP²/2 + (λ/2) cos(sΘ) + V Σ c_k e^{ikΘ} + ω²/2`.
#[derive(Clone, Debug)]
pub struct EffectiveClassical<T> {
    pub c: EffectiveDisorderCoefficients<T>,
    pub v: T,
    pub lambda: T,
    pub s: u32,
    pub mass: T,
    pub omega: T,
}

impl<T: Real> EffectiveClassical<T> {
    pub fn new(c: EffectiveDisorderCoefficients<T>, v: T, omega: T) -> Self {
        Self { c, v, lambda: T::zero(), s: 1, mass: T::one(), omega }
    }

    pub fn with_lattice(mut self, lambda: T, s: u32) -> Self {
        self.lambda = lambda;
        self.s = s;
        self
    }
}

pub fn heff_energy<T: Real>(h: &EffectiveClassical<T>, theta: T, big_p: T) -> T {
    let s = T::from_index(h.s as i64);
    let mut e = h.mass * big_p * big_p / T::lit(2.0) + h.omega * h.omega / T::lit(2.0);
    if h.lambda != T::zero() {
        e += h.lambda / T::lit(2.0) * (s * theta).cos();
    }
    if h.v != T::zero() {
        e += h.v * h.c.unit_potential(theta);
    }
    e
}

/// `(∂H/∂Θ, ∂H/∂P)`.
pub fn heff_gradient<T: Real>(h: &EffectiveClassical<T>, theta: T, big_p: T) -> (T, T) {
    let s = T::from_index(h.s as i64);
    let mut d_theta = T::zero();
    if h.lambda != T::zero() {
        d_theta -= h.lambda / T::lit(2.0) * s * (s * theta).sin();
    }
    if h.v != T::zero() {
        d_theta += h.v * h.c.c.derivative().eval_real(theta);
    }
    (d_theta, h.mass * big_p)
}

/// Population standard deviation of `H_eff` over the section points.
pub fn section_spread<T: Real>(h: &EffectiveClassical<T>, section: &PoincareSection<T>) -> T {
    let e: Vec<T> = section.points.iter().map(|&(t, p)| heff_energy(h, t, p)).collect();
    if e.is_empty() {
        return T::zero();
    }
    let n = T::from_usize(e.len()).unwrap();
    let mean = e.iter().copied().sum::<T>() / n;
    (e.iter().map(|&x| (x - mean) * (x - mean)).sum::<T>() / n).sqrt()
}

/// Fan of `count` initial conditions: `P` evenly spread over
/// `[-0.5, 0.5]·√(2V)`, `Θ` uniform on the ring from `seed`.
pub fn initial_fan<T: Real>(v: T, count: usize, seed: u64) -> Vec<(T, T)> {
    let span = (T::lit(2.0) * v.abs()).sqrt();
    (0..count)
        .map(|i| {
            let frac = if count > 1 {
                T::from_usize(i).unwrap() / T::from_usize(count - 1).unwrap() - T::lit(0.5)
            } else {
                T::zero()
            };
            let u = T::lit(rng::uniform_at(seed, i as u64));
            (T::TAU() * u - T::PI(), frac * span)
        })
        .collect()
}
