//! Localization lengths from three independent routes.
//!
//! All routes report `ξ` as the decay length of the probability density,
//! `|ψ|² ∝ exp(-|x - x₀|/ξ)`. For the transfer matrix this means
//! `ξ = 1/(2γ)` with `γ` the Lyapunov exponent of the amplitude.

mod born;
mod tail;
mod transfer;

pub use born::{born_xi, BornEstimate, BornInput};
pub use tail::{fit_tail, moving_average, moving_max, Smoothing, TailFit, TailFitOptions};
pub use transfer::{lyapunov, lyapunov_exponent, LyapunovEstimate, TransferMatrixRun, DEFAULT_RENORM_EVERY};
