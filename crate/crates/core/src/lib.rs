//! Anderson localization in the time domain.
//!
//! A particle on a ring driven by a temporally disordered periodic force
//! behaves, near a resonant orbit, like a particle in a spatially disordered
//! potential. This crate synthesizes such drives, builds and diagonalizes the
//! secular effective Hamiltonians, estimates localization lengths, and checks
//! the secular approximation against exact classical and Floquet dynamics.
//!
//! Scalar-generic pieces take any [`Real`]; the aliases below fix `f64`.

pub mod classical;
pub mod disorder;
pub mod effmodel;
pub mod error;
pub mod floquet;
pub mod lattice;
pub mod linalg;
pub mod localization;
pub mod num;
pub mod rng;
pub mod series;

pub use error::{Error, Result};
pub use num::Real;
pub use series::HarmonicSeries;

pub type DriveSpec = disorder::DriveSpec<f64>;
pub type DriveCoefficients = disorder::DriveCoefficients<f64>;
pub type EffectiveDisorderCoefficients = disorder::EffectiveDisorderCoefficients<f64>;
pub type LinePotential = disorder::LinePotential<f64>;
pub type BornInput = localization::BornInput<f64>;
pub type BornEstimate = localization::BornEstimate<f64>;
pub type LyapunovEstimate = localization::LyapunovEstimate<f64>;
pub type TransferMatrixRun = localization::TransferMatrixRun<f64>;
pub type TailFit = localization::TailFit<f64>;
pub type TailFitOptions = localization::TailFitOptions<f64>;
pub type LatticeSpec = lattice::LatticeSpec<f64>;
pub type ClassicalState = classical::ClassicalState<f64>;
pub type ClassicalSystem = classical::ClassicalSystem<f64>;
pub type IntegratorConfig = classical::IntegratorConfig<f64>;
pub type PoincareSection = classical::PoincareSection<f64>;
pub type EffectiveClassical = classical::EffectiveClassical<f64>;
pub type Micromotion = classical::Micromotion<f64>;
