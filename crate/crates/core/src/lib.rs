//! Pseudospectral solvers for the capillary-gravity Whitham equation
//! `(M - c) u + u^2 = 0` with `M` the Fourier multiplier of symbol
//! `m(k) = sqrt((1 + beta k^2) tanh(k) / k)`.
//!
//! Everything numerical is generic over [`Scalar`]; the `*64` aliases below
//! fix the working precision to `f64`.

// `!(x > 0)` style tests are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod depression;
pub mod dispersion;
pub mod error;
pub mod fit;
pub mod io;
pub mod kdv;
pub mod linalg;
pub mod modstab;
pub mod nanopteron;
pub mod periodic;
pub mod scalar;
pub mod spectral;

pub use num_complex::Complex;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Grid64 = spectral::Grid<f64>;
pub type SpectralField64 = spectral::SpectralField<f64>;
pub type BondParams64 = dispersion::BondParams<f64>;
pub type ScalingParams64 = dispersion::ScalingParams<f64>;
pub type KdvProfile64 = kdv::KdvProfile<f64>;
pub type PeriodicWave64 = periodic::PeriodicWave<f64>;
pub type BealeWorkspace64 = nanopteron::BealeWorkspace<f64>;
pub type NanopteronSolution64 = nanopteron::NanopteronSolution<f64>;
pub type DepressionWave64 = depression::DepressionWave<f64>;

/// Crate version, recorded in output metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
