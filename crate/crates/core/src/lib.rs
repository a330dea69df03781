//! Exponential Tauberian relations between the decay of a Laplace transform
//! at infinity and the decay of small-ball probabilities at zero.
//!
//! For a nonnegative random variable `X` and conjugate exponents
//! `1/alpha = 1/beta + 1`, the rates
//!
//! ```text
//! r = lim lambda^-alpha log E[exp(-lambda X)]      (lambda -> infinity)
//! s = lim eps^beta      log P(X <= eps)            (eps -> 0)
//! ```
//!
//! are linked by `|alpha r|^(1/alpha) = |beta s|^(1/beta)`. The crate provides
//! the rate conversions and the upper/lower-limit bands ([`exponents`]), the
//! windowed rate estimators and Chernoff/sandwich bounds ([`estimators`]), the
//! lattice distribution whose lower small-ball rate shows the band is sharp
//! ([`lattice`]), and the `L^2` small-ball problem for Brownian motion
//! ([`brownian`]). [`verify`] bundles the numerical checks into reports.
//!
//! Analytic code is generic over [`Real`] (`f32` or `f64`); Monte Carlo code
//! runs in `f64`. Aliases for the `f64` instantiations live at the crate root.

// NaN-rejecting guards are written as `!(x > 0)` throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod brownian;
pub mod error;
pub mod estimators;
pub mod exponents;
pub mod lattice;
pub mod numerics;
pub mod scalar;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Real;

pub type ExponentPair64 = exponents::ExponentPair<f64>;
pub type RateValue64 = exponents::RateValue<f64>;
pub type RateBand64 = exponents::RateBand<f64>;
pub type QuadratureConfig64 = numerics::QuadratureConfig<f64>;
pub type TailGrid64 = estimators::TailGrid<f64>;
pub type RateEstimate64 = estimators::RateEstimate<f64>;
pub type LatticeDistribution64 = lattice::LatticeDistribution<f64>;
pub type LatticeRates64 = lattice::LatticeRates<f64>;
pub type KernelParams64 = brownian::KernelParams<f64>;
pub type TimeGrid64 = brownian::TimeGrid<f64>;
pub type Interval64 = brownian::Interval<f64>;
pub type BoxFamily64 = brownian::BoxFamily<f64>;

pub type ExponentPair32 = exponents::ExponentPair<f32>;
pub type LatticeDistribution32 = lattice::LatticeDistribution<f32>;
pub type KernelParams32 = brownian::KernelParams<f32>;
