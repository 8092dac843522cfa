//! Projective Wishart distributions on the space of unit-determinant
//! positive definite matrices.
//!
//! A Wishart sample `X = Σ Y_i Y_i*` with `Y_i ~ N(0, Σ)` is mapped to its
//! scale-free representative `det(X)^{-1/d} X`. This crate provides the
//! pieces needed to work with the resulting law on real symmetric or complex
//! Hermitian matrices:
//!
//! * [`matrix`] and [`eigen`]: small dense Hermitian linear algebra
//!   (cyclic Jacobi eigensolver, matrix functions, Cholesky, determinants).
//! * [`manifold`]: projection, the `(x, log det)` identification, the
//!   affine-invariant distance, exponential/logarithm maps and congruence
//!   actions.
//! * [`sampling`]: reproducible Gaussian, Wishart, projective Wishart and
//!   Haar stabilizer samplers driven by [`rng::RngStream`].
//! * [`frechet`]: the Karcher mean solver.
//! * [`densities`]: log-densities (trace form in any dimension, cosh form for
//!   2×2) and the radial law of the distance to the mean.
//! * [`stats`]: Kolmogorov–Smirnov tests and binned ratio tests.
//!
//! The crate is `no_std` and only needs `alloc`.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod densities;
pub mod eigen;
mod error;
pub mod frechet;
pub mod manifold;
pub(crate) mod math;
pub mod matrix;
pub mod quadrature;
pub mod rng;
pub mod sampling;
pub mod scalar;
pub mod stats;

pub use error::{Error, Result};
pub use scalar::{Complex64, Field, Scalar};

pub use densities::{DensityValue, RadialLaw};
pub use eigen::EigenDecomp;
pub use frechet::{MeanConfig, MeanResult};
pub use manifold::{GroupElement, SpdPoint, TangentVec, UnitDetPoint, DEFAULT_SCALE};
pub use matrix::{HermMatrix, Mat};
pub use rng::RngStream;
pub use sampling::{WishartParams, WishartSampler};

