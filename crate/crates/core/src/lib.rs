//! Optimistic first-order methods on Riemannian manifolds.
//!
//! The crate has four layers:
//!
//! - [`geometry`]: the [`Manifold`] contract, curvature-distortion constants
//!   and the weighted Fréchet mean.
//! - [`manifolds`]: Euclidean space, spheres, Lorentz-model hyperbolic space,
//!   SPD matrices with the affine-invariant metric, and products.
//! - [`online`]: online gradient descent, optimistic online gradient descent
//!   (parallel-transport and corrected variants), the adaptive meta-expert
//!   learner and regret bookkeeping.
//! - [`games`]: optimistic gradient descent-ascent for zero-sum games on
//!   product manifolds, with gradient descent-ascent and corrected
//!   extragradient baselines.
//!
//! [`verify`] holds independent numerical oracles (finite differences,
//! comparison-inequality sweeps, holonomy probes) used by the tests and the
//! `bench verify` command.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod games;
pub mod geometry;
pub mod manifolds;
pub mod online;
pub mod rng;
pub mod verify;

pub use geometry::{
    distance, exp_map, inner_product, log_map, parallel_transport, sigma_constant,
    weighted_frechet_mean, zeta_constant, CurvatureBounds, FrechetOptions, GeomError,
    GeometryParams, Manifold, Point, Result, TangentVector,
};
