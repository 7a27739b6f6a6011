#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! Gaussian moment simulator for multi-pass quantum-erasure spin squeezing.
//!
//! A collective atomic spin, linearized around its mean polarization along
//! `x`, couples to a traveling light pulse through `N` Faraday passes with
//! waveplate rotations between passes. The pulse is either sliced into
//! segments and propagated pass by pass ([`discrete`]), or the spin is
//! propagated with a continuous Lyapunov equation whose drift and diffusion
//! are the slice model's continuum limit ([`continuous`]). [`metrics`]
//! turns the final spin covariance into the Wineland squeezing parameter and
//! [`sweeps`] optimizes the free controls and regenerates the figure tables.
//!
//! All quadratures are normalized by `sqrt(<J_x>)`, so a coherent spin state
//! and the light vacuum both have covariance `I/2`.

pub mod cli;
pub mod continuous;
pub mod discrete;
mod error;
pub mod gaussian;
pub mod metrics;
pub mod optimize;
pub mod params;
pub mod sweeps;

pub use error::{Error, Result};
