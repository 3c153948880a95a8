//! Numerical homogenization of almost periodic elliptic operators through
//! periodized cell problems and Bloch spectral data.
//!
//! Modules build on each other in this order: [`coeff`] (coefficient fields),
//! [`fem`] (Q1 assembly), [`linalg`] (CG and inverse iteration), [`cell`]
//! (correctors and tensors), [`bloch`] (shifted operator spectra) and
//! [`study`] (convergence sweeps).

pub mod bloch;
pub mod cell;
pub mod coeff;
pub mod fem;
pub mod linalg;
pub mod study;
