//! Numerical laboratory for products of random matrices on SL(m+1, R).
//!
//! The core crate is `no_std` + `alloc`: dense linear algebra sized for
//! m <= 4, Cartan/Iwasawa decompositions, exterior-power representations,
//! flag-variety geometry, the random-walk engine, non-concentration
//! statistics, transfer-operator spectral analysis on P^1, renewal sums
//! and Fourier-decay estimators. IO, CLI and parallel drivers live in the
//! companion `rmlab` crate.

#![no_std]

extern crate alloc;

pub mod scalar;
pub mod mat;
pub mod lie;
pub mod rep;
pub mod flag;
pub mod rng;
pub mod stats;
pub mod walk;
pub mod noncon;
pub mod transfer;
pub mod renewal;
pub mod fourier;
