//! Numerics for lattice random walks perturbed at the origin.
//!
//! The crate is `no_std` (it needs `alloc`) and covers everything that does
//! not touch the filesystem or threads:
//!
//! * [`distributions`]: the symmetric zeta-type step law `ξ`, the jump-from-zero
//!   law `η`, their characteristic functions, tails, samplers and norming
//!   functions `a(v)`, `c(v)`.
//! * [`walk`]: the perturbed chain, its zero-visit counter, hitting times and
//!   the Poissonized scaled process.
//! * [`transforms`]: lattice generating functions, discrete and Poissonized
//!   hitting transforms, and the α-stable resolvent density.
//! * [`resolvent`]: killed resolvents, the holding-and-jumping resolvent at
//!   zero, integrals against the skew measure `η*` and the skew resolvent.
//! * [`quadrature`] and [`special`]: the adaptive Gauss–Kronrod integrator and
//!   the special functions everything above is built on.
#![no_std]
#![warn(missing_debug_implementations, rust_2018_idioms)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod distributions;
mod error;
pub mod quadrature;
pub mod resolvent;
pub mod rng;
pub mod special;
pub mod stats;
pub mod transforms;
pub mod walk;

pub use error::{Error, Result};
