//! Pseudo-spectral laboratory for the (1+2)-dimensional Chern-Simons-Dirac
//! system in the Coulomb gauge.
//!
//! The crate evolves a two-component spinor on a periodic lattice with the
//! gauge field eliminated through the elliptic Coulomb-gauge constraint,
//! verifies the algebraic identities of the Dirac projection calculus,
//! probes bilinear and null-form estimate constants on dyadic space-time
//! regions, and runs the low-regularity scaling experiment that exhibits the
//! failure of third-order smoothness of the data-to-solution map below L^2.

pub mod dirac;
pub mod error;
pub mod estimates;
pub mod evolution;
pub mod field;
mod fft;
pub mod grid;
pub mod illposed;
pub mod io;
pub mod multipliers;
pub mod nonlinearity;
pub mod sampling;

pub use error::{CsdError, Result};
pub use field::{Rep, ScalarField, SpinorField};
pub use grid::GridSpec;

pub use num_complex;
