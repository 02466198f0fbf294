//! Numerical laboratory for the two-dimensional energy-critical wave equation
//! with exponential nonlinearity on the unit square:
//!
//! ```text
//! u_tt - Lap u + u (e^{4 pi u^2} - 1) = 0,   u|_{boundary} = 0 (or Neumann)
//! ```
//!
//! The crate provides the Laplacian eigenbasis machinery and exact free
//! propagator ([`spectral`]), the conserved energy and the norm/functional
//! zoo ([`functionals`]), the Moser-Trudinger concentrating family
//! ([`concentrators`]), the diffusion-free oscillator with its singular
//! quadratures and the decoherence computation ([`odelab`]), a Strang
//! splitting solver with an energy audit ([`pdesolver`]), and light-cone
//! energy/flux diagnostics ([`lightcone`]).

pub mod concentrators;
pub mod error;
pub mod functionals;
pub mod grid;
pub mod lightcone;
pub mod logscalar;
pub mod odelab;
pub mod pdesolver;
pub mod quadrature;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
pub use grid::{BoundaryKind, Grid2D, GridField};
pub use logscalar::LogScalar;
pub use spectral::{SpectralField, WaveState};

/// Exponent of the critical nonlinearity u (e^{4 pi u^2} - 1).
pub const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// Largest exponent the plain-f64 pipelines accept before directing callers
/// to the log-space pathway.
pub const OVERFLOW_GUARD: f64 = 700.0;
