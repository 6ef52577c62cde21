//! Numerics for the Einstein-scalar system in harmonic (wave) coordinates.
//!
//! The crate is `no_std` with `alloc`. Enable `std` for `std::error::Error`
//! integration and `parallel` for rayon-backed grid loops.
//!
//! Layout, bottom up:
//!
//! * [`tensor`], [`nullframe`]: pointwise tensor algebra and the null frame
//!   adapted to outgoing Minkowski cones.
//! * [`grid`], [`stencil`], [`analytic`]: grids, spacetime windows, finite
//!   difference stencils and closed-form test functions.
//! * [`geometry`]: Christoffel symbols, Ricci, the gauge vector and the
//!   reduced right-hand side.
//! * [`vectorfields`]: translations, rotations, boosts and scaling.
//! * [`initdata`]: constraint-satisfying Cauchy data and the mass split.
//! * [`evolution`]: method-of-lines evolution and the Kirchhoff oracle.
//! * [`asymptotics`]: characteristic ODE systems along outgoing rays.
//! * [`diagnostics`]: weighted energies, inequality ratios and decay fits.
#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod analytic;
pub mod asymptotics;
pub mod diagnostics;
pub mod error;
pub mod evolution;
pub mod fit;
pub mod geometry;
pub mod grid;
pub mod initdata;
pub mod math;
pub mod nullframe;
pub mod quadrature;
pub mod stencil;
pub mod tensor;
pub mod vectorfields;

pub use error::{Error, Result};
