//! Numerical toolkit for the higher-order Brezis–Nirenberg problem on
//! hyperbolic space.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`]: quadrature, root finding, ODE integration and a dense
//!   generalized symmetric eigensolver.
//! * [`specfun`]: gamma, Gauss hypergeometric, associated Legendre and
//!   spherical functions, and the Plancherel density.
//! * [`geometry`]: the Poincaré ball, geodesic balls and radial operators.
//! * [`constants`]: Sobolev, Hardy–Littlewood–Sobolev and spectral constants.
//! * [`eigen`]: first Dirichlet eigenvalues of `P1` and `P2` on geodesic balls.
//! * [`thresholds`]: the Legendre determinant and the quotient eigenvalue for
//!   the `k = 2` existence threshold.
//! * [`greens`]: heat kernels, resolvents and kernel certification.
//! * [`helgason`]: the radial spherical transform pair.
//! * [`bnsolver`]: shooting solver and certificates for radial solutions.
//!
//! Data-parallel loops go through [`par`], which uses rayon when the
//! `parallel` feature is enabled and plain iterators otherwise.

pub mod bnsolver;
pub mod constants;
pub mod eigen;
pub mod error;
pub mod geometry;
pub mod greens;
pub mod helgason;
pub mod numerics;
pub mod par;
pub mod specfun;
pub mod thresholds;

pub use error::{Error, Result};
pub use geometry::{GeodesicBall, ProblemDims, RadialProfile};
