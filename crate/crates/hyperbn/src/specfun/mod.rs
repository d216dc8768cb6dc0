//! Special functions: gamma, Gauss hypergeometric, associated Legendre
//! functions on the cut `cosh ρ > 1`, spherical functions and the
//! Plancherel density.

pub mod gamma;
pub mod hyper;
pub mod legendre;
pub mod spherical;

pub use gamma::{gamma, ln_gamma, ln_gamma_complex, recip_gamma};
pub use hyper::{hyp2f1, hyp2f1_regularized, HypergeometricParams};
pub use legendre::{
    legendre_p, legendre_p_deriv, legendre_p_kappa, legendre_p_kappa_deriv, legendre_p_lower_deriv,
    legendre_p_series_deriv, LegendreParams,
};
pub use spherical::{plancherel_density, spherical_fn, spherical_fn_profile};
