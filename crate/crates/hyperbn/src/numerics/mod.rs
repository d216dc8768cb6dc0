//! Numerical engines shared by every other module.

pub mod eig;
pub mod fd;
pub mod gauss;
pub mod interp;
pub mod ode;
pub mod quad;
pub mod roots;

pub use interp::cubic_interpolate;
pub use eig::{smallest_generalized_eigenvalue, DenseSymmetricPair, EigenPair};
pub use ode::{ode_integrate, OdeOptions, OdeSolution, OdeStatus};
pub use quad::{
    integrate_adaptive, integrate_adaptive_rel, integrate_semi_infinite,
    integrate_semi_infinite_rel, QuadratureResult,
};
pub use roots::{find_root, scan_sign_changes, scan_sign_changes_with, Bracket};
