pub mod gamma;
pub mod ode;
pub mod quadrature;
pub mod roots;

pub use gamma::gamma_fn;
pub use ode::{integrate_system, integrate_system_observed, propagate_real, propagate_schrodinger, propagate_with, OdeState, PropagatorOptions};
pub use quadrature::{integrate, integrate_with_error, QuadratureResult, QuadratureSpec, TailSubstitution};
pub use roots::{find_root, minimize_scalar};
