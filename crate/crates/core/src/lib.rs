//! Energy-Casimir steady states of the gravitational Vlasov–Poisson system,
//! the functionals of the stability theory, and particle experiments probing
//! their dynamical stability.

pub mod ensemble;
pub mod dynamics;
pub mod error;
pub mod functionals;
pub mod gravity;
pub mod ode;
pub mod quad;
pub mod registry;
pub mod roots;
pub mod stability;
pub mod steady;
pub mod tree;
pub mod verify;

pub use error::{Error, Result};
