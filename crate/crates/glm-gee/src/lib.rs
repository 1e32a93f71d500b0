//! General linear (GL) time-stepping methods that carry an asymptotically
//! correct estimate of their own global error.
//!
//! A method is a [`Tableau`] `(A, U, B, V)` with two carried values: either the
//! solution and its error estimate ([`Form::Yeps`]) or two solutions whose
//! leading errors differ by a fixed ratio γ ([`Form::Yytilde`]).
//!
//! ```
//! use glm_gee::{catalog, integrator, problems};
//!
//! let method = catalog::tableau("GLM-A4")?;
//! let p = problems::prince42(0.0);
//! let trace = integrator::integrate(&method, &p, 0.0, &p.y0, 2.0,
//!     &integrator::StepController::fixed(0.0125))?;
//! let last = trace.last();
//! let err = last.true_error.as_ref().unwrap()[0];
//! assert!((last.eps_global[0] - err).abs() < 0.01 * err.abs());
//! # Ok::<(), glm_gee::Error>(())
//! ```

pub mod catalog;
pub mod constructors;
pub mod error;
pub mod experiments;
pub mod integrator;
pub mod linalg;
pub mod order;
pub mod problems;
pub mod rk;
pub mod stability;
pub mod tableau;
pub mod trees;

pub use error::{Error, Result};
pub use integrator::{integrate, GeeState, IntegrationTrace, StepController};
pub use order::{verify_order, OrderReport};
pub use tableau::{validate, Form, PreconsistencyVectors, Tableau, ValidationReport};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/overview.md")]
    mod overview {}
    #[doc = include_str!("../../../book/src/methods.md")]
    mod methods {}
    #[doc = include_str!("../../../book/src/integrating.md")]
    mod integrating {}
    #[doc = include_str!("../../../book/src/constructors.md")]
    mod constructors {}
    #[doc = include_str!("../../../book/src/stability.md")]
    mod stability {}
}
