//! Distances and neighbourhood predicates on spaces of proper submanifolds of ℝⁿ.
//!
//! Submanifolds are represented by weighted, tangent-framed point samples
//! ([`manifolds::DiscretizedSubmanifold`]). On top of them the crate provides
//!
//! * the Grassmannian and Gauss-point distances and a compactified Hausdorff
//!   distance ([`geometry`]),
//! * the differential Fell metric `d_H`, the volume pseudo-metric `d_nu` and their
//!   sum `d_psi` ([`metrics`]),
//! * membership tests for the gs, ls, ms and ss basic neighbourhoods
//!   ([`neighborhoods`]),
//! * a scanning section and its pulled-back metric ([`scanning`]).

pub mod error;
pub mod geometry;
pub mod manifolds;
pub mod metrics;
pub mod neighborhoods;
pub mod scanning;

pub use error::{Error, Result};
