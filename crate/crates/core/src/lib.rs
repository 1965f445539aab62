//! Newton-polyhedron combinatorics and numerical singularity probes for mixed
//! polynomials `f(z, z̄)` and one-parameter families `f(t, z, z̄)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`mixedpoly`] parses, evaluates and differentiates mixed polynomials.
//! * [`newton`] builds the Newton polyhedron exactly and enumerates its
//!   compact faces and essential non-compact faces.
//! * [`degeneracy`] decides (monomial faces) or numerically probes (all
//!   other faces) strong non-degeneracy.
//! * [`tameness`] estimates radii of local tameness along vanishing
//!   coordinate subspaces.
//! * [`family`] handles deformation families: specialization, Newton
//!   constancy, admissibility, strata and branched-covering pullbacks.
//! * [`probe`] is the truncated-series arc engine used to test Whitney (b)
//!   and Thom `a_f` along analytic arcs, plus smoothness spot-checks.

pub mod degeneracy;
mod error;
pub mod family;
mod linalg;
pub mod mixedpoly;
pub mod newton;
mod optim;
pub mod probe;
mod seed;
mod subset;
pub mod tameness;

pub use error::{Error, Result};
pub use mixedpoly::{Complex, MixedMonomial, MixedPolynomial, MonomialKey, WirtingerPair};
pub use subset::Subset;
