//! Numerical laboratory for Gauss-Bonnet identities.
//!
//! The crate computes the Gauss-Bonnet-Chern density of a Riemannian metric
//! given in coordinates, assembles the polyhedral Gauss-Bonnet formula for
//! regions with corners, and runs thick-part exhaustions on small models of
//! moduli spaces of hyperbolic surfaces, comparing every integral against an
//! exact Euler-characteristic oracle.
//!
//! Module map:
//! - [`chart`]: coordinate charts with a metric evaluator and a builtin catalog.
//! - [`curvature`]: Christoffel symbols, the Riemann tensor, orthonormal frames.
//! - [`density`]: the Gauss-Bonnet-Chern density by permutation sum and by Pfaffian.
//! - [`region`]: constraint regions (manifolds with corners), faces, outer angles,
//!   second fundamental forms.
//! - [`assembly`]: closed-manifold and polyhedral Gauss-Bonnet reports, residual
//!   bounds, exhaustion tables.
//! - [`moduli`]: the once-punctured-torus model (Fricke triples, systoles), the
//!   thin-part model metric and the modular-curve area bookkeeping.
//! - [`chi`]: exact rational Euler-characteristic oracles (Bernoulli numbers,
//!   zeta at negative odd integers).
//! - [`quad`]: deterministic adaptive Gauss-Legendre quadrature and seeded
//!   Monte Carlo for constraint regions.

pub mod assembly;
pub mod chart;
pub mod chi;
pub mod curvature;
pub mod density;
pub mod linalg;
pub mod moduli;
pub mod quad;
pub mod region;

mod error;

pub use error::{Error, Result};
