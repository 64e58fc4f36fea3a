//! Entanglement harvested from the vacuum by a pair of static, gap-`ΔE`,
//! Gaussian-switched pointlike detectors, in flat space and in the weak
//! gravitational field of a constant-density star.
//!
//! The crate computes, at second order in the coupling `α`:
//!
//! * the local noise term `P` and the exchange term `X` of a detector pair in
//!   Minkowski space (closed forms plus independent numerical evaluations),
//! * their first-order corrections in the star's field, split into the exact
//!   "local dressing" parts (`tilde_p1`, `tilde_x1`) and the nonlocal
//!   propagator-correction integrals (`delta_p1`, `delta_x1`),
//! * the negativity `N` of the two-detector state and its normalised form
//!   `N' = 8π² N / α²`, with a full per-order breakdown.
//!
//! Modules are layered bottom-up: [`specfun`] (Faddeeva/erfc/Dawson),
//! [`quad`] (adaptive complex quadrature and ε-extrapolation), [`flat`]
//! (Minkowski closed forms and numeric counterparts), [`metric`] (star
//! geometry), [`gcorr`] (first-order corrections), [`negativity`] (assembly),
//! and [`config`] (batch front end used by the `udwh` binary).

pub mod cli;
pub mod error;
pub mod exec;
pub mod flat;
pub mod gcorr;
pub mod metric;
pub mod negativity;
pub mod quad;
pub mod specfun;

pub use error::{Error, Result};
