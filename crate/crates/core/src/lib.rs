//! Exact computations in cluster algebras of affine type A.
//!
//! * [`laurent`]: integer Laurent polynomials, the value type of every cluster variable.
//! * [`quiver`]: quivers as skew-symmetric matrices, mutation, isomorphism and
//!   recognition of the Ã(p, q) mutation classes.
//! * [`engine`]: seeds, the exchange relation, bounded exchange graphs,
//!   denominator vectors and Jacobian independence tests.
//! * [`annulus`]: the marked annulus C(p, q) through its universal cover: arcs,
//!   crossing numbers, triangulations, flips, Ptolemy relations.
//! * [`prooflab`]: checkers for the identities and combinatorial claims behind
//!   the unistructurality argument for type Ã.
//!
//! The `examples/` directory has one runnable program per capability.

pub mod annulus;
pub mod engine;
pub mod laurent;
pub mod prooflab;
pub mod quiver;

pub use annulus::{ArcKind, ArcLift, Endpoint, MarkedAnnulus, Side, Triangulation};
pub use engine::{ExchangeGraph, Seed};
pub use laurent::LaurentPoly;
pub use quiver::{Quiver, TypeLabel};
