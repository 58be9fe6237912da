//! Euclidean projections onto spectral vector and matrix cones.
//!
//! A spectral matrix cone is the closed epigraph of the perspective of a
//! spectral (or unitarily invariant) matrix function. Projecting a matrix
//! point onto such a cone reduces to projecting its eigenvalues (or singular
//! values) onto the matching spectral *vector* cone, at a cost that is
//! negligible next to the decomposition itself. This crate provides:
//!
//! * the six vector-cone projections (logarithmic, inverse, entropy,
//!   geometric-mean, l1-norm and sum-of-largest-entries cones), with dual
//!   membership tests and KKT verification ([`vcones`]);
//! * the eigenvalue / singular-value reduction for the matrix counterparts
//!   (log-determinant, trace-inverse, matrix entropy, root-determinant,
//!   nuclear-norm and sum-of-largest-eigenvalues cones) ([`mcones`]);
//! * the two generic projection engines behind the systematic cones: a
//!   structure-exploiting Newton method and a Mehrotra-style primal-dual
//!   interior-point fallback ([`engines`]);
//! * a compact operator-splitting solver for conic programs in standard
//!   form that accepts spectral cone blocks directly ([`solver`]);
//! * seeded generators for four benchmark problem families, each in a
//!   spectral and a PSD-canonicalized formulation ([`problems`]);
//! * brute-force reference oracles used by the verification suite
//!   ([`oracles`], [`verify`]).

pub mod engines;
pub mod io;
pub mod linalg;
pub mod mcones;
pub mod oracles;
pub mod packing;
pub mod problems;
pub mod solver;
pub mod types;
pub mod vcones;
pub mod verify;

pub use packing::{pack_sym, unpack_sym, PackedSym};
pub use types::{ConeKind, ConeSpec, Error, ProjStats, Result, VPoint};
