//! Exact topological-recursion invariants of spectral curves, computed in
//! local branchpoint charts, and the colored stable-graph sum of
//! intersection numbers they are compared with.
//!
//! Everything is generic over [`ring::Scalar`]; the aliases below fix the
//! usual backends.

pub mod ring;
pub mod series;
pub mod poly;
pub mod curve;
pub mod localdata;
pub mod builtins;
pub mod closedforms;
pub mod recursion;
pub mod intersect;
pub mod stablegraphs;
pub mod verify;
pub mod report;

/// Exact scalars: rationals with adjoined square roots.
pub type Exact = ring::Surd;
/// Tolerance-compared complex floats.
pub type Float = ring::ComplexFloat;
/// Polynomials in formal markers over the exact field.
pub type Symbolic = ring::MarkerPoly<ring::Surd>;

pub type ExactData = localdata::LocalSpectralData<Exact>;
pub type ExactTensor = recursion::InvariantTensor<Exact>;
pub type FloatData = localdata::LocalSpectralData<Float>;
