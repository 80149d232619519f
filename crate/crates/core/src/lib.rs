//! Exact analysis of piecewise contracting interval maps with affine branches.
//!
//! Given a map on `[c_0, c_N]` the crate computes the atom approximation of its
//! attractor, certifies periodic limits, gathers finite-horizon evidence for
//! Cantor limits through left-right recurrence of the boundary points, and
//! assembles the resulting decomposition of the attractor together with an
//! audit of the counting bounds it must satisfy.
//!
//! The core is generic over [`Scalar`], an exact rational type. The aliases
//! below fix the usual choices.

pub mod atoms;
pub mod bigint;
pub mod decomposition;
pub mod error;
pub mod export;
pub mod gallery;
mod kernel;
pub mod map;
pub mod orbit;
pub mod recurrence;
pub mod scalar;
pub mod symbolic;

pub use bigint::Int;
pub use atoms::{attractor_enclosure, expand_atoms, expand_atoms_capped, locate_in_atoms, Atom, AtomTree};
pub use decomposition::{
    assemble, classify_all, classify_limit, cross_validate, decompose, AuditStatus, BoundAudit, Budget, CantorEvidence,
    ComponentKind, ComponentRecord, CrossValidation, DecompositionReport, Fragment, FragmentKind,
};
pub use error::{Error, Result};
pub use map::{
    boundary_data, check_d_in_xtilde, validate_map, BoundaryData, Branch, DLabel, HypothesisFlags, Location,
    MapSpec, Partition, RawMapSpec, Tri,
};
pub use orbit::{
    detect_eventual_periodicity, iterate, word_fixed_point, OrbitSample, PeriodicOrbitCert, PeriodicityConfig,
    PeriodicityOutcome,
};
pub use recurrence::{
    build_class_graph, detect_lr, detect_lr_right_limits, minimal_classes, ClassGraph, ClassNode, DetectionConfig,
    LrRecurrenceReport, LrStatus, Side, Subject,
};
pub use scalar::{parse_pq, to_pq, Scalar};
pub use symbolic::{complexity, morse_hedlund_certify, ComplexityClass, ComplexityProfile, ItineraryWord, Symbol};

/// Arbitrary-precision rational, the default scalar.
pub type Rational = num_rational::Ratio<Int>;
/// Arbitrary-precision rational on the `num-bigint` backend.
pub type BigRational = num_rational::BigRational;
/// Fixed-width rationals for short computations; arithmetic overflow panics.
pub type Rational64 = num_rational::Rational64;
pub type Rational128 = num_rational::Ratio<i128>;

pub type Map = MapSpec<Rational>;
pub type Orbit = OrbitSample<Rational>;
pub type Cert = PeriodicOrbitCert<Rational>;
pub type Tree = AtomTree<Rational>;
pub type Report = DecompositionReport<Rational>;
