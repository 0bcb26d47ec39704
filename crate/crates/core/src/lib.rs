//! Computational toolkit for cut-and-project sets and bounded remainder sets.
//!
//! The crate generates finite patches of model sets `Λ(Γ, W)`, measures
//! Birkhoff-sum discrepancy of irrational rotations, tests bounded distance
//! equivalence of point sets via bipartite matching with Hall-condition
//! witnesses, and builds/verifies piecewise-translation equidecompositions
//! up to measure zero.
//!
//! Modules mirror the pipeline:
//!
//! - [`lattice`]: lattices in `R^m x R^n`, general-position checks, kernel
//!   splitting, reduction to special form.
//! - [`window`]: bounded regions of `R^d` with exact measure, margin-aware
//!   membership and the `Z^d`-multiplicity function `chi`.
//! - [`modelset`]: finite patches of model sets and point-counting functions.
//! - [`discrepancy`]: discrepancy profiles, BRS classification, two-window
//!   gap tests and G-uniformity scans.
//! - [`matching`]: bipartite matching, Hall witnesses, bounded-distance
//!   matching of patches and the orbit-enumeration construction.
//! - [`equidecomp`]: piecewise translations and Monte Carlo verification of
//!   equidecomposability up to measure zero.
//!
//! All types are immutable after construction and all operations are pure,
//! so everything can be shared across threads freely.

pub mod discrepancy;
pub mod equidecomp;
mod error;
mod group;
pub mod lattice;
pub mod matching;
pub mod modelset;
pub mod window;

pub use error::{Error, Result};
pub use group::GroupElement;

pub use discrepancy::{BrsEvidence, BrsVerdict, DiscrepancyProfile, UniformityReport};
pub use equidecomp::{PartitionReport, PiecewiseTranslation, Verdict};
pub use lattice::{
    DiagonalSplitMap, IndependenceReport, LatticeBasis, LatticePoint, SpecialFormLattice,
};
pub use matching::{BipartiteInstance, HallCheck, MatchingResult, OrbitEnumeration};
pub use modelset::{CountMode, Patch, PatchPoint};
pub use window::{MembershipStatus, MembershipVerdict, Window};

/// Absolute comparison tolerance used throughout unless an operation states
/// its own.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Snap width for boundary decisions: coordinates within this distance of a
/// face are treated as lying on the face before the half-open rule applies.
pub const BOUNDARY_SNAP: f64 = 1e-12;
