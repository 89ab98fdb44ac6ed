//! Birectangle partitions of the flat torus from a transverse pair of
//! irrational linear foliations, anchor-point selection along a walk,
//! semi-Markov validation, transition-matrix extraction, and the coding /
//! Lebesgue-number diagnostics.
//!
//! Geometry is generic over a scalar: exact quadratic-field values for
//! deterministic (single-matrix) experiments, tolerance-tracked floats for
//! random-walk experiments. Every predicate bottoms out in an exact or
//! tolerance-guarded sign; an undecidable sign surfaces as an error instead
//! of a silent guess.
//!
//! Coordinates: a point of the torus R^2/Z^2 is written xi*u_plus +
//! upsilon*u_minus with u_plus, u_minus the (unit) foliation directions.
//! The leaves of the expanding foliation run along u_plus ("horizontal");
//! mu_minus measures horizontal lengths, mu_plus vertical ones. The marked
//! point is the lattice origin.

use qfield::Undecided;
use thiserror::Error;

pub mod anchors;
pub mod chain;
pub mod cross;
pub mod frame;
pub mod lebesgue;
pub mod partition;

pub use anchors::{select_anchors, AnchorConfig, AnchorRecord, AnchorSequence};
pub use chain::{ChainDiagnostics, TorusChain};
pub use cross::build_partition;
pub use frame::FiberFrame;
pub use lebesgue::{lebesgue_number, Ball, Cover, FlatMetric};
pub use partition::{check_semi_markov, refine, transition_matrices, Birect, Partition, SemiMarkovReport};

#[derive(Debug, Error)]
pub enum PartitionError {
    #[error("foliation directions coincide or are rational: {0}")]
    DegenerateDirections(String),
    #[error("geometric predicate undecidable at working tolerance")]
    Undecidable,
    #[error("arc construction exploded past the configured cap of {0} crossings")]
    ArcExplosion(usize),
    #[error("arc system dangling: {0}")]
    Dangling(String),
    #[error("complement component is not a birectangle: {0}")]
    NotBirectangle(String),
    #[error("partition invariant violated: {0}")]
    Invariant(String),
    #[error("boundary inclusion precondition violated: {0}")]
    InclusionViolated(String),
    #[error("frames inconsistent across fibers: {0}")]
    FrameMismatch(String),
    #[error("fiber {0} outside chain window [{1}, {2}]")]
    Window(i64, i64, i64),
    #[error("no good time found within margin {0}; extend the horizon")]
    NoGoodTime(i64),
    #[error("boundary limits not converged: {0}")]
    LimitsNotConverged(String),
    #[error("cover does not cover the surface (witness grid point {0:?})")]
    NotACover((f64, f64)),
    #[error("cover too fine: refining depth exceeds materialized window")]
    CoverTooFine,
}

impl From<Undecided> for PartitionError {
    fn from(_: Undecided) -> Self {
        PartitionError::Undecidable
    }
}
