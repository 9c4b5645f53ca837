//! Nodal domain counting on sampled fields and Courant-type checks.

mod bounds;
mod count;
mod ecp;
mod field;
mod rhombus;
mod sweep;

pub use bounds::{binomial, product_lift, product_spectrum, sphere_bounds, LiftOutcome, LiftReport, SphereBounds};
pub use count::{count_nodal_domains, Label, LabelRun, NodalPartition};
pub use ecp::{
    counterexample_rhombus_neumann, ecp_check, kappa, phi2_nodal_segments, phi2_plus_one, AnalyticCounterexample, CourantIndex,
    EcpReport, EcpVerdict, UNCERTAIN_LIMIT,
};
pub use field::{Grid, SampledField};
pub use rhombus::RhombusEigenbasis;
pub use sweep::{coefficient_sweep, lin_space, log_space, CountChange, SweepEntry, SweepResult};

use crate::fem::FemError;

/// Default number of grid points along the longer side of the bounding box.
pub const DEFAULT_GRID: usize = 801;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NodalError {
    #[error("grid needs at least 3 points per side, got {0}")]
    GridTooSmall(usize),
    #[error("field cannot be evaluated at ({}, {})", .0[0], .0[1])]
    Sampling([f64; 2]),
    #[error("field has non-finite values")]
    NonFinite,
    #[error("fields are not sampled on one grid")]
    GridMismatch,
    #[error("field vanishes identically")]
    ZeroField,
    #[error("grid too coarse: h = {h:.3e} gives max|grad|·h / max|f| = {ratio:.3}")]
    Underresolved { h: f64, ratio: f64 },
    #[error("count changes under refinement: {coarse} at h, {fine} at h/2")]
    Unstable { coarse: usize, fine: usize },
    #[error("eigenvalue {0} matches no cluster of the spectrum")]
    NoCluster(f64),
    #[error("sweep parameters must be sorted")]
    UnsortedSweep,
    #[error("scale parameter must be positive, got {0}")]
    InvalidEpsilon(f64),
    #[error("fiber spectrum needs 0 followed by a positive second eigenvalue")]
    FiberTooShort,
    #[error("dimension must be at least 1")]
    InvalidDimension,
    #[error("mesh is not symmetric under the rhombus reflections")]
    AsymmetricMesh,
    #[error("eigenvalue index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("eigenspace {index} has no member of class {class}")]
    NoClassMember { index: usize, class: String },
    #[error(transparent)]
    Fem(#[from] FemError),
}
