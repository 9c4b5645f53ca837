//! Linear finite elements for Laplace eigenproblems on polygons with per-side boundary
//! conditions.

mod assembly;
mod eigen;
mod extrapolate;
mod inequalities;
mod interp;
mod mesh;

use std::sync::Arc;

pub use assembly::{assemble, AssembledSystem, CsrMatrix};
pub use eigen::{solve_lowest, solve_lowest_with, EigenResult, SolveOptions};
pub use extrapolate::{extrapolate, Extrapolated, PAIRING_THRESHOLD};
pub use inequalities::{
    inequality_chains, verify_inequalities, InequalityCheck, InequalityStatus, InequalityVerdict, Relation, Term, MAX_DEPTH,
};
pub use interp::{P1Field, PointLocator};
pub use mesh::{reference_mesh, BcAssignment, BoundaryEdge, MeshDomain, TriangleMesh, MAX_LEVEL};

use crate::triangle::{MixedProblemId, SpectrumColumn, TriangleDomain};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FemError {
    #[error("mesh level {0} exceeds the maximum of {MAX_LEVEL}")]
    Level(usize),
    #[error("cell {cell} is degenerate (area {area:e})")]
    DegenerateCell { cell: usize, area: f64 },
    #[error("nonconforming mesh: {0}")]
    Nonconforming(String),
    #[error("side {0} has no boundary condition")]
    UnassignedSide(u32),
    #[error("cannot parse mesh: {0}")]
    Parse(String),
    #[error("{requested} eigenpairs requested from {dofs} degrees of freedom")]
    TooManyEigenpairs { requested: usize, dofs: usize },
    #[error("factorization failed: {0}")]
    Factorization(String),
    #[error("no convergence after {iterations} iterations, residuals {residuals:?}")]
    NotConverged { iterations: usize, residuals: Vec<f64> },
    #[error("eigenpair {index} does not pair across levels (correlation {correlation:.3})")]
    Pairing { index: usize, correlation: f64 },
    #[error("{0}")]
    Mismatch(String),
}

/// Solutions on two consecutive levels and their extrapolation.
#[derive(Debug, Clone)]
pub struct LevelPair {
    pub coarse: EigenResult,
    pub fine: EigenResult,
    pub extrapolated: Extrapolated,
}

impl LevelPair {
    /// Every extrapolated value lies below its fine-level Galerkin value.
    pub fn monotone(&self) -> bool {
        self.coarse.eigenvalues.iter().zip(&self.fine.eigenvalues).all(|(c, f)| f <= &(c + 1e-9 * c.abs().max(1.0)))
    }
}

/// Solves on `level − 1` and `level` and extrapolates the lowest `k` eigenvalues.
pub fn solve_level_pair(domain: MeshDomain, bc: &BcAssignment, level: usize, k: usize, opts: &SolveOptions) -> Result<LevelPair, FemError> {
    if level == 0 {
        return Err(FemError::Mismatch("extrapolation needs level ≥ 1".into()));
    }
    let coarse_mesh = reference_mesh(domain, level - 1)?;
    let fine_mesh = Arc::new(coarse_mesh.refine());
    let coarse_mesh = Arc::new(coarse_mesh);
    let (coarse, fine) = rayon::join(
        || assemble(coarse_mesh, bc).and_then(|s| solve_lowest_with(&s, k, opts)),
        || assemble(fine_mesh, bc).and_then(|s| solve_lowest_with(&s, k, opts)),
    );
    let (coarse, fine) = (coarse?, fine?);
    let extrapolated = extrapolate(&coarse, &fine)?;
    Ok(LevelPair { coarse, fine, extrapolated })
}

/// A mixed triangle problem as an extrapolated spectrum column.
pub fn mixed_column(problem: MixedProblemId, level: usize, k: usize, opts: &SolveOptions) -> Result<(SpectrumColumn, LevelPair), FemError> {
    let domain = match problem.domain {
        TriangleDomain::Hemiequilateral => MeshDomain::Hemiequilateral,
        TriangleDomain::Equilateral => MeshDomain::Equilateral,
    };
    let pair = solve_level_pair(domain, &BcAssignment::for_problem(&problem), level, k, opts)?;
    let column = SpectrumColumn::computed(problem, pair.extrapolated.values.clone(), pair.extrapolated.errors.clone());
    Ok((column, pair))
}
