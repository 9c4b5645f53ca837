use std::collections::HashMap;
use std::sync::Arc;

use super::field::SampledField;
use super::NodalError;
use crate::fem::{solve_level_pair, BcAssignment, LevelPair, MeshDomain, P1Field, PointLocator, SolveOptions, TriangleMesh};
use crate::geometry::{Polygon, Reflection};
use crate::spectrum::{same_cluster, DEGENERACY_TOL};
use crate::triangle::{Letter, SymmetryClass};

/// Lowest finite-element eigenpairs of the rhombus with one boundary condition on all sides,
/// with the vertex permutations induced by the two diagonal reflections.
#[derive(Debug, Clone)]
pub struct RhombusEigenbasis {
    pub letter: Letter,
    pub pair: LevelPair,
    locator: Arc<PointLocator>,
    mirrors: [Vec<usize>; 2],
}

fn mirror_map(mesh: &TriangleMesh, r: Reflection) -> Result<Vec<usize>, NodalError> {
    let key = |p: [f64; 2]| ((p[0] * 1e8).round() as i64, (p[1] * 1e8).round() as i64);
    let index: HashMap<(i64, i64), usize> = mesh.vertices.iter().enumerate().map(|(i, &p)| (key(p), i)).collect();
    mesh.vertices
        .iter()
        .map(|&p| index.get(&key(r.apply(p))).copied().ok_or(NodalError::AsymmetricMesh))
        .collect()
}

impl RhombusEigenbasis {
    /// Solves on `level − 1` and `level`; eigenvectors come from `level`.
    pub fn compute(letter: Letter, level: usize, k: usize, opts: &SolveOptions) -> Result<Self, NodalError> {
        let pair = solve_level_pair(MeshDomain::Rhombus, &BcAssignment::uniform(4, letter), level, k, opts)?;
        let mesh = pair.fine.mesh.clone();
        let mirrors = [mirror_map(&mesh, Reflection::long_diagonal())?, mirror_map(&mesh, Reflection::short_diagonal())?];
        let locator = Arc::new(PointLocator::new(mesh));
        Ok(Self { letter, pair, locator, mirrors })
    }

    /// Extrapolated eigenvalues, sorted.
    pub fn spectrum(&self) -> Vec<f64> {
        let mut v = self.pair.extrapolated.values.clone();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Positions (0-based) in the fine solution whose extrapolated eigenvalues cluster with
    /// that of eigenvalue `index` (1-based).
    pub fn cluster(&self, index: usize) -> Result<Vec<usize>, NodalError> {
        let values = &self.pair.extrapolated.values;
        let mu = *values.get(index.wrapping_sub(1)).ok_or(NodalError::IndexOutOfRange(index))?;
        Ok((0..values.len()).filter(|&j| same_cluster(values[j], mu, DEGENERACY_TOL)).collect())
    }

    /// Fine-level eigenvector `index` (1-based).
    pub fn vector(&self, index: usize) -> Result<Vec<f64>, NodalError> {
        self.pair.fine.eigenvectors.get(index.wrapping_sub(1)).cloned().ok_or(NodalError::IndexOutOfRange(index))
    }

    /// `¼(v + σ D∗v + τ M∗v + στ D∗M∗v)` on mesh vertices.
    pub fn class_component(&self, v: &[f64], class: SymmetryClass) -> Vec<f64> {
        let (s, t) = (class.sigma.value(), class.tau.value());
        let [d, m] = &self.mirrors;
        (0..v.len()).map(|i| 0.25 * (v[i] + s * v[d[i]] + t * v[m[i]] + s * t * v[d[m[i]]])).collect()
    }

    /// The member of the eigenspace of `index` with symmetry `class`: the largest class
    /// component among the cluster's eigenvectors, scaled to unit maximum.
    pub fn class_vector(&self, index: usize, class: SymmetryClass) -> Result<Vec<f64>, NodalError> {
        let best = self
            .cluster(index)?
            .into_iter()
            .map(|j| self.class_component(&self.pair.fine.eigenvectors[j], class))
            .max_by(|a, b| max_abs(a).total_cmp(&max_abs(b)))
            .expect("clusters are nonempty");
        let scale = max_abs(&best);
        if scale < 1e-6 * max_abs(&self.pair.fine.eigenvectors[index - 1]) {
            return Err(NodalError::NoClassMember { index, class: class.to_string() });
        }
        Ok(best.iter().map(|x| x / scale).collect())
    }

    /// Symmetry class of eigenvector `index` when it is (numerically) pure.
    pub fn class_of(&self, index: usize) -> Result<Option<SymmetryClass>, NodalError> {
        let v = self.vector(index)?;
        let total = max_abs(&v);
        Ok(SymmetryClass::ALL.into_iter().find(|&c| max_abs(&self.class_component(&v, c)) > (1.0 - 1e-6) * total))
    }

    pub fn field(&self, values: Vec<f64>, points: usize) -> Result<SampledField, NodalError> {
        let f = P1Field::new(self.locator.clone(), values);
        SampledField::sample_partial("rhombus", &Polygon::rhombus(), points, |p| f.eval(p))
    }
}

pub(crate) fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}
