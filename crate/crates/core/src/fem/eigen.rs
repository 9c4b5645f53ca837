use std::fmt::Write as _;
use std::sync::Arc;

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::assembly::{AssembledSystem, CsrMatrix};
use super::mesh::TriangleMesh;
use super::FemError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Extra block columns beyond the requested count.
    pub guard: usize,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { guard: 5, tolerance: 1e-8, max_iterations: 500, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct EigenResult {
    pub mesh: Arc<TriangleMesh>,
    pub eigenvalues: Vec<f64>,
    /// Mass-orthonormal eigenvectors on all mesh vertices (zero where constrained).
    pub eigenvectors: Vec<Vec<f64>>,
    /// `‖A v − λ B v‖ / ‖B v‖` per pair.
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

impl EigenResult {
    pub fn level(&self) -> usize {
        self.mesh.level
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,level,eigenvalue,residual\n");
        for (i, (l, r)) in self.eigenvalues.iter().zip(&self.residuals).enumerate() {
            let _ = writeln!(out, "{},{},{:.12},{:.3e}", i + 1, self.mesh.level, l, r);
        }
        out
    }
}

fn ata(a: &[Vec<f64>], b: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(a.len(), b.len(), |i, j| crate::linalg::dot(&a[i], &b[j]))
}

fn combine(cols: &[Vec<f64>], w: &DMatrix<f64>, count: usize) -> Vec<Vec<f64>> {
    let n = cols[0].len();
    (0..count)
        .map(|j| {
            let mut out = vec![0.0; n];
            for (i, c) in cols.iter().enumerate() {
                let f = w[(i, j)];
                if f != 0.0 {
                    out.iter_mut().zip(c).for_each(|(o, x)| *o += f * x);
                }
            }
            out
        })
        .collect()
}

fn shifted_lower(a: &CsrMatrix, b: &CsrMatrix, shift: f64) -> Vec<Triplet<usize, usize, f64>> {
    let mut t = Vec::with_capacity(a.nnz() / 2 + a.n);
    for i in 0..a.n {
        for (j, v) in a.row(i) {
            if j <= i {
                t.push(Triplet::new(i, j, v - shift * b.get(i, j)));
            }
        }
    }
    t
}

/// Rayleigh-Ritz on span(Y): returns Ritz values and mass-orthonormal Ritz vectors with their
/// images under A and B.
#[allow(clippy::type_complexity)]
fn rayleigh_ritz(
    y: &[Vec<f64>],
    ay: &[Vec<f64>],
    by: &[Vec<f64>],
) -> Result<(Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<Vec<f64>>), FemError> {
    let p = y.len();
    let bh = ata(y, by);
    let ah = ata(y, ay);
    let bh = (&bh + bh.transpose()) * 0.5;
    let ah = (&ah + ah.transpose()) * 0.5;
    // Diagonal scaling keeps the small Cholesky well conditioned.
    let scale: Vec<f64> = (0..p).map(|i| 1.0 / bh[(i, i)].sqrt()).collect();
    let bs = DMatrix::from_fn(p, p, |i, j| bh[(i, j)] * scale[i] * scale[j]);
    let as_ = DMatrix::from_fn(p, p, |i, j| ah[(i, j)] * scale[i] * scale[j]);
    let chol = bs.cholesky().ok_or_else(|| FemError::Factorization("projected mass matrix is not definite".into()))?;
    let l = chol.l();
    let linv = l.clone().try_inverse().ok_or_else(|| FemError::Factorization("singular projected mass".into()))?;
    let c = &linv * &as_ * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let q = DMatrix::from_fn(p, p, |i, j| eig.eigenvectors[(i, order[j])]);
    let mut w = linv.transpose() * q;
    for i in 0..p {
        for j in 0..p {
            w[(i, j)] *= scale[i];
        }
    }
    let theta = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    Ok((theta, combine(y, &w, p), combine(ay, &w, p), combine(by, &w, p)))
}

/// Lowest `k` generalized eigenpairs by shift-invert subspace iteration.
pub fn solve_lowest(system: &AssembledSystem, k: usize) -> Result<EigenResult, FemError> {
    solve_lowest_with(system, k, &SolveOptions::default())
}

pub fn solve_lowest_with(system: &AssembledSystem, k: usize, opts: &SolveOptions) -> Result<EigenResult, FemError> {
    let n = system.dofs();
    if k == 0 || 4 * k > n {
        return Err(FemError::TooManyEigenpairs { requested: k, dofs: n });
    }
    let (a, b) = (&system.stiffness, &system.mass);
    let shift = if system.has_dirichlet { 0.0 } else { -1.0 };
    let lower = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &shifted_lower(a, b, shift))
        .map_err(|e| FemError::Factorization(format!("{e:?}")))?;
    let llt = lower.sp_cholesky(Side::Lower).map_err(|e| FemError::Factorization(format!("{e:?}")))?;

    let p = (k + opts.guard).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x: Vec<Vec<f64>> = (0..p).map(|_| (0..n).map(|_| rng.random::<f64>() - 0.5).collect()).collect();
    let mut residuals = vec![f64::INFINITY; k];
    let mut bx: Vec<Vec<f64>> = x.iter().map(|c| b.apply(c)).collect();
    for iteration in 1..=opts.max_iterations {
        let mut rhs = Mat::<f64>::from_fn(n, p, |i, j| bx[j][i]);
        llt.solve_in_place(rhs.as_mut());
        let y: Vec<Vec<f64>> = (0..p).map(|j| (0..n).map(|i| rhs[(i, j)]).collect()).collect();
        let ay: Vec<Vec<f64>> = y.iter().map(|c| a.apply(c)).collect();
        let by: Vec<Vec<f64>> = y.iter().map(|c| b.apply(c)).collect();
        let (t, xs, ax, bxs) = rayleigh_ritz(&y, &ay, &by)?;
        for i in 0..k {
            let r: f64 = ax[i].iter().zip(&bxs[i]).map(|(u, v)| (u - t[i] * v).powi(2)).sum::<f64>().sqrt();
            residuals[i] = r / crate::linalg::norm(&bxs[i]);
        }
        x = xs;
        bx = bxs;
        if residuals.iter().all(|&r| r < opts.tolerance) {
            let eigenvectors = x[..k]
                .iter()
                .map(|v| {
                    let peak = v.iter().copied().fold(0.0f64, |m, s| if s.abs() > m.abs() { s } else { m });
                    let sign = if peak < 0.0 { -1.0 } else { 1.0 };
                    system.expand(&v.iter().map(|s| sign * s).collect::<Vec<_>>())
                })
                .collect();
            return Ok(EigenResult {
                mesh: system.mesh.clone(),
                eigenvalues: t[..k].to_vec(),
                eigenvectors,
                residuals,
                iterations: iteration,
            });
        }
    }
    Err(FemError::NotConverged { iterations: opts.max_iterations, residuals })
}
