use std::sync::Arc;

use rayon::prelude::*;

use super::mesh::{BcAssignment, TriangleMesh};
use super::FemError;
use crate::triangle::Letter;

/// Compressed sparse rows with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    fn pattern(n: usize, rows: Vec<Vec<usize>>) -> Self {
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        for mut r in rows {
            r.sort_unstable();
            r.dedup();
            col_idx.extend(r);
            row_ptr.push(col_idx.len());
        }
        let nnz = col_idx.len();
        Self { n, row_ptr, col_idx, values: vec![0.0; nnz] }
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        let row = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
        self.row_ptr[i] + row.binary_search(&j).expect("entry in sparsity pattern")
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let row = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
        row.binary_search(&j).map_or(0.0, |k| self.values[self.row_ptr[i] + k])
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (self.col_idx[k], self.values[k]))
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, a)| a * x[j]).sum();
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec(x, &mut y);
        y
    }

    /// Largest `|a_ij − a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        (0..self.n).flat_map(|i| self.row(i).map(move |(j, a)| (i, j, a))).map(|(i, j, a)| (a - self.get(j, i)).abs()).fold(0.0, f64::max)
    }
}

/// Stiffness and mass matrices on the free degrees of freedom.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub mesh: Arc<TriangleMesh>,
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
    /// Mesh vertex of each free degree of freedom.
    pub free: Vec<usize>,
    /// Free index of each mesh vertex, `None` when constrained.
    pub dof_of: Vec<Option<usize>>,
    pub has_dirichlet: bool,
}

impl AssembledSystem {
    pub fn dofs(&self) -> usize {
        self.free.len()
    }

    /// Scatters a free-DOF vector to all mesh vertices (zero where constrained).
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.mesh.vertices.len()];
        for (k, &v) in self.free.iter().enumerate() {
            out[v] = x[k];
        }
        out
    }

    /// Restricts a vertex vector to the free degrees of freedom.
    pub fn restrict(&self, x: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&v| x[v]).collect()
    }
}

type Local = ([usize; 3], [[f64; 3]; 3], [[f64; 3]; 3]);

fn local_matrices(mesh: &TriangleMesh, c: usize) -> Result<Local, FemError> {
    let cell = mesh.cells[c];
    let area = mesh.cell_area(c);
    if !(area > 1e-14) {
        return Err(FemError::DegenerateCell { cell: c, area });
    }
    let p = cell.map(|v| mesh.vertices[v]);
    // Gradients of the barycentric coordinates times 2·area.
    let g: [[f64; 2]; 3] = std::array::from_fn(|i| {
        let (q, r) = (p[(i + 1) % 3], p[(i + 2) % 3]);
        [q[1] - r[1], r[0] - q[0]]
    });
    let mut k = [[0.0; 3]; 3];
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = (g[i][0] * g[j][0] + g[i][1] * g[j][1]) / (4.0 * area);
            m[i][j] = area / 12.0 * if i == j { 2.0 } else { 1.0 };
        }
    }
    Ok((cell, k, m))
}

/// Linear-element stiffness and consistent mass with Dirichlet vertices eliminated.
pub fn assemble(mesh: Arc<TriangleMesh>, bc: &BcAssignment) -> Result<AssembledSystem, FemError> {
    let nv = mesh.vertices.len();
    let mut constrained = vec![false; nv];
    for e in &mesh.boundary {
        match bc.get(e.side) {
            None => return Err(FemError::UnassignedSide(e.side)),
            Some(Letter::Dirichlet) => {
                constrained[e.a] = true;
                constrained[e.b] = true;
            }
            Some(Letter::Neumann) => {}
        }
    }
    let free: Vec<usize> = (0..nv).filter(|&v| !constrained[v]).collect();
    let mut dof_of = vec![None; nv];
    for (k, &v) in free.iter().enumerate() {
        dof_of[v] = Some(k);
    }
    let locals: Vec<Local> = (0..mesh.cells.len()).into_par_iter().map(|c| local_matrices(&mesh, c)).collect::<Result<_, _>>()?;

    let n = free.len();
    let mut rows = vec![Vec::new(); n];
    for (cell, _, _) in &locals {
        for &a in cell {
            if let Some(i) = dof_of[a] {
                rows[i].extend(cell.iter().filter_map(|&b| dof_of[b]));
            }
        }
    }
    let mut stiffness = CsrMatrix::pattern(n, rows);
    let mut mass = stiffness.clone();
    for (cell, k, m) in &locals {
        for a in 0..3 {
            let Some(i) = dof_of[cell[a]] else { continue };
            for b in 0..3 {
                let Some(j) = dof_of[cell[b]] else { continue };
                let s = stiffness.slot(i, j);
                stiffness.values[s] += k[a][b];
                mass.values[s] += m[a][b];
            }
        }
    }
    Ok(AssembledSystem { mesh, stiffness, mass, free, dof_of, has_dirichlet: bc.has_dirichlet() && n < nv })
}
