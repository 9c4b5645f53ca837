use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::field::{grid_derivatives, interpolate, Field1d};
use super::problem::{Boundary, SlProblem, Topology};
use super::{CombinationSpec, Sl1dError};
use crate::linalg::{norm, orthogonalize, TridiagLu};

/// Relative gap below which two eigenvalues are treated as one cluster.
pub const DEGENERACY_TOL: f64 = 1e-8;

/// Symmetrized finite-difference matrix `M^{-1/2} A M^{-1/2}` with lumped mass `M`.
#[derive(Debug, Clone)]
pub struct Discretization {
    /// Node positions of the full grid (boundary nodes included on an interval).
    pub nodes: Vec<f64>,
    /// Node index of each unknown.
    pub unknowns: Vec<usize>,
    pub diag: Vec<f64>,
    /// Coupling between unknowns `r` and `r + 1`.
    pub off: Vec<f64>,
    /// Coupling between the last and first unknown on the circle.
    pub corner: Option<f64>,
    /// Lumped mass per unknown.
    pub mass: Vec<f64>,
    pub spacing: f64,
}

impl Discretization {
    pub fn new(problem: &SlProblem, grid_size: usize) -> Result<Self, Sl1dError> {
        let c = problem.coefficients();
        let length = problem.geometry().length();
        let start = problem.geometry().start();
        let h = length / grid_size as f64;
        let periodic = problem.boundary() == Boundary::Periodic;
        let n_nodes = if periodic { grid_size } else { grid_size + 1 };
        let nodes: Vec<f64> = (0..n_nodes).map(|i| start + i as f64 * h).collect();
        let half: Vec<f64> = (0..grid_size)
            .map(|i| c.k(start + (i as f64 + 0.5) * h))
            .collect();
        for (i, &k) in half.iter().enumerate() {
            if !(k > 0.0) {
                return Err(Sl1dError::CoefficientDomain {
                    name: "K",
                    x: start + (i as f64 + 0.5) * h,
                    value: k,
                });
            }
        }
        let g: Vec<f64> = nodes.iter().map(|&x| c.g(x)).collect();
        for (&x, &v) in nodes.iter().zip(&g) {
            if !(v > 0.0) {
                return Err(Sl1dError::CoefficientDomain { name: "G", x, value: v });
            }
            let k = c.k(x);
            if !(k > 0.0) {
                return Err(Sl1dError::CoefficientDomain { name: "K", x, value: k });
            }
        }
        let q: Vec<f64> = nodes.iter().map(|&x| c.q(x)).collect();

        let unknowns: Vec<usize> = match problem.boundary() {
            Boundary::Dirichlet => (1..grid_size).collect(),
            Boundary::Neumann | Boundary::Periodic => (0..n_nodes).collect(),
        };
        let n = unknowns.len();
        let mut a_diag = vec![0.0; n];
        let mut mass = vec![0.0; n];
        for (r, &i) in unknowns.iter().enumerate() {
            let (left, right, w) = if periodic {
                (half[(i + grid_size - 1) % grid_size], half[i], 1.0)
            } else if i == 0 {
                (0.0, half[0], 0.5)
            } else if i == grid_size {
                (half[grid_size - 1], 0.0, 0.5)
            } else {
                (half[i - 1], half[i], 1.0)
            };
            a_diag[r] = (left + right) / h + q[i] * w * h;
            mass[r] = g[i] * w * h;
        }
        let diag: Vec<f64> = a_diag.iter().zip(&mass).map(|(a, m)| a / m).collect();
        let off: Vec<f64> = (0..n.saturating_sub(1))
            .map(|r| -half[unknowns[r]] / h / (mass[r] * mass[r + 1]).sqrt())
            .collect();
        let corner = periodic.then(|| -half[grid_size - 1] / h / (mass[0] * mass[n - 1]).sqrt());
        Ok(Self {
            nodes,
            unknowns,
            diag,
            off,
            corner,
            mass,
            spacing: h,
        })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Dense row-major copy of the symmetric matrix.
    pub fn dense(&self) -> Vec<f64> {
        let n = self.len();
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            m[i * n + i] = self.diag[i];
        }
        for (i, &e) in self.off.iter().enumerate() {
            m[i * n + i + 1] += e;
            m[(i + 1) * n + i] += e;
        }
        if let Some(c) = self.corner {
            m[n - 1] += c;
            m[(n - 1) * n] += c;
        }
        m
    }

    fn norm_bound(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            if let Some(c) = self.corner {
                if i == 0 || i == n - 1 {
                    r += c.abs();
                }
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `sigma`.
    pub fn count_below(&self, sigma: f64) -> usize {
        match self.corner {
            None => sturm_count(&self.diag, &self.off, sigma),
            Some(_) => self.cyclic_count(sigma),
        }
    }

    fn cyclic_count(&self, sigma: f64) -> usize {
        let n = self.len();
        let m = n - 1;
        let inner = sturm_count(&self.diag[..m], &self.off[..m - 1], sigma);
        let w = self.border();
        let lu = self.inner_lu(sigma);
        let mut x = w.clone();
        lu.solve_in_place(&mut x);
        let schur = self.diag[m] - sigma - w.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
        inner + usize::from(schur < 0.0)
    }

    fn border(&self) -> Vec<f64> {
        let m = self.len() - 1;
        let mut w = vec![0.0; m];
        w[0] += self.corner.unwrap_or(0.0);
        w[m - 1] += self.off[m - 1];
        w
    }

    fn inner_lu(&self, sigma: f64) -> TridiagLu {
        let m = self.len() - 1;
        let d: Vec<f64> = self.diag[..m].iter().map(|a| a - sigma).collect();
        TridiagLu::new(&self.off[..m - 1], &d, &self.off[..m - 1])
    }

    /// Solve `(S - sigma I) x = b` in place.
    fn shifted_solve(&self, sigma: f64, b: &mut [f64]) {
        let n = self.len();
        match self.corner {
            None => {
                let d: Vec<f64> = self.diag.iter().map(|a| a - sigma).collect();
                TridiagLu::new(&self.off, &d, &self.off).solve_in_place(b);
            }
            Some(_) => {
                let m = n - 1;
                let w = self.border();
                let lu = self.inner_lu(sigma);
                let mut y = w.clone();
                lu.solve_in_place(&mut y);
                let mut z = b[..m].to_vec();
                lu.solve_in_place(&mut z);
                let mut schur = self.diag[m] - sigma - w.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>();
                if schur == 0.0 {
                    schur = f64::EPSILON * self.diag[m].abs().max(1.0);
                }
                let last = (b[m] - w.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>()) / schur;
                for i in 0..m {
                    b[i] = z[i] - y[i] * last;
                }
                b[m] = last;
            }
        }
    }

    /// The `count` lowest eigenvalues by bisection on the inertia count.
    pub fn lowest_eigenvalues(&self, count: usize) -> Vec<f64> {
        let (lo0, hi0) = self.norm_bound();
        let scale = lo0.abs().max(hi0.abs()).max(1.0);
        let mut out = Vec::with_capacity(count);
        let mut floor = lo0 - 1e-3 * scale;
        for j in 0..count {
            let (mut lo, mut hi) = (floor, hi0 + 1e-3 * scale);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid == lo || mid == hi {
                    break;
                }
                if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) + 1e-3 * f64::EPSILON * scale {
                    break;
                }
                if self.count_below(mid) > j {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let lambda = 0.5 * (lo + hi);
            out.push(lambda);
            floor = lo;
        }
        out
    }

    /// Eigenvectors of the symmetric matrix at the supplied eigenvalues.
    pub fn eigenvectors(&self, eigenvalues: &[f64], seed: u64) -> Vec<Vec<f64>> {
        let n = self.len();
        let (lo, hi) = self.norm_bound();
        let scale = lo.abs().max(hi.abs()).max(1.0);
        let group_gap = 1e-6 * scale;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(eigenvalues.len());
        let mut group_start = 0;
        for (j, &lambda) in eigenvalues.iter().enumerate() {
            if j > 0 && lambda - eigenvalues[j - 1] > group_gap {
                group_start = j;
            }
            let mut x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
            let shift = lambda + 4.0 * f64::EPSILON * scale;
            for _ in 0..5 {
                let nx = orthogonalize(&mut x, &vectors[group_start..j]);
                x.iter_mut().for_each(|v| *v /= nx);
                self.shifted_solve(shift, &mut x);
                let nx = norm(&x);
                x.iter_mut().for_each(|v| *v /= nx);
            }
            let nx = orthogonalize(&mut x, &vectors[group_start..j]);
            x.iter_mut().for_each(|v| *v /= nx);
            vectors.push(x);
        }
        vectors
    }
}

fn sturm_count(diag: &[f64], off: &[f64], sigma: f64) -> usize {
    let tiny = f64::MIN_POSITIVE / f64::EPSILON;
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let e2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        q = diag[i] - sigma - if i == 0 { 0.0 } else { e2 / q };
        if q.abs() < tiny {
            q = -tiny;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Computed eigenpairs of a Sturm-Liouville problem tabulated on a uniform grid.
#[derive(Debug, Clone)]
pub struct SlSpectrum {
    problem: SlProblem,
    grid: Vec<f64>,
    spacing: f64,
    eigenvalues: Vec<f64>,
    eigenfunctions: Vec<Vec<f64>>,
    derivatives: Vec<[Vec<f64>; 3]>,
}

/// The `count` lowest eigenpairs on a grid with `grid_size` cells.
pub fn solve_sl(problem: &SlProblem, grid_size: usize, count: usize) -> Result<SlSpectrum, Sl1dError> {
    if grid_size < 64 || count == 0 || count > grid_size / 8 {
        return Err(Sl1dError::Resolution { grid_size, count });
    }
    let disc = Discretization::new(problem, grid_size)?;
    let eigenvalues = disc.lowest_eigenvalues(count);
    let topology = problem.topology();
    match topology {
        Topology::Interval => {
            for w in eigenvalues.windows(2) {
                if w[1] - w[0] <= DEGENERACY_TOL * w[1].abs().max(1.0) {
                    return Err(Sl1dError::Degenerate { value: w[1] });
                }
            }
        }
        Topology::Circle => {
            for w in eigenvalues.windows(3) {
                if w[2] - w[0] <= DEGENERACY_TOL * w[2].abs().max(1.0) {
                    return Err(Sl1dError::Degenerate { value: w[2] });
                }
            }
        }
    }
    let vectors = disc.eigenvectors(&eigenvalues, 0x5eed);
    let n_nodes = disc.nodes.len();
    let mut eigenfunctions = Vec::with_capacity(count);
    for w in vectors {
        let mut u = vec![0.0; n_nodes];
        for (r, &i) in disc.unknowns.iter().enumerate() {
            u[i] = w[r] / disc.mass[r].sqrt();
        }
        let max = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if let Some(first) = u.iter().find(|v| v.abs() > 1e-7 * max) {
            if *first < 0.0 {
                u.iter_mut().for_each(|v| *v = -*v);
            }
        }
        eigenfunctions.push(u);
    }
    let derivatives = eigenfunctions
        .iter()
        .map(|u| grid_derivatives(u, disc.spacing, topology))
        .collect();
    Ok(SlSpectrum {
        problem: problem.clone(),
        grid: disc.nodes,
        spacing: disc.spacing,
        eigenvalues,
        eigenfunctions,
        derivatives,
    })
}

impl SlSpectrum {
    pub fn problem(&self) -> &SlProblem {
        &self.problem
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn topology(&self) -> Topology {
        self.problem.topology()
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Eigenvalue `λ_j`, 1-based.
    pub fn eigenvalue(&self, j: usize) -> f64 {
        self.eigenvalues[j - 1]
    }

    /// Tabulated eigenfunction `V_j`, 1-based.
    pub fn eigenfunction(&self, j: usize) -> &[f64] {
        &self.eigenfunctions[j - 1]
    }

    /// Tabulated derivatives of `V_j` of orders 1, 2, 3.
    pub fn eigenfunction_derivatives(&self, j: usize) -> &[Vec<f64>; 3] {
        &self.derivatives[j - 1]
    }

    /// `V_j` at an arbitrary point by local degree-5 interpolation.
    pub fn eval(&self, j: usize, x: f64) -> f64 {
        interpolate(&self.grid, self.spacing, self.eigenfunction(j), self.topology(), x)
    }

    /// `(V_1(x), ..., V_count(x))`.
    pub fn eval_all(&self, x: f64, count: usize) -> Vec<f64> {
        (1..=count).map(|j| self.eval(j, x)).collect()
    }

    pub fn eigenfunction_field(&self, j: usize) -> Field1d {
        Field1d::new(self.grid.clone(), self.eigenfunction(j).to_vec(), self.topology())
            .with_derivatives(self.eigenfunction_derivatives(j).clone())
    }

    /// `Σ c_j V_j` (with derivatives) for coefficients starting at index `first`.
    pub fn linear_combination(&self, first: usize, coefficients: &[f64]) -> Result<Field1d, Sl1dError> {
        let last = first + coefficients.len() - 1;
        if first == 0 || last > self.len() {
            return Err(Sl1dError::IndexOutOfRange { index: last, available: self.len() });
        }
        let n = self.grid.len();
        let mut values = vec![0.0; n];
        let mut ders = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for (offset, &c) in coefficients.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let j = first + offset;
            values.iter_mut().zip(self.eigenfunction(j)).for_each(|(y, v)| *y += c * v);
            for (acc, d) in ders.iter_mut().zip(self.eigenfunction_derivatives(j)) {
                acc.iter_mut().zip(d).for_each(|(y, v)| *y += c * v);
            }
        }
        Ok(Field1d::new(self.grid.clone(), values, self.topology()).with_derivatives(ders))
    }

    pub fn combination(&self, combo: &CombinationSpec) -> Result<Field1d, Sl1dError> {
        self.linear_combination(combo.m(), combo.coefficients())
    }

    /// CSV rows `index,eigenvalue,sign_changes`.
    pub fn to_csv(&self) -> Result<String, Sl1dError> {
        let mut out = String::from("index,eigenvalue,sign_changes\n");
        for j in 1..=self.len() {
            let s = super::count_sign_changes(self.eigenfunction(j), self.topology())?;
            out.push_str(&format!("{},{:.12e},{}\n", j, self.eigenvalue(j), s));
        }
        Ok(out)
    }
}
