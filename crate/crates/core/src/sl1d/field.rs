use super::Topology;
use crate::linalg::fd_weights;

/// A function tabulated on a uniform grid, optionally with its first three derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct Field1d {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub derivatives: Option<[Vec<f64>; 3]>,
    pub topology: Topology,
}

impl Field1d {
    pub fn new(grid: Vec<f64>, values: Vec<f64>, topology: Topology) -> Self {
        assert_eq!(grid.len(), values.len(), "grid and values differ in length");
        Self {
            grid,
            values,
            derivatives: None,
            topology,
        }
    }

    pub fn with_derivatives(mut self, derivatives: [Vec<f64>; 3]) -> Self {
        assert!(derivatives.iter().all(|d| d.len() == self.values.len()));
        self.derivatives = Some(derivatives);
        self
    }

    /// Sample `f` and its derivatives on `grid`.
    pub fn from_fn<F, D1, D2, D3>(grid: Vec<f64>, topology: Topology, f: F, d: (D1, D2, D3)) -> Self
    where
        F: Fn(f64) -> f64,
        D1: Fn(f64) -> f64,
        D2: Fn(f64) -> f64,
        D3: Fn(f64) -> f64,
    {
        let values = grid.iter().map(|&x| f(x)).collect();
        let ders = [
            grid.iter().map(|&x| (d.0)(x)).collect(),
            grid.iter().map(|&x| (d.1)(x)).collect(),
            grid.iter().map(|&x| (d.2)(x)).collect(),
        ];
        Self::new(grid, values, topology).with_derivatives(ders)
    }

    /// Attach finite-difference derivatives computed from the values.
    pub fn with_fd_derivatives(self) -> Self {
        let h = self.spacing();
        let d = grid_derivatives(&self.values, h, self.topology);
        self.with_derivatives(d)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.grid[1] - self.grid[0]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn eval(&self, x: f64) -> f64 {
        interpolate(&self.grid, self.spacing(), &self.values, self.topology, x)
    }
}

/// Derivatives of orders 1..=3 by 7-point finite differences (fourth order or better).
pub fn grid_derivatives(values: &[f64], h: f64, topology: Topology) -> [Vec<f64>; 3] {
    const W: usize = 7;
    let n = values.len();
    assert!(n >= W, "need at least {W} samples");
    let mut out = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let nodes: Vec<f64> = (0..W).map(|k| k as f64).collect();
    let table: Vec<Vec<Vec<f64>>> = (0..W).map(|p| fd_weights(p as f64, &nodes, 3)).collect();
    let scale = [h, h * h, h * h * h];
    for i in 0..n {
        let (start, pos) = match topology {
            Topology::Circle => (i as isize - 3, 3),
            Topology::Interval => {
                let s = i.saturating_sub(3).min(n - W);
                (s as isize, i - s)
            }
        };
        let w = &table[pos];
        for k in 0..3 {
            let mut acc = 0.0;
            for (j, wj) in w[k + 1].iter().enumerate() {
                let idx = (start + j as isize).rem_euclid(n as isize) as usize;
                acc += wj * values[idx];
            }
            out[k][i] = acc / scale[k];
        }
    }
    out
}

/// Local degree-5 Lagrange interpolation of uniformly tabulated values.
pub fn interpolate(grid: &[f64], h: f64, values: &[f64], topology: Topology, x: f64) -> f64 {
    const W: usize = 6;
    let n = values.len();
    let s = (x - grid[0]) / h;
    let (base, s) = match topology {
        Topology::Circle => {
            let period = n as f64;
            let s = s.rem_euclid(period);
            (s.floor() as isize - 2, s)
        }
        Topology::Interval => {
            let b = (s.floor() as isize - 2).clamp(0, (n - W) as isize);
            (b, s)
        }
    };
    let nodes: Vec<f64> = (0..W).map(|k| (base + k as isize) as f64).collect();
    let w = fd_weights(s, &nodes, 0);
    (0..W)
        .map(|k| {
            let idx = (base + k as isize).rem_euclid(n as isize) as usize;
            w[0][k] * values[idx]
        })
        .sum()
}
