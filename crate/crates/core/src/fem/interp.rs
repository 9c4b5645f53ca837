use std::sync::Arc;

use super::mesh::TriangleMesh;
use crate::geometry::Point;

const BARY_TOL: f64 = 1e-9;

/// Uniform bucket grid over cell bounding boxes.
#[derive(Debug, Clone)]
pub struct PointLocator {
    mesh: Arc<TriangleMesh>,
    origin: Point,
    pitch: [f64; 2],
    dims: [usize; 2],
    bucket_start: Vec<usize>,
    bucket_cells: Vec<usize>,
}

impl PointLocator {
    pub fn new(mesh: Arc<TriangleMesh>) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in &mesh.vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        let side = (mesh.cells.len() as f64).sqrt().ceil().max(1.0) as usize;
        let dims = [side, side];
        let pitch = [((hi[0] - lo[0]) / side as f64).max(1e-300), ((hi[1] - lo[1]) / side as f64).max(1e-300)];
        let bucket = |p: f64, k: usize| (((p - lo[k]) / pitch[k]).floor().max(0.0) as usize).min(dims[k] - 1);
        let mut lists = vec![Vec::new(); dims[0] * dims[1]];
        for (c, cell) in mesh.cells.iter().enumerate() {
            let pts = cell.map(|v| mesh.vertices[v]);
            let (x0, x1) = (pts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min), pts.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max));
            let (y0, y1) = (pts.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min), pts.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max));
            for i in bucket(x0, 0)..=bucket(x1, 0) {
                for j in bucket(y0, 1)..=bucket(y1, 1) {
                    lists[j * dims[0] + i].push(c);
                }
            }
        }
        let mut bucket_start = Vec::with_capacity(lists.len() + 1);
        let mut bucket_cells = Vec::new();
        bucket_start.push(0);
        for l in lists {
            bucket_cells.extend(l);
            bucket_start.push(bucket_cells.len());
        }
        Self { mesh, origin: lo, pitch, dims, bucket_start, bucket_cells }
    }

    pub fn mesh(&self) -> &Arc<TriangleMesh> {
        &self.mesh
    }

    fn barycentric(&self, c: usize, p: Point) -> [f64; 3] {
        let [i, j, k] = self.mesh.cells[c];
        let (a, b, d) = (self.mesh.vertices[i], self.mesh.vertices[j], self.mesh.vertices[k]);
        let det = (b[0] - a[0]) * (d[1] - a[1]) - (d[0] - a[0]) * (b[1] - a[1]);
        let l1 = ((p[0] - a[0]) * (d[1] - a[1]) - (d[0] - a[0]) * (p[1] - a[1])) / det;
        let l2 = ((b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1])) / det;
        [1.0 - l1 - l2, l1, l2]
    }

    /// Containing cell and barycentric coordinates; points within a small tolerance of the
    /// boundary are clamped onto it.
    pub fn locate(&self, p: Point) -> Option<(usize, [f64; 3])> {
        let fi = (p[0] - self.origin[0]) / self.pitch[0];
        let fj = (p[1] - self.origin[1]) / self.pitch[1];
        if fi < -1e-6 || fj < -1e-6 || fi > self.dims[0] as f64 + 1e-6 || fj > self.dims[1] as f64 + 1e-6 {
            return None;
        }
        let i = (fi.floor().max(0.0) as usize).min(self.dims[0] - 1);
        let j = (fj.floor().max(0.0) as usize).min(self.dims[1] - 1);
        let b = j * self.dims[0] + i;
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for &c in &self.bucket_cells[self.bucket_start[b]..self.bucket_start[b + 1]] {
            let l = self.barycentric(c, p);
            let worst = l[0].min(l[1]).min(l[2]);
            if worst >= 0.0 {
                return Some((c, l));
            }
            if best.is_none_or(|(_, _, w)| worst > w) {
                best = Some((c, l, worst));
            }
        }
        best.filter(|&(_, _, w)| w >= -BARY_TOL).map(|(c, l, _)| {
            let clamped = l.map(|x| x.max(0.0));
            let s: f64 = clamped.iter().sum();
            (c, clamped.map(|x| x / s))
        })
    }
}

/// A piecewise-linear field on a mesh.
#[derive(Debug, Clone)]
pub struct P1Field {
    locator: Arc<PointLocator>,
    values: Arc<Vec<f64>>,
}

impl P1Field {
    pub fn new(locator: Arc<PointLocator>, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), locator.mesh.vertices.len(), "one value per mesh vertex");
        Self { locator, values: Arc::new(values) }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, p: Point) -> Option<f64> {
        self.locator.locate(p).map(|(c, l)| {
            let cell = self.locator.mesh.cells[c];
            (0..3).map(|k| l[k] * self.values[cell[k]]).sum()
        })
    }
}
