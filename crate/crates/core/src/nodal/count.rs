use std::fmt::Write as _;
use std::sync::Arc;

use super::field::{Grid, SampledField};
use super::NodalError;

/// Classification of one grid node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Outside,
    ZeroBand,
    Domain(u32),
}

/// Sign components of a sampled field.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalPartition {
    pub grid: Arc<Grid>,
    pub labels: Vec<Label>,
    pub beta0: usize,
    /// Share of inside nodes in the zero band.
    pub uncertain_fraction: f64,
    /// Sign of each component, indexed by its label.
    pub signs: Vec<i8>,
    /// Node count of each component.
    pub sizes: Vec<usize>,
    /// Count at pitch `h/2`, when the field carried a refinement.
    pub refined_beta0: Option<usize>,
    /// Zero-band share at pitch `h/2`.
    pub refined_uncertain_fraction: Option<f64>,
}

/// A maximal horizontal run of equally labelled nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabelRun {
    pub row: usize,
    pub start: usize,
    pub end: usize,
    pub label: Label,
}

impl NodalPartition {
    /// Zero-band share at the finest resolution counted.
    pub fn finest_uncertain_fraction(&self) -> f64 {
        self.refined_uncertain_fraction.unwrap_or(self.uncertain_fraction)
    }

    pub fn label_at(&self, i: usize, j: usize) -> Label {
        self.labels[self.grid.index(i, j)]
    }

    /// Label of the grid node nearest to `p`.
    pub fn label_near(&self, p: [f64; 2]) -> Label {
        let g = &self.grid;
        let i = ((p[0] - g.origin[0]) / g.h).round().clamp(0.0, (g.nx - 1) as f64) as usize;
        let j = ((p[1] - g.origin[1]) / g.h).round().clamp(0.0, (g.ny - 1) as f64) as usize;
        self.label_at(i, j)
    }

    /// Row-wise run-length encoding, for raster and vector export.
    pub fn runs(&self) -> Vec<LabelRun> {
        let mut out = Vec::new();
        for j in 0..self.grid.ny {
            let mut start = 0;
            for i in 1..=self.grid.nx {
                if i == self.grid.nx || self.label_at(i, j) != self.label_at(start, j) {
                    out.push(LabelRun { row: j, start, end: i, label: self.label_at(start, j) });
                    start = i;
                }
            }
        }
        out
    }

    /// ASCII PGM: 0 outside, 1 on the zero band, `2 + id` on component `id`. Row 0 is the top.
    pub fn to_pgm(&self) -> String {
        let g = &self.grid;
        let mut out = format!("P2\n{} {}\n{}\n", g.nx, g.ny, self.beta0 + 1);
        for j in (0..g.ny).rev() {
            let row: Vec<String> = (0..g.nx)
                .map(|i| match self.label_at(i, j) {
                    Label::Outside => "0".to_string(),
                    Label::ZeroBand => "1".to_string(),
                    Label::Domain(d) => (d + 2).to_string(),
                })
                .collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }
}

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n as u32).collect() }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
        }
    }
}

/// Finite-difference gradient norm at each inside node.
fn gradient_norms(grid: &Grid, values: &[f64]) -> Vec<f64> {
    let inside = |i: isize, j: isize| {
        i >= 0 && j >= 0 && (i as usize) < grid.nx && (j as usize) < grid.ny && grid.mask[grid.index(i as usize, j as usize)]
    };
    let partial = |i: usize, j: usize, di: isize, dj: isize| -> f64 {
        let (i, j) = (i as isize, j as isize);
        let at = |a: isize, b: isize| values[grid.index(a as usize, b as usize)];
        let (fwd, bwd) = (inside(i + di, j + dj), inside(i - di, j - dj));
        match (fwd, bwd) {
            (true, true) => (at(i + di, j + dj) - at(i - di, j - dj)) / (2.0 * grid.h),
            (true, false) => (at(i + di, j + dj) - at(i, j)) / grid.h,
            (false, true) => (at(i, j) - at(i - di, j - dj)) / grid.h,
            (false, false) => 0.0,
        }
    };
    let mut out = vec![0.0; grid.len()];
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            if grid.mask[grid.index(i, j)] {
                out[grid.index(i, j)] = partial(i, j, 1, 0).hypot(partial(i, j, 0, 1));
            }
        }
    }
    out
}

/// Values below this fraction of the peak are zero; eigenvector data are not more accurate.
const ZERO_FLOOR: f64 = 1e-9;

/// Components with fewer nodes are unresolved and join the zero band.
const MIN_COMPONENT: usize = 9;

/// Pixel radius within which a band node must see the opposite sign.
const OPPOSITE_RADIUS: usize = 4;

/// Minimum and maximum of `s` over the `(2r+1)²` window around each node.
fn window_extrema(s: &[i8], nx: usize, ny: usize, r: usize) -> (Vec<i8>, Vec<i8>) {
    let pass = |src: &[i8], along_x: bool, pick: fn(i8, i8) -> i8| -> Vec<i8> {
        let mut out = vec![0; src.len()];
        for j in 0..ny {
            for i in 0..nx {
                let (c, n) = if along_x { (i, nx) } else { (j, ny) };
                let mut acc = src[j * nx + i];
                for k in c.saturating_sub(r)..=(c + r).min(n - 1) {
                    let idx = if along_x { j * nx + k } else { k * nx + i };
                    acc = pick(acc, src[idx]);
                }
                out[j * nx + i] = acc;
            }
        }
        out
    };
    let lo = pass(&pass(s, true, i8::min), false, i8::min);
    let hi = pass(&pass(s, true, i8::max), false, i8::max);
    (lo, hi)
}

fn count_level(field: &SampledField) -> Result<NodalPartition, NodalError> {
    let grid = &field.grid;
    let values = &field.values;
    let fmax = field.max_abs();
    if fmax == 0.0 {
        return Err(NodalError::ZeroField);
    }
    let grad = gradient_norms(grid, values);
    let gmax = grad.iter().cloned().fold(0.0, f64::max);
    if gmax * grid.h >= 0.1 * fmax {
        return Err(NodalError::Underresolved { h: grid.h, ratio: gmax * grid.h / fmax });
    }
    let floor = ZERO_FLOOR * fmax;
    let (nx, ny) = (grid.nx, grid.ny);
    // Band threshold uses the largest gradient over the 3×3 neighbourhood, so that the band
    // stays closed across saddles where the gradient itself vanishes.
    let mut band = vec![false; grid.len()];
    for j in 0..ny {
        for i in 0..nx {
            let idx = grid.index(i, j);
            if !grid.mask[idx] {
                continue;
            }
            let mut g: f64 = 0.0;
            for b in j.saturating_sub(1)..=(j + 1).min(ny - 1) {
                for a in i.saturating_sub(1)..=(i + 1).min(nx - 1) {
                    g = g.max(grad[grid.index(a, b)]);
                }
            }
            band[idx] = values[idx].abs() < (3.0 * grid.h * g).max(floor);
        }
    }
    // A small value only marks the nodal set when the opposite sign is close by; otherwise it
    // is a boundary layer (Dirichlet sides, corners) of a single sign component.
    let sign: Vec<i8> = (0..grid.len())
        .map(|idx| match values[idx] {
            v if !grid.mask[idx] || v.abs() <= floor => 0,
            v if v > 0.0 => 1,
            _ => -1,
        })
        .collect();
    let (lo, hi) = window_extrema(&sign, nx, ny, OPPOSITE_RADIUS);
    for idx in 0..grid.len() {
        if band[idx] && sign[idx] != 0 && !(sign[idx] > 0 && lo[idx] < 0) && !(sign[idx] < 0 && hi[idx] > 0) {
            band[idx] = false;
        }
    }
    let active = |idx: usize| grid.mask[idx] && !band[idx];
    let mut uf = UnionFind::new(grid.len());
    for j in 0..ny {
        for i in 0..nx {
            let idx = grid.index(i, j);
            if !active(idx) {
                continue;
            }
            let s = values[idx] > 0.0;
            if i + 1 < nx && active(idx + 1) && (values[idx + 1] > 0.0) == s {
                uf.union(idx as u32, (idx + 1) as u32);
            }
            if j + 1 < ny && active(idx + nx) && (values[idx + nx] > 0.0) == s {
                uf.union(idx as u32, (idx + nx) as u32);
            }
        }
    }
    let mut root_size = vec![0u32; grid.len()];
    for idx in (0..grid.len()).filter(|&i| active(i)) {
        root_size[uf.find(idx as u32) as usize] += 1;
    }
    let mut root_label = std::collections::HashMap::new();
    let mut labels = vec![Label::Outside; grid.len()];
    let (mut signs, mut sizes) = (Vec::new(), Vec::new());
    let mut band_count = 0usize;
    for idx in 0..grid.len() {
        if !grid.mask[idx] {
            continue;
        }
        let root = if band[idx] { None } else { Some(uf.find(idx as u32)) };
        let Some(r) = root.filter(|&r| root_size[r as usize] as usize >= MIN_COMPONENT) else {
            labels[idx] = Label::ZeroBand;
            band_count += 1;
            continue;
        };
        let id = *root_label.entry(r).or_insert_with(|| {
            signs.push(if values[idx] > 0.0 { 1 } else { -1 });
            sizes.push(0);
            (signs.len() - 1) as u32
        });
        sizes[id as usize] += 1;
        labels[idx] = Label::Domain(id);
    }
    let inside = grid.inside_count().max(1);
    Ok(NodalPartition {
        grid: grid.clone(),
        labels,
        beta0: signs.len(),
        uncertain_fraction: band_count as f64 / inside as f64,
        signs,
        sizes,
        refined_beta0: None,
        refined_uncertain_fraction: None,
    })
}

/// Counts 4-connected sign components off the zero band, rechecking at half the pitch when
/// the field carries a refinement.
pub fn count_nodal_domains(field: &SampledField) -> Result<NodalPartition, NodalError> {
    let mut partition = count_level(field)?;
    if let Some(fine) = &field.refined {
        let refined = count_level(fine)?;
        if refined.beta0 != partition.beta0 {
            return Err(NodalError::Unstable { coarse: partition.beta0, fine: refined.beta0 });
        }
        partition.refined_beta0 = Some(refined.beta0);
        partition.refined_uncertain_fraction = Some(refined.uncertain_fraction);
    }
    Ok(partition)
}
