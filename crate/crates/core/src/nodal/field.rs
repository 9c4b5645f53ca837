use std::sync::Arc;

use rayon::prelude::*;

use super::NodalError;
use crate::geometry::{Point, Polygon};

/// Uniform square-pitch grid over a bounding box with an inside mask.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub origin: Point,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    pub mask: Vec<bool>,
}

impl Grid {
    /// `points` samples along the longer side of the bounding box of `polygon`.
    pub fn over(polygon: &Polygon, points: usize) -> Result<Self, NodalError> {
        if points < 3 {
            return Err(NodalError::GridTooSmall(points));
        }
        let (lo, hi) = polygon.bounding_box();
        let (w, ht) = (hi[0] - lo[0], hi[1] - lo[1]);
        let h = w.max(ht) / (points - 1) as f64;
        let nx = (w / h - 1e-9).ceil() as usize + 1;
        let ny = (ht / h - 1e-9).ceil() as usize + 1;
        Ok(Self::with_mask(polygon, lo, h, nx, ny))
    }

    fn with_mask(polygon: &Polygon, origin: Point, h: f64, nx: usize, ny: usize) -> Self {
        let tol = 1e-12 * h.max(1.0);
        let mask = (0..ny)
            .flat_map(|j| (0..nx).map(move |i| (i, j)))
            .map(|(i, j)| polygon.contains([origin[0] + i as f64 * h, origin[1] + j as f64 * h], tol))
            .collect();
        Self { origin, h, nx, ny, mask }
    }

    /// Half the pitch over the same box; every coarse node is a fine node.
    pub fn halved(&self, polygon: &Polygon) -> Self {
        Self::with_mask(polygon, self.origin, 0.5 * self.h, 2 * self.nx - 1, 2 * self.ny - 1)
    }

    pub fn point(&self, i: usize, j: usize) -> Point {
        [self.origin[0] + i as f64 * self.h, self.origin[1] + j as f64 * self.h]
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn inside_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    fn same_shape(&self, other: &Grid) -> bool {
        self.nx == other.nx && self.ny == other.ny && self.h == other.h && self.origin == other.origin
    }
}

/// A function sampled on a domain grid, with an optional copy at half the pitch.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    pub domain: String,
    pub grid: Arc<Grid>,
    /// Zero outside the mask.
    pub values: Vec<f64>,
    pub refined: Option<Arc<SampledField>>,
}

fn sample_on(grid: &Grid, f: &(dyn Fn(Point) -> Option<f64> + Sync)) -> Result<Vec<f64>, NodalError> {
    let rows: Vec<Vec<f64>> = (0..grid.ny)
        .into_par_iter()
        .map(|j| {
            (0..grid.nx)
                .map(|i| {
                    if !grid.mask[grid.index(i, j)] {
                        return Ok(0.0);
                    }
                    let p = grid.point(i, j);
                    match f(p) {
                        Some(v) if v.is_finite() => Ok(v),
                        _ => Err(NodalError::Sampling(p)),
                    }
                })
                .collect::<Result<Vec<f64>, NodalError>>()
        })
        .collect::<Result<_, _>>()?;
    Ok(rows.concat())
}

impl SampledField {
    /// Samples `f` at pitch `h` and `h/2`.
    pub fn sample(domain: &str, polygon: &Polygon, points: usize, f: impl Fn(Point) -> f64 + Sync) -> Result<Self, NodalError> {
        Self::sample_partial(domain, polygon, points, |p| Some(f(p)))
    }

    /// Like [`SampledField::sample`] for evaluators that may fail (e.g. outside a mesh).
    pub fn sample_partial(domain: &str, polygon: &Polygon, points: usize, f: impl Fn(Point) -> Option<f64> + Sync) -> Result<Self, NodalError> {
        let grid = Grid::over(polygon, points)?;
        let fine = grid.halved(polygon);
        let fine_values = sample_on(&fine, &f)?;
        let values = sample_on(&grid, &f)?;
        let refined = SampledField { domain: domain.to_string(), grid: Arc::new(fine), values: fine_values, refined: None };
        Ok(Self { domain: domain.to_string(), grid: Arc::new(grid), values, refined: Some(Arc::new(refined)) })
    }

    /// A single-resolution field; counting it skips the refinement check.
    pub fn from_values(domain: &str, grid: Arc<Grid>, values: Vec<f64>) -> Result<Self, NodalError> {
        if values.len() != grid.len() {
            return Err(NodalError::GridMismatch);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(NodalError::NonFinite);
        }
        Ok(Self { domain: domain.to_string(), grid, values, refined: None })
    }

    /// `Σ cᵢ fᵢ` on a common grid (and common refinement, if all have one).
    pub fn combine(terms: &[(f64, &SampledField)]) -> Result<Self, NodalError> {
        let (_, first) = terms.first().ok_or(NodalError::GridMismatch)?;
        if terms.iter().any(|(_, f)| !f.grid.same_shape(&first.grid)) {
            return Err(NodalError::GridMismatch);
        }
        let mut values = vec![0.0; first.values.len()];
        for (c, f) in terms {
            values.iter_mut().zip(&f.values).for_each(|(v, x)| *v += c * x);
        }
        let refined = if terms.iter().all(|(_, f)| f.refined.is_some()) {
            let fine: Vec<(f64, &SampledField)> = terms.iter().map(|(c, f)| (*c, f.refined.as_deref().expect("checked"))).collect();
            Some(Arc::new(Self::combine(&fine)?))
        } else {
            None
        };
        Ok(Self { domain: first.domain.clone(), grid: first.grid.clone(), values, refined })
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::combine(&[(c, self)]).expect("a field shares its own grid")
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}
