//! Planar geometry of the equilateral rhombus and its triangular pieces.

pub type Point = [f64; 2];

pub const SQRT3: f64 = 1.732_050_807_568_877_2;

pub const A: Point = [0.0, 0.0];
pub const B: Point = [1.0, 0.0];
pub const C: Point = [1.5, SQRT3 / 2.0];
pub const E: Point = [0.5, SQRT3 / 2.0];
/// Intersection of the two diagonals.
pub const O: Point = [0.75, SQRT3 / 4.0];

/// Counter-clockwise polygon.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    pub vertices: Vec<Point>,
}

impl Polygon {
    pub fn new(vertices: Vec<Point>) -> Self {
        Self { vertices }
    }

    pub fn rhombus() -> Self {
        Self::new(vec![A, B, C, E])
    }

    /// Lower equilateral half `ABE`, cut off by the short diagonal.
    pub fn equilateral() -> Self {
        Self::new(vec![A, B, E])
    }

    /// Quarter `ABO`, sides ordered by decreasing length: `AB`, `AO`, `BO`.
    pub fn hemiequilateral() -> Self {
        Self::new(vec![A, B, O])
    }

    pub fn unit_square() -> Self {
        Self::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    }

    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        0.5 * (0..n)
            .map(|i| {
                let (p, q) = (self.vertices[i], self.vertices[(i + 1) % n]);
                p[0] * q[1] - p[1] * q[0]
            })
            .sum::<f64>()
    }

    /// Closed-set membership by half-plane tests; `tol` is a signed distance slack.
    pub fn contains(&self, p: Point, tol: f64) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let (a, b) = (self.vertices[i], self.vertices[(i + 1) % n]);
            let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
            let len = ex.hypot(ey);
            (ex * (p[1] - a[1]) - ey * (p[0] - a[0])) / len >= -tol
        })
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in &self.vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        (lo, hi)
    }

    /// Side `i` (0-based) as a segment from vertex `i` to vertex `i + 1`.
    pub fn side(&self, i: usize) -> (Point, Point) {
        let n = self.vertices.len();
        (self.vertices[i % n], self.vertices[(i + 1) % n])
    }
}

/// Mirror symmetry across the line through `anchor` with unit direction `direction`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reflection {
    pub anchor: Point,
    pub direction: Point,
}

impl Reflection {
    pub fn new(anchor: Point, direction: Point) -> Self {
        let len = direction[0].hypot(direction[1]);
        Self { anchor, direction: [direction[0] / len, direction[1] / len] }
    }

    /// Reflection across the long diagonal `AC`.
    pub fn long_diagonal() -> Self {
        Self::new(A, [SQRT3 / 2.0, 0.5])
    }

    /// Reflection across the short diagonal `BE`.
    pub fn short_diagonal() -> Self {
        Self::new(B, [-0.5, SQRT3 / 2.0])
    }

    pub fn apply(&self, p: Point) -> Point {
        let d = [p[0] - self.anchor[0], p[1] - self.anchor[1]];
        let s = 2.0 * (d[0] * self.direction[0] + d[1] * self.direction[1]);
        [
            self.anchor[0] + s * self.direction[0] - d[0],
            self.anchor[1] + s * self.direction[1] - d[1],
        ]
    }

    /// Signed distance to the mirror line, positive to the left of `direction`.
    pub fn signed_distance(&self, p: Point) -> f64 {
        let d = [p[0] - self.anchor[0], p[1] - self.anchor[1]];
        self.direction[0] * d[1] - self.direction[1] * d[0]
    }
}

/// Whether `p` lies in the closed lower equilateral half `√3 x + y ≤ √3`.
pub fn in_lower_half(p: Point) -> bool {
    SQRT3 * p[0] + p[1] <= SQRT3 + 1e-12
}

/// Distance from `p` to the segment `[a, b]`.
pub fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
    let t = (((p[0] - a[0]) * ex + (p[1] - a[1]) * ey) / (ex * ex + ey * ey)).clamp(0.0, 1.0);
    (p[0] - a[0] - t * ex).hypot(p[1] - a[1] - t * ey)
}
