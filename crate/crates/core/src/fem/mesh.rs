use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::str::FromStr;

use super::FemError;
use crate::geometry::{Point, A, B, C, E, O};
use crate::triangle::{Letter, MixedProblemId};

pub const MAX_LEVEL: usize = 9;
const MIN_AREA: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeshDomain {
    /// `ABE`; side 1 = `AB`, side 2 = `EA`, side 3 = `BE` (the short diagonal).
    Equilateral,
    /// `ABO`; side 1 = `AB`, side 2 = `AO`, side 3 = `BO`.
    Hemiequilateral,
    /// `ABCE` split at the diagonal crossing; sides 1..4 = `AB`, `BC`, `CE`, `EA`.
    Rhombus,
    /// `[0,1]²`; sides 1..4 = bottom, right, top, left.
    UnitSquare,
}

impl MeshDomain {
    pub fn name(self) -> &'static str {
        match self {
            MeshDomain::Equilateral => "Te",
            MeshDomain::Hemiequilateral => "Th",
            MeshDomain::Rhombus => "Rh",
            MeshDomain::UnitSquare => "Sq",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoundaryEdge {
    pub a: usize,
    pub b: usize,
    pub side: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Point>,
    pub cells: Vec<[usize; 3]>,
    pub boundary: Vec<BoundaryEdge>,
    pub level: usize,
    /// For a refined mesh, the two coarse vertices each vertex sits between (equal for
    /// inherited vertices). Empty for an unrefined mesh.
    pub parents: Vec<[usize; 2]>,
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl TriangleMesh {
    /// A validated mesh at level 0.
    pub fn new(vertices: Vec<Point>, cells: Vec<[usize; 3]>, boundary: Vec<BoundaryEdge>) -> Result<Self, FemError> {
        let mesh = Self { vertices, cells, boundary, level: 0, parents: Vec::new() };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn cell_area(&self, c: usize) -> f64 {
        let [i, j, k] = self.cells[c];
        let (p, q, r) = (self.vertices[i], self.vertices[j], self.vertices[k]);
        0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]))
    }

    pub fn area(&self) -> f64 {
        (0..self.cells.len()).map(|c| self.cell_area(c)).sum()
    }

    /// Side tags present on the boundary, sorted.
    pub fn sides(&self) -> Vec<u32> {
        let mut s: Vec<u32> = self.boundary.iter().map(|e| e.side).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// Total length of the edges tagged `side`.
    pub fn side_length(&self, side: u32) -> f64 {
        self.boundary
            .iter()
            .filter(|e| e.side == side)
            .map(|e| {
                let (p, q) = (self.vertices[e.a], self.vertices[e.b]);
                (q[0] - p[0]).hypot(q[1] - p[1])
            })
            .sum()
    }

    /// Lumped (row-sum) mass per vertex.
    pub fn vertex_weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.vertices.len()];
        for (c, cell) in self.cells.iter().enumerate() {
            let a = self.cell_area(c) / 3.0;
            for &v in cell {
                w[v] += a;
            }
        }
        w
    }

    /// Conformity, orientation, cell areas and boundary tags.
    pub fn validate(&self) -> Result<(), FemError> {
        let nv = self.vertices.len();
        for (c, cell) in self.cells.iter().enumerate() {
            if cell.iter().any(|&v| v >= nv) {
                return Err(FemError::Nonconforming(format!("cell {c} references a missing vertex")));
            }
            let area = self.cell_area(c);
            if !(area > MIN_AREA) {
                return Err(FemError::DegenerateCell { cell: c, area });
            }
        }
        let mut uses: HashMap<(usize, usize), usize> = HashMap::new();
        for cell in &self.cells {
            for k in 0..3 {
                *uses.entry(edge_key(cell[k], cell[(k + 1) % 3])).or_default() += 1;
            }
        }
        let mut tagged: HashMap<(usize, usize), usize> = HashMap::new();
        for e in &self.boundary {
            *tagged.entry(edge_key(e.a, e.b)).or_default() += 1;
        }
        for (edge, &count) in &uses {
            let tags = tagged.get(edge).copied().unwrap_or(0);
            match (count, tags) {
                (1, 1) | (2, 0) => {}
                (1, 0) => return Err(FemError::Nonconforming(format!("boundary edge {edge:?} is untagged"))),
                (1, _) => return Err(FemError::Nonconforming(format!("boundary edge {edge:?} carries {tags} tags"))),
                (2, _) => return Err(FemError::Nonconforming(format!("interior edge {edge:?} is tagged"))),
                _ => return Err(FemError::Nonconforming(format!("edge {edge:?} is shared by {count} cells"))),
            }
        }
        if let Some(e) = tagged.keys().find(|e| !uses.contains_key(e)) {
            return Err(FemError::Nonconforming(format!("tagged edge {e:?} is not a cell edge")));
        }
        Ok(())
    }

    /// Uniform midpoint refinement into four similar cells.
    pub fn refine(&self) -> TriangleMesh {
        let mut vertices = self.vertices.clone();
        let mut parents: Vec<[usize; 2]> = (0..vertices.len()).map(|i| [i, i]).collect();
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Point>| -> usize {
            *mid.entry(edge_key(a, b)).or_insert_with(|| {
                let (p, q) = (vertices[a], vertices[b]);
                vertices.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
                parents.push([a.min(b), a.max(b)]);
                vertices.len() - 1
            })
        };
        let mut cells = Vec::with_capacity(4 * self.cells.len());
        for &[a, b, c] in &self.cells {
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            cells.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
        }
        let boundary = self
            .boundary
            .iter()
            .flat_map(|e| {
                let m = midpoint(e.a, e.b, &mut vertices);
                [BoundaryEdge { a: e.a, b: m, side: e.side }, BoundaryEdge { a: m, b: e.b, side: e.side }]
            })
            .collect();
        TriangleMesh { vertices, cells, boundary, level: self.level + 1, parents }
    }

    /// Vertex count of the mesh this one was refined from.
    pub fn coarse_vertex_count(&self) -> Option<usize> {
        (!self.parents.is_empty()).then(|| self.parents.iter().take_while(|p| p[0] == p[1]).count())
    }

    /// Interpolates a coarse vertex vector onto this refined mesh.
    pub fn prolong(&self, coarse: &[f64]) -> Result<Vec<f64>, FemError> {
        match self.coarse_vertex_count() {
            Some(n) if n == coarse.len() => Ok(self.parents.iter().map(|&[a, b]| 0.5 * (coarse[a] + coarse[b])).collect()),
            _ => Err(FemError::Mismatch("vector does not live on the parent mesh".into())),
        }
    }

    /// Header `nv nc nb`, then vertex lines `x y`, cell lines `i j k`, boundary lines `i j tag`.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.vertices.len(), self.cells.len(), self.boundary.len());
        for v in &self.vertices {
            let _ = writeln!(out, "{:?} {:?}", v[0], v[1]);
        }
        for c in &self.cells {
            let _ = writeln!(out, "{} {} {}", c[0], c[1], c[2]);
        }
        for e in &self.boundary {
            let _ = writeln!(out, "{} {} {}", e.a, e.b, e.side);
        }
        out
    }
}

impl FromStr for TriangleMesh {
    type Err = FemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut lines = s.lines().map(str::trim).filter(|l| !l.is_empty());
        let bad = |what: &str| FemError::Parse(what.to_string());
        fn fields<T: FromStr, const N: usize>(line: Option<&str>, what: &str) -> Result<[T; N], FemError> {
            let line = line.ok_or_else(|| FemError::Parse(format!("missing {what} line")))?;
            let parsed: Vec<T> = line
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| FemError::Parse(format!("bad {what} line {line:?}"))))
                .collect::<Result<_, _>>()?;
            parsed.try_into().map_err(|_| FemError::Parse(format!("bad {what} line {line:?}")))
        }
        let [nv, nc, nb]: [usize; 3] = fields(lines.next(), "header")?;
        let vertices = (0..nv).map(|_| fields::<f64, 2>(lines.next(), "vertex")).collect::<Result<Vec<_>, _>>()?;
        let cells = (0..nc).map(|_| fields::<usize, 3>(lines.next(), "cell")).collect::<Result<Vec<_>, _>>()?;
        let boundary = (0..nb)
            .map(|_| {
                let [a, b, side]: [usize; 3] = fields(lines.next(), "boundary")?;
                Ok(BoundaryEdge { a, b, side: side as u32 })
            })
            .collect::<Result<Vec<_>, FemError>>()?;
        if lines.next().is_some() {
            return Err(bad("trailing data"));
        }
        TriangleMesh::new(vertices, cells, boundary)
    }
}

fn level_zero(domain: MeshDomain) -> TriangleMesh {
    let edge = |a, b, side| BoundaryEdge { a, b, side };
    let (vertices, cells, boundary) = match domain {
        MeshDomain::Equilateral => (vec![A, B, E], vec![[0, 1, 2]], vec![edge(0, 1, 1), edge(2, 0, 2), edge(1, 2, 3)]),
        MeshDomain::Hemiequilateral => (vec![A, B, O], vec![[0, 1, 2]], vec![edge(0, 1, 1), edge(2, 0, 2), edge(1, 2, 3)]),
        MeshDomain::Rhombus => (
            vec![A, B, C, E, O],
            vec![[0, 1, 4], [1, 2, 4], [2, 3, 4], [3, 0, 4]],
            vec![edge(0, 1, 1), edge(1, 2, 2), edge(2, 3, 3), edge(3, 0, 4)],
        ),
        MeshDomain::UnitSquare => (
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            vec![[0, 1, 2], [0, 2, 3]],
            vec![edge(0, 1, 1), edge(1, 2, 2), edge(2, 3, 3), edge(3, 0, 4)],
        ),
    };
    TriangleMesh { vertices, cells, boundary, level: 0, parents: Vec::new() }
}

/// The exact polygon at level 0, refined `level` times.
pub fn reference_mesh(domain: MeshDomain, level: usize) -> Result<TriangleMesh, FemError> {
    if level > MAX_LEVEL {
        return Err(FemError::Level(level));
    }
    let mut mesh = level_zero(domain);
    for _ in 0..level {
        mesh = mesh.refine();
    }
    Ok(mesh)
}

/// Per-side boundary condition; every tag of the mesh must be assigned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BcAssignment {
    sides: BTreeMap<u32, Letter>,
}

impl BcAssignment {
    pub fn new(pairs: impl IntoIterator<Item = (u32, Letter)>) -> Self {
        Self { sides: pairs.into_iter().collect() }
    }

    /// The same letter on sides `1..=count`.
    pub fn uniform(count: u32, letter: Letter) -> Self {
        Self::new((1..=count).map(|s| (s, letter)))
    }

    /// Letters of a triangle problem on sides 1, 2, 3.
    pub fn for_problem(problem: &MixedProblemId) -> Self {
        Self::new((1..=3).zip(problem.sides))
    }

    pub fn get(&self, side: u32) -> Option<Letter> {
        self.sides.get(&side).copied()
    }

    pub fn has_dirichlet(&self) -> bool {
        self.sides.values().any(|&l| l == Letter::Dirichlet)
    }
}
