//! Closed-form spectra of the equilateral and hemiequilateral triangles, the explicit
//! second Neumann eigenfunction, and the symmetry decomposition on the rhombus.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{in_lower_half, Point, Reflection, SQRT3};
use crate::spectrum::{courant_indices, DEGENERACY_TOL};

/// `16π²/9`, the unit of the lattice spectrum.
pub const LAMBDA_UNIT: f64 = 16.0 * PI * PI / 9.0;
pub const DEFAULT_CUTOFF: f64 = 400.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TriangleError {
    #[error("no closed-form spectrum for {0}")]
    Unsupported(MixedProblemId),
    #[error("cannot parse problem id {0:?}")]
    Parse(String),
    #[error("cutoff must be finite and nonnegative, got {0}")]
    InvalidCutoff(f64),
    #[error("columns do not share one outer boundary letter")]
    InconsistentOuter,
    #[error("symmetry class {0} appears twice")]
    DuplicateClass(SymmetryClass),
    #[error("expected four hemiequilateral columns, got {0}")]
    ColumnCount(usize),
    #[error("{0} is not a hemiequilateral problem")]
    WrongDomain(MixedProblemId),
    #[error("column {problem} is only complete below {complete_below}, cutoff is {cutoff}")]
    IncompleteColumn { problem: MixedProblemId, complete_below: f64, cutoff: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    Dirichlet,
    Neumann,
}

impl Letter {
    /// `ε(𝔫) = +`, `ε(𝔡) = −`.
    pub fn epsilon(self) -> Sign {
        match self {
            Letter::Neumann => Sign::Plus,
            Letter::Dirichlet => Sign::Minus,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::Neumann => 'n',
            Letter::Dirichlet => 'd',
        }
    }

    fn from_char(c: char) -> Option<Self> {
        match c {
            'n' | 'N' | '𝔫' => Some(Letter::Neumann),
            'd' | 'D' | '𝔡' => Some(Letter::Dirichlet),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn from_letter(letter: Letter) -> Self {
        letter.epsilon()
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// Parity `(σ, τ)` under the long diagonal `D` and the short diagonal `M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymmetryClass {
    pub sigma: Sign,
    pub tau: Sign,
}

impl SymmetryClass {
    pub const ALL: [SymmetryClass; 4] = [
        SymmetryClass { sigma: Sign::Plus, tau: Sign::Plus },
        SymmetryClass { sigma: Sign::Plus, tau: Sign::Minus },
        SymmetryClass { sigma: Sign::Minus, tau: Sign::Plus },
        SymmetryClass { sigma: Sign::Minus, tau: Sign::Minus },
    ];

    pub fn new(sigma: Sign, tau: Sign) -> Self {
        Self { sigma, tau }
    }
}

impl fmt::Display for SymmetryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.sigma, self.tau)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TriangleDomain {
    /// `𝒯ₑ`, sides all of length 1; side 3 lies on the short diagonal.
    Equilateral,
    /// `𝒯ₕ`, sides numbered by decreasing length.
    Hemiequilateral,
}

impl TriangleDomain {
    pub fn label(self) -> &'static str {
        match self {
            TriangleDomain::Equilateral => "Te",
            TriangleDomain::Hemiequilateral => "Th",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MixedProblemId {
    pub domain: TriangleDomain,
    pub sides: [Letter; 3],
}

impl MixedProblemId {
    pub fn new(domain: TriangleDomain, sides: [Letter; 3]) -> Self {
        Self { domain, sides }
    }

    /// `𝒯ₕ` with the given letters, e.g. `th("ndn")`.
    pub fn th(letters: &str) -> Result<Self, TriangleError> {
        format!("Th:{letters}").parse()
    }

    pub fn te(letters: &str) -> Result<Self, TriangleError> {
        format!("Te:{letters}").parse()
    }

    /// Letter on the side carried by the rhombus boundary.
    pub fn outer(&self) -> Letter {
        self.sides[0]
    }

    /// Rhombus symmetry class `(ε(𝔟), ε(𝔠))` of a hemiequilateral problem `𝔞𝔟𝔠`.
    pub fn symmetry_class(&self) -> SymmetryClass {
        SymmetryClass::new(self.sides[1].epsilon(), self.sides[2].epsilon())
    }

    pub fn letters(&self) -> String {
        self.sides.iter().map(|l| l.as_char()).collect()
    }
}

impl fmt::Display for MixedProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.domain.label(), self.letters())
    }
}

impl FromStr for MixedProblemId {
    type Err = TriangleError;

    /// Accepts `Th:ndn`, `Th,ndn`, `(Th,ndn)` and `Th ndn`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || TriangleError::Parse(s.to_string());
        let trimmed = s.trim().trim_start_matches('(').trim_end_matches(')');
        let mut parts = trimmed.split(|c: char| c == ':' || c == ',' || c.is_whitespace()).filter(|p| !p.is_empty());
        let domain = match parts.next().ok_or_else(err)? {
            "Te" | "te" => TriangleDomain::Equilateral,
            "Th" | "th" => TriangleDomain::Hemiequilateral,
            _ => return Err(err()),
        };
        let letters: Vec<Letter> = parts.next().ok_or_else(err)?.chars().map(Letter::from_char).collect::<Option<_>>().ok_or_else(err)?;
        if parts.next().is_some() || letters.len() != 3 {
            return Err(err());
        }
        Ok(Self::new(domain, [letters[0], letters[1], letters[2]]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePair {
    pub m: u32,
    pub n: u32,
}

impl LatticePair {
    pub fn new(m: u32, n: u32) -> Self {
        Self { m, n }
    }

    /// `m² + mn + n²`.
    pub fn multiple(&self) -> u64 {
        let (m, n) = (self.m as u64, self.n as u64);
        m * m + m * n + n * n
    }
}

impl fmt::Display for LatticePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.m, self.n)
    }
}

/// `λ̂(m,n) = 16π²/9 (m² + mn + n²)`.
pub fn lambda_hat(pair: LatticePair) -> f64 {
    LAMBDA_UNIT * pair.multiple() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedEntry {
    /// The eigenvalue as an integer multiple of `16π²/9`.
    pub multiple: u64,
    pub value: f64,
    pub pairs: Vec<LatticePair>,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedSpectrum {
    pub problem: MixedProblemId,
    pub cutoff: f64,
    pub entries: Vec<MixedEntry>,
}

impl MixedSpectrum {
    /// Eigenvalues repeated according to multiplicity.
    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().flat_map(|e| std::iter::repeat_n(e.value, e.multiplicity)).collect()
    }

    pub fn multiplicity_of(&self, multiple: u64) -> usize {
        self.entries.iter().find(|e| e.multiple == multiple).map_or(0, |e| e.multiplicity)
    }

    /// One row per admissible lattice pair.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("problem,index,value,multiple,m,n,multiplicity,symmetry,kappa\n");
        let symmetry = match self.problem.domain {
            TriangleDomain::Hemiequilateral => self.problem.symmetry_class().to_string(),
            TriangleDomain::Equilateral => String::new(),
        };
        let mut index = 1;
        for e in &self.entries {
            for p in &e.pairs {
                out.push_str(&format!(
                    "{},{},{:.12},{},{},{},{},{},{}\n",
                    self.problem, index, e.value, e.multiple, p.m, p.n, e.multiplicity, symmetry, index
                ));
            }
            index += e.multiplicity;
        }
        out
    }
}

fn admissible(problem: &MixedProblemId) -> Result<fn(u32, u32) -> bool, TriangleError> {
    use Letter::{Dirichlet as D, Neumann as N};
    let rule: fn(u32, u32) -> bool = match (problem.domain, problem.sides) {
        (TriangleDomain::Hemiequilateral, [N, N, N]) => |m, n| m <= n,
        (TriangleDomain::Hemiequilateral, [N, D, N]) => |m, n| m < n,
        (TriangleDomain::Hemiequilateral, [D, N, D]) => |m, n| 1 <= m && m <= n,
        (TriangleDomain::Hemiequilateral, [D, D, D]) => |m, n| 1 <= m && m < n,
        (TriangleDomain::Equilateral, [N, N, N]) => |_, _| true,
        (TriangleDomain::Equilateral, [D, D, D]) => |m, n| m >= 1 && n >= 1,
        _ => return Err(TriangleError::Unsupported(*problem)),
    };
    Ok(rule)
}

fn lattice_entries(rule: impl Fn(u32, u32) -> bool, cutoff: f64) -> Vec<MixedEntry> {
    let bound = (cutoff / LAMBDA_UNIT).sqrt().floor() as u32 + 1;
    let mut pairs: Vec<LatticePair> = (0..=bound)
        .flat_map(|m| (0..=bound).map(move |n| LatticePair::new(m, n)))
        .filter(|p| rule(p.m, p.n) && lambda_hat(*p) <= cutoff)
        .collect();
    pairs.sort_by_key(|p| (p.multiple(), p.m));
    let mut entries: Vec<MixedEntry> = Vec::new();
    for p in pairs {
        match entries.last_mut() {
            Some(e) if e.multiple == p.multiple() => {
                e.pairs.push(p);
                e.multiplicity += 1;
            }
            _ => entries.push(MixedEntry { multiple: p.multiple(), value: lambda_hat(p), pairs: vec![p], multiplicity: 1 }),
        }
    }
    entries
}

/// All admissible `λ̂(m,n) ≤ cutoff`, sorted, with multiplicities.
pub fn enumerate_mixed_spectrum(problem: MixedProblemId, cutoff: f64) -> Result<MixedSpectrum, TriangleError> {
    if !(cutoff.is_finite() && cutoff >= 0.0) {
        return Err(TriangleError::InvalidCutoff(cutoff));
    }
    let rule = admissible(&problem)?;
    Ok(MixedSpectrum { problem, cutoff, entries: lattice_entries(rule, cutoff) })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub multiple: u64,
    pub value: f64,
    /// Pairs of the equilateral lattice carrying this value.
    pub pairs: Vec<LatticePair>,
    /// Position `µ_i` of the value in each column, if present.
    pub indices: [Option<usize>; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticTable {
    pub columns: [MixedProblemId; 2],
    pub rows: Vec<TableRow>,
}

impl AnalyticTable {
    pub fn to_csv(&self) -> String {
        let mut out = format!("multiple,value,pairs,{},{}\n", self.columns[0], self.columns[1]);
        for r in &self.rows {
            let pairs: Vec<String> = r.pairs.iter().map(|p| p.to_string()).collect();
            let idx = |i: Option<usize>| i.map(|i| format!("mu_{i}")).unwrap_or_default();
            out.push_str(&format!(
                "{},{:.12},\"{}\",{},{}\n",
                r.multiple,
                r.value,
                pairs.join(" "),
                idx(r.indices[0]),
                idx(r.indices[1])
            ));
        }
        out
    }
}

/// The first `rows` distinct values of two hemiequilateral columns with a common outer
/// letter, indexed in each column.
pub fn analytic_table(first: MixedProblemId, second: MixedProblemId, rows: usize) -> Result<AnalyticTable, TriangleError> {
    if first.outer() != second.outer() {
        return Err(TriangleError::InconsistentOuter);
    }
    let outer = first.outer();
    let lattice = MixedProblemId::new(TriangleDomain::Equilateral, [outer; 3]);
    let mut cutoff = LAMBDA_UNIT * 4.0;
    loop {
        let a = enumerate_mixed_spectrum(first, cutoff)?;
        let b = enumerate_mixed_spectrum(second, cutoff)?;
        let mut multiples: Vec<u64> = a.entries.iter().chain(&b.entries).map(|e| e.multiple).collect();
        multiples.sort_unstable();
        multiples.dedup();
        if multiples.len() > rows {
            let te = enumerate_mixed_spectrum(lattice, cutoff)?;
            let position = |s: &MixedSpectrum, k: u64| {
                let mut index = 1;
                for e in &s.entries {
                    if e.multiple == k {
                        return Some(index);
                    }
                    index += e.multiplicity;
                }
                None
            };
            let rows = multiples[..rows]
                .iter()
                .map(|&k| TableRow {
                    multiple: k,
                    value: LAMBDA_UNIT * k as f64,
                    pairs: te.entries.iter().find(|e| e.multiple == k).map(|e| e.pairs.clone()).unwrap_or_default(),
                    indices: [position(&a, k), position(&b, k)],
                })
                .collect();
            return Ok(AnalyticTable { columns: [first, second], rows });
        }
        cutoff *= 2.0;
    }
}

/// `φ₂ⁿ(x,y) = 2cos(2πx/3)(cos(2πx/3) + cos(2πy/√3)) − 1`.
pub fn phi2_neumann(x: f64, y: f64) -> f64 {
    let c = (2.0 * PI * x / 3.0).cos();
    2.0 * c * (c + (2.0 * PI * y / SQRT3).cos()) - 1.0
}

pub type PlaneEvaluator = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetryLabel {
    Class(SymmetryClass),
    Mixed,
}

/// A function on the rhombus together with its declared symmetry class.
#[derive(Clone)]
pub struct RhombusFunction {
    eval: PlaneEvaluator,
    label: SymmetryLabel,
    continuous: bool,
}

impl fmt::Debug for RhombusFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RhombusFunction").field("label", &self.label).field("continuous", &self.continuous).finish()
    }
}

impl RhombusFunction {
    pub fn new(eval: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        Self { eval: Arc::new(eval), label: SymmetryLabel::Mixed, continuous: true }
    }

    pub fn from_evaluator(eval: PlaneEvaluator, label: SymmetryLabel) -> Self {
        Self { eval, label, continuous: true }
    }

    pub fn eval(&self, p: Point) -> f64 {
        (self.eval)(p)
    }

    pub fn evaluator(&self) -> PlaneEvaluator {
        self.eval.clone()
    }

    pub fn label(&self) -> SymmetryLabel {
        self.label
    }

    /// False when an odd extension does not vanish on the mirror line.
    pub fn is_continuous(&self) -> bool {
        self.continuous
    }

    /// `g = c₀ f + Σ cᵢ f ∘ Rᵢ`, built lazily.
    fn combine(&self, terms: Vec<(f64, Option<Reflection>, Option<Reflection>)>, label: SymmetryLabel) -> Self {
        let f = self.eval.clone();
        let eval = move |p: Point| {
            terms
                .iter()
                .map(|&(c, r1, r2)| {
                    let q = r1.map_or(p, |r| r.apply(p));
                    let q = r2.map_or(q, |r| r.apply(q));
                    c * f(q)
                })
                .sum()
        };
        Self { eval: Arc::new(eval), label, continuous: self.continuous }
    }

    /// `f + c`; only a `(+,+)` label survives.
    pub fn plus_constant(&self, c: f64) -> Self {
        let f = self.eval.clone();
        let label = match self.label {
            SymmetryLabel::Class(k) if k.sigma == Sign::Plus && k.tau == Sign::Plus => self.label,
            _ => SymmetryLabel::Mixed,
        };
        Self { eval: Arc::new(move |p| f(p) + c), label, continuous: self.continuous }
    }

    /// Largest of `|D∗f − σf|` and `|M∗f − τf|` over `samples` random points, relative
    /// to the largest sampled `|f|`.
    pub fn symmetry_defect(&self, class: SymmetryClass, samples: usize, seed: u64) -> f64 {
        let (d, m) = (Reflection::long_diagonal(), Reflection::short_diagonal());
        let pts = sample_rhombus(samples, seed);
        let scale = pts.iter().fold(0.0f64, |s, &p| s.max(self.eval(p).abs())).max(1e-300);
        pts.iter()
            .map(|&p| {
                let f = self.eval(p);
                let dd = (self.eval(d.apply(p)) - class.sigma.value() * f).abs();
                let dm = (self.eval(m.apply(p)) - class.tau.value() * f).abs();
                dd.max(dm)
            })
            .fold(0.0f64, f64::max)
            / scale
    }
}

/// Uniform random points in the rhombus, deterministic in `seed`.
pub fn sample_rhombus(count: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let (s, t): (f64, f64) = (rng.random(), rng.random());
            [s + 0.5 * t, 0.5 * SQRT3 * t]
        })
        .collect()
}

/// Extends `f` from the lower half `𝒯ₑ₁` by `f̌ = τ f ∘ M` on the upper half.
pub fn reflect_extend(f: PlaneEvaluator, tau: Sign) -> RhombusFunction {
    let m = Reflection::short_diagonal();
    let continuous = tau == Sign::Plus || {
        let scale = sample_rhombus(200, 1).iter().map(|&p| f(p).abs()).fold(0.0f64, f64::max).max(1e-300);
        (0..=200).all(|i| {
            let s = i as f64 / 200.0;
            f([1.0 - 0.5 * s, 0.5 * SQRT3 * s]).abs() <= 1e-9 * scale
        })
    };
    let g = f.clone();
    let eval = move |p: Point| if in_lower_half(p) { g(p) } else { tau.value() * g(m.apply(p)) };
    RhombusFunction { eval: Arc::new(eval), label: SymmetryLabel::Mixed, continuous }
}

/// Components `f_{σ,τ} = ¼(f + σD∗f + τM∗f + στD∗M∗f)` in the order of [`SymmetryClass::ALL`].
pub fn symmetry_project(f: &RhombusFunction) -> [(SymmetryClass, RhombusFunction); 4] {
    let (d, m) = (Reflection::long_diagonal(), Reflection::short_diagonal());
    SymmetryClass::ALL.map(|class| {
        let (s, t) = (class.sigma.value(), class.tau.value());
        let terms = vec![(0.25, None, None), (0.25 * s, Some(d), None), (0.25 * t, Some(m), None), (0.25 * s * t, Some(m), Some(d))];
        (class, f.combine(terms, SymmetryLabel::Class(class)))
    })
}

/// One column of hemiequilateral eigenvalues, analytic or computed.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumColumn {
    pub problem: MixedProblemId,
    pub values: Vec<f64>,
    /// Absolute error estimate per value (zero for closed forms).
    pub errors: Vec<f64>,
    /// Every eigenvalue of the problem up to this bound is listed.
    pub complete_below: f64,
}

impl SpectrumColumn {
    pub fn analytic(spectrum: &MixedSpectrum) -> Self {
        let values = spectrum.values();
        Self { problem: spectrum.problem, errors: vec![0.0; values.len()], values, complete_below: spectrum.cutoff }
    }

    /// The lowest eigenvalues of a problem; complete up to the last one.
    pub fn computed(problem: MixedProblemId, values: Vec<f64>, errors: Vec<f64>) -> Self {
        let complete_below = values.last().copied().unwrap_or(0.0);
        Self { problem, values, errors, complete_below }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssembledEntry {
    pub value: f64,
    pub error: f64,
    pub class: SymmetryClass,
    pub problem: MixedProblemId,
    /// Position `i` of `µ_i` inside its own column.
    pub column_index: usize,
    pub kappa: usize,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RhombusSpectrum {
    pub outer: Letter,
    pub cutoff: f64,
    pub entries: Vec<AssembledEntry>,
}

impl RhombusSpectrum {
    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.value).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,value,error,problem,mu_index,symmetry,kappa,multiplicity\n");
        for (i, e) in self.entries.iter().enumerate() {
            out.push_str(&format!(
                "{},{:.10},{:.3e},{},{},{},{},{}\n",
                i + 1,
                e.value,
                e.error,
                e.problem,
                e.column_index,
                e.class,
                e.kappa,
                e.multiplicity
            ));
        }
        out
    }
}

/// Multiset union of the four `(𝒯ₕ, 𝔞𝔟𝔠)` columns labelled by `(ε(𝔟), ε(𝔠))`, truncated at
/// `cutoff`, with Courant indices.
pub fn rhombus_spectrum_assemble(columns: &[SpectrumColumn], cutoff: f64) -> Result<RhombusSpectrum, TriangleError> {
    if columns.len() != 4 {
        return Err(TriangleError::ColumnCount(columns.len()));
    }
    let outer = columns[0].problem.outer();
    let mut seen = Vec::new();
    for c in columns {
        if c.problem.domain != TriangleDomain::Hemiequilateral {
            return Err(TriangleError::WrongDomain(c.problem));
        }
        if c.problem.outer() != outer {
            return Err(TriangleError::InconsistentOuter);
        }
        let class = c.problem.symmetry_class();
        if seen.contains(&class) {
            return Err(TriangleError::DuplicateClass(class));
        }
        seen.push(class);
        if c.complete_below < cutoff {
            return Err(TriangleError::IncompleteColumn { problem: c.problem, complete_below: c.complete_below, cutoff });
        }
    }
    let mut entries: Vec<AssembledEntry> = columns
        .iter()
        .flat_map(|c| {
            c.values.iter().zip(&c.errors).enumerate().filter(|(_, (v, _))| **v <= cutoff).map(move |(i, (&value, &error))| AssembledEntry {
                value,
                error,
                class: c.problem.symmetry_class(),
                problem: c.problem,
                column_index: i + 1,
                kappa: 0,
                multiplicity: 0,
            })
        })
        .collect();
    entries.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.class.cmp(&b.class)));
    let values: Vec<f64> = entries.iter().map(|e| e.value).collect();
    let kappa = courant_indices(&values, DEGENERACY_TOL);
    for (i, e) in entries.iter_mut().enumerate() {
        e.kappa = kappa[i];
        e.multiplicity = kappa.iter().filter(|&&k| k == kappa[i]).count();
    }
    Ok(RhombusSpectrum { outer, cutoff, entries })
}
