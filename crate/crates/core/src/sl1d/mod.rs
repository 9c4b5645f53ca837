//! One-dimensional Sturm-Liouville spectra and Sturm's oscillation bounds.

mod field;
mod problem;
mod solver;
mod zeros;

pub use field::{grid_derivatives, interpolate, Field1d};
pub use problem::{
    Boundary, CoefficientTriple, Evaluator, Geometry1d, Polynomial, SlProblem, Topology,
};
pub use solver::{solve_sl, Discretization, SlSpectrum, DEGENERACY_TOL};
pub use zeros::{
    count_sign_changes, count_zeros_with_multiplicity, ZeroLocation, ZeroReport, MAX_ORDER,
    ORDER_TOL, ZERO_TOL,
};

use crate::linalg::det;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Sl1dError {
    #[error("coefficient {name} is not positive at x = {x} (value {value})")]
    CoefficientDomain { name: &'static str, x: f64, value: f64 },
    #[error("grid of {grid_size} cells cannot resolve {count} eigenpairs")]
    Resolution { grid_size: usize, count: usize },
    #[error("periodic boundary requires the circle and vice versa")]
    BoundaryMismatch,
    #[error("coefficients are not 2π-periodic")]
    NotPeriodic,
    #[error("invalid interval [{start}, {end}]")]
    InvalidInterval { start: f64, end: f64 },
    #[error("eigenvalue {value} is degenerate beyond the allowed multiplicity")]
    Degenerate { value: f64 },
    #[error("field is identically zero")]
    IdenticallyZero,
    #[error("field has {0} samples, at least 64 required")]
    TooFewSamples(usize),
    #[error("derivative fields are required")]
    MissingDerivatives,
    #[error("zero at x = {position} has order above 3")]
    MultiplicityResolution { position: f64 },
    #[error("eigenfunction index {index} unavailable ({available} computed)")]
    IndexOutOfRange { index: usize, available: usize },
    #[error("invalid combination: {0}")]
    InvalidCombination(String),
    #[error("evaluation points are degenerate")]
    DegeneratePoints,
    #[error("cannot parse polynomial {0:?}")]
    InvalidPolynomial(String),
}

/// `Y = Σ_{j=m}^{n} a_j V_j` with `a_m ≠ 0` and `a_n ≠ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinationSpec {
    m: usize,
    coefficients: Vec<f64>,
}

impl CombinationSpec {
    pub fn new(m: usize, coefficients: Vec<f64>) -> Result<Self, Sl1dError> {
        if m == 0 {
            return Err(Sl1dError::InvalidCombination("lowest index must be at least 1".into()));
        }
        match (coefficients.first(), coefficients.last()) {
            (Some(&a), Some(&b)) if a != 0.0 && b != 0.0 && coefficients.iter().all(|c| c.is_finite()) => {
                Ok(Self { m, coefficients })
            }
            _ => Err(Sl1dError::InvalidCombination(
                "extreme coefficients must be finite and nonzero".into(),
            )),
        }
    }

    /// A single eigenfunction `V_k`.
    pub fn single(k: usize) -> Result<Self, Sl1dError> {
        Self::new(k, vec![1.0])
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.m + self.coefficients.len() - 1
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Coefficient `a_j` (zero outside `m..=n`).
    pub fn coefficient(&self, j: usize) -> f64 {
        if j < self.m || j > self.n() {
            0.0
        } else {
            self.coefficients[j - self.m]
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SturmVerdict {
    pub zeros: usize,
    pub sign_changes: usize,
    pub zero_bound: usize,
    pub sign_change_bound: usize,
    pub zeros_ok: bool,
    pub sign_changes_ok: bool,
    pub report: ZeroReport,
}

impl SturmVerdict {
    pub fn passed(&self) -> bool {
        self.zeros_ok && self.sign_changes_ok
    }
}

/// Zero count of `V_k` on the circle: 0 for `k = 1`, `2⌊k/2⌋` otherwise.
pub fn circle_zero_count(k: usize) -> usize {
    2 * (k / 2)
}

/// Check `Z ≤ n−1`, `S ≥ m−1` (interval) or `Z ≤ 2⌊n/2⌋`, `S ≥ 2⌊m/2⌋` (circle).
pub fn sturm_bounds_check(spectrum: &SlSpectrum, combo: &CombinationSpec) -> Result<SturmVerdict, Sl1dError> {
    let field = spectrum.combination(combo)?;
    let report = count_zeros_with_multiplicity(&field)?;
    let (zero_bound, sign_change_bound) = match spectrum.topology() {
        Topology::Interval => (combo.n() - 1, combo.m() - 1),
        Topology::Circle => (circle_zero_count(combo.n()), circle_zero_count(combo.m())),
    };
    Ok(SturmVerdict {
        zeros: report.zeros_with_multiplicity,
        sign_changes: report.sign_changes,
        zero_bound,
        sign_change_bound,
        zeros_ok: report.zeros_with_multiplicity <= zero_bound,
        sign_changes_ok: report.sign_changes >= sign_change_bound,
        report,
    })
}

/// `Y_ℓ = Σ (−λ_j)^ℓ a_j V_j` on an interval, `Σ (λ_1 − λ_j)^ℓ a_j V_j` on the circle.
pub fn y_ell(spectrum: &SlSpectrum, combo: &CombinationSpec, ell: u32) -> Result<Field1d, Sl1dError> {
    if combo.n() > spectrum.len() {
        return Err(Sl1dError::IndexOutOfRange { index: combo.n(), available: spectrum.len() });
    }
    let l1 = spectrum.eigenvalue(1);
    let coefficients: Vec<f64> = combo
        .coefficients()
        .iter()
        .enumerate()
        .map(|(offset, &a)| {
            let lambda = spectrum.eigenvalue(combo.m() + offset);
            let factor = match spectrum.topology() {
                Topology::Interval => -lambda,
                Topology::Circle => l1 - lambda,
            };
            factor.powi(ell as i32) * a
        })
        .collect();
    spectrum.linear_combination(combo.m(), &coefficients)
}

/// `U(x) = det[V_i(z_1), …, V_i(z_k), V_i(x)]_{i=1..k+1}`, expanded along the last column.
pub fn liouville_determinant(spectrum: &SlSpectrum, z_points: &[f64]) -> Result<Field1d, Sl1dError> {
    let k = z_points.len();
    if k + 1 > spectrum.len() {
        return Err(Sl1dError::IndexOutOfRange { index: k + 1, available: spectrum.len() });
    }
    let grid = spectrum.grid();
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);
    let interior = z_points.iter().all(|&z| z > lo && z < hi);
    let increasing = z_points.windows(2).all(|w| w[0] < w[1]);
    if !interior || !increasing {
        return Err(Sl1dError::DegeneratePoints);
    }
    let values: Vec<Vec<f64>> = z_points.iter().map(|&z| spectrum.eval_all(z, k + 1)).collect();
    let mut cofactors = Vec::with_capacity(k + 1);
    for row in 0..=k {
        let mut minor = Vec::with_capacity(k * k);
        for r in (0..=k).filter(|&r| r != row) {
            for col in values.iter() {
                minor.push(col[r]);
            }
        }
        let sign = if (row + k).is_multiple_of(2) { 1.0 } else { -1.0 };
        cofactors.push(sign * det(minor, k));
    }
    let scale = cofactors.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if !(scale > 1e-12) {
        return Err(Sl1dError::DegeneratePoints);
    }
    spectrum.linear_combination(1, &cofactors)
}
