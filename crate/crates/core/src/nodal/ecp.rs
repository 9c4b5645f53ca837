use std::fmt;
use std::sync::Arc;

use super::count::{count_nodal_domains, Label, NodalPartition};
use super::field::SampledField;
use super::NodalError;
use crate::geometry::{Point, Polygon, SQRT3};
use crate::spectrum::{clusters, DEGENERACY_TOL};
use crate::triangle::{phi2_neumann, reflect_extend, RhombusFunction, Sign};

/// Largest zero-band share for which a count may support a violation.
pub const UNCERTAIN_LIMIT: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CourantIndex {
    pub kappa: usize,
    pub eigenvalue: f64,
    pub tolerance: f64,
}

/// Index of the first eigenvalue in the cluster of `mu`.
pub fn kappa(spectrum: &[f64], mu: f64, tolerance: f64) -> Result<CourantIndex, NodalError> {
    let mut sorted = spectrum.to_vec();
    sorted.sort_by(f64::total_cmp);
    clusters(&sorted, tolerance)
        .into_iter()
        .find(|r| sorted[r.clone()].iter().any(|&v| crate::spectrum::same_cluster(v, mu, tolerance)))
        .map(|r| CourantIndex { kappa: r.start + 1, eigenvalue: mu, tolerance })
        .ok_or(NodalError::NoCluster(mu))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EcpVerdict {
    Consistent,
    Violation,
    Inconclusive,
}

impl fmt::Display for EcpVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EcpVerdict::Consistent => "consistent",
            EcpVerdict::Violation => "VIOLATION",
            EcpVerdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EcpReport {
    pub description: String,
    pub beta0: Option<usize>,
    pub kappa: Option<CourantIndex>,
    pub largest_eigenvalue: f64,
    pub uncertain_fraction: Option<f64>,
    pub verdict: EcpVerdict,
    pub note: String,
}

/// Compares the nodal count of `field` with the Courant index of the largest participating
/// eigenvalue.
pub fn ecp_check(description: &str, field: &SampledField, participating: &[f64], spectrum: &[f64]) -> (EcpReport, Option<NodalPartition>) {
    let largest = participating.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut report = EcpReport {
        description: description.to_string(),
        beta0: None,
        kappa: None,
        largest_eigenvalue: largest,
        uncertain_fraction: None,
        verdict: EcpVerdict::Inconclusive,
        note: String::new(),
    };
    let k = match kappa(spectrum, largest, DEGENERACY_TOL) {
        Ok(k) => k,
        Err(e) => {
            report.note = e.to_string();
            return (report, None);
        }
    };
    report.kappa = Some(k);
    let partition = match count_nodal_domains(field) {
        Ok(p) => p,
        Err(e) => {
            report.note = e.to_string();
            return (report, None);
        }
    };
    report.beta0 = Some(partition.beta0);
    let uncertain = partition.finest_uncertain_fraction();
    report.uncertain_fraction = Some(uncertain);
    let resolved = uncertain < UNCERTAIN_LIMIT;
    report.verdict = match (partition.beta0 > k.kappa, resolved) {
        (false, _) => EcpVerdict::Consistent,
        (true, true) => EcpVerdict::Violation,
        (true, false) => EcpVerdict::Inconclusive,
    };
    report.note = format!(
        "zero band covers {:.2}% of the finest grid; recount at h/2 {}",
        100.0 * uncertain,
        match partition.refined_beta0 {
            Some(b) => format!("gives {b}"),
            None => "skipped".to_string(),
        }
    );
    (report, Some(partition))
}

/// `φ̌₂ + 1` on the rhombus, where `φ̌₂` is the even extension of the second Neumann
/// eigenfunction of the equilateral half.
pub fn phi2_plus_one() -> RhombusFunction {
    reflect_extend(Arc::new(|p: Point| phi2_neumann(p[0], p[1])), Sign::Plus).plus_constant(1.0)
}

/// The two segments on which `φ̌₂ + 1` vanishes.
pub fn phi2_nodal_segments() -> [(Point, Point); 2] {
    [([0.75, 0.0], [0.75, 0.5 * SQRT3]), ([9.0 / 8.0, SQRT3 / 8.0], [3.0 / 8.0, 3.0 * SQRT3 / 8.0])]
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticCounterexample {
    pub report: EcpReport,
    pub partition: Option<NodalPartition>,
    /// Largest `|φ̌₂ + 1|` over each segment.
    pub segment_residuals: [f64; 2],
    pub segment_samples: usize,
    /// Smallest `|φ̌₂ + 1|` over the probe family.
    pub probe_min: f64,
    /// Probe points whose grid label is a domain of the matching sign.
    pub probe_consistent: bool,
    pub probe_count: usize,
}

impl AnalyticCounterexample {
    pub fn nodal_lines_exact(&self) -> bool {
        self.segment_residuals.iter().all(|&r| r < 1e-9)
    }
}

/// Distance from `p` to the line through `a` and `b`.
fn line_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    ((p[0] - a[0]) * dy - (p[1] - a[1]) * dx).abs() / dx.hypot(dy)
}

/// Checks `φ̌₂ + 1` against the Neumann rhombus spectrum: nodal count on a grid with
/// `points` samples along x, exact vanishing on the two segments, and a sign-definite probe
/// family away from them.
pub fn counterexample_rhombus_neumann(points: usize, spectrum: &[f64]) -> Result<AnalyticCounterexample, NodalError> {
    let f = phi2_plus_one();
    let rhombus = Polygon::rhombus();
    let field = SampledField::sample("rhombus", &rhombus, points, |p| f.eval(p))?;
    let nu3 = crate::triangle::LAMBDA_UNIT;
    let (report, partition) = ecp_check("1 + phi2 (even extension)", &field, &[0.0, nu3], spectrum);

    let segment_samples = 200;
    let segment_residuals = phi2_nodal_segments().map(|(a, b)| {
        (0..segment_samples)
            .map(|i| {
                let s = i as f64 / (segment_samples - 1) as f64;
                f.eval([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]).abs()
            })
            .fold(0.0, f64::max)
    });

    // Transversal probes: horizontal lines across the rhombus, keeping points at distance
    // ≥ 0.05 from both nodal lines and from the boundary.
    let segs = phi2_nodal_segments();
    let mut probe_min = f64::INFINITY;
    let mut probe_consistent = true;
    let mut probe_count = 0;
    for r in 1..20 {
        let y = r as f64 / 20.0 * 0.5 * SQRT3;
        for s in 0..=60 {
            let x = y / SQRT3 + s as f64 / 60.0;
            let p = [x, y];
            let clear = segs.iter().all(|&(a, b)| line_distance(p, a, b) >= 0.05);
            if !clear || !rhombus.contains(p, -0.02) {
                continue;
            }
            let v = f.eval(p);
            probe_min = probe_min.min(v.abs());
            probe_count += 1;
            if let Some(part) = &partition {
                let ok = match part.label_near(p) {
                    Label::Domain(d) => part.signs[d as usize] as f64 * v > 0.0,
                    _ => false,
                };
                probe_consistent &= ok;
            }
        }
    }
    probe_consistent &= partition.is_some();
    Ok(AnalyticCounterexample {
        report,
        partition,
        segment_residuals,
        segment_samples,
        probe_min,
        probe_consistent,
        probe_count,
    })
}
