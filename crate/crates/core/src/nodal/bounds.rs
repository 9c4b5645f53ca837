use super::ecp::{kappa, CourantIndex, EcpReport, EcpVerdict};
use super::NodalError;
use crate::spectrum::DEGENERACY_TOL;

#[derive(Debug, Clone, PartialEq)]
pub enum LiftOutcome {
    /// `ε < ε*`: the base combination lifts with the same count and Courant index.
    Collapsed { report: EcpReport, lifted_kappa: CourantIndex },
    NotCollapsed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiftReport {
    pub epsilon: f64,
    pub epsilon_star: f64,
    /// Sorted sums `λᵢ + ε⁻² µⱼ` not exceeding the largest base eigenvalue supplied.
    pub lifted_spectrum: Vec<f64>,
    pub outcome: LiftOutcome,
}

/// Sorted `{λᵢ + ε⁻² µⱼ}` truncated at `cap`.
pub fn product_spectrum(base: &[f64], fiber: &[f64], epsilon: f64, cap: f64) -> Vec<f64> {
    let scale = epsilon.powi(-2);
    let mut out: Vec<f64> = base
        .iter()
        .flat_map(|&l| fiber.iter().map(move |&m| l + scale * m))
        .filter(|&v| v <= cap * (1.0 + DEGENERACY_TOL) + 1e-12)
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Lifts a base report to `Ω × N` with fiber metric scaled by `ε²`. `fiber` holds the
/// fiber spectrum starting with `µ₁(N) = 0`.
pub fn product_lift(base: &EcpReport, base_spectrum: &[f64], fiber: &[f64], epsilon: f64) -> Result<LiftReport, NodalError> {
    if !(epsilon > 0.0) {
        return Err(NodalError::InvalidEpsilon(epsilon));
    }
    let mu2 = *fiber.get(1).ok_or(NodalError::FiberTooShort)?;
    if fiber[0].abs() > 1e-12 || mu2 <= 0.0 {
        return Err(NodalError::FiberTooShort);
    }
    let mu_m = base.largest_eigenvalue;
    let epsilon_star = (mu2 / mu_m).sqrt();
    let cap = base_spectrum.iter().cloned().fold(mu_m, f64::max);
    let lifted_spectrum = product_spectrum(base_spectrum, fiber, epsilon, cap);
    if epsilon >= epsilon_star {
        return Ok(LiftReport { epsilon, epsilon_star, lifted_spectrum, outcome: LiftOutcome::NotCollapsed });
    }
    let lifted_kappa = kappa(&lifted_spectrum, mu_m, DEGENERACY_TOL)?;
    let mut report = base.clone();
    report.description = format!("{} lifted with fiber scale {epsilon}", base.description);
    report.kappa = Some(lifted_kappa);
    if let Some(b) = report.beta0 {
        if report.verdict != EcpVerdict::Inconclusive {
            report.verdict = if b > lifted_kappa.kappa { EcpVerdict::Violation } else { EcpVerdict::Consistent };
        }
    }
    report.note = format!("components are cylinders over the base domains; {}", base.note);
    Ok(LiftReport { epsilon, epsilon_star, lifted_spectrum, outcome: LiftOutcome::Collapsed { report, lifted_kappa } })
}

/// `C(n, r)` with `C(n, r) = 0` for `n < r` (including negative `n`).
pub fn binomial(n: i64, r: u64) -> u128 {
    if n < 0 || (n as u64) < r {
        return 0;
    }
    let n = n as u128;
    (0..r as u128).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SphereBounds {
    pub courant: u128,
    pub leydold: Option<u128>,
    pub effective: u128,
}

/// Nodal bounds for spherical harmonics of degree `k` on the `d`-sphere.
pub fn sphere_bounds(d: u64, k: u64) -> Result<SphereBounds, NodalError> {
    if d == 0 {
        return Err(NodalError::InvalidDimension);
    }
    let (d_i, k_i) = (d as i64, k as i64);
    let courant = binomial(d_i + k_i - 1, d) + binomial(d_i + k_i - 2, d) + 1;
    let leydold = (d == 2).then(|| (k as u128) * (k as u128).saturating_sub(1) + 2);
    let effective = leydold.map_or(courant, |l| l.min(courant));
    Ok(SphereBounds { courant, leydold, effective })
}
