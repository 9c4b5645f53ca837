use std::fmt::Write as _;

use super::eigen::EigenResult;
use super::FemError;
use crate::spectrum::clusters;

/// Minimal correlation between a prolonged coarse eigenvector and its fine partner.
pub const PAIRING_THRESHOLD: f64 = 0.9;
/// Relative gap under which fine eigenvalues are compared as one subspace.
const PAIRING_CLUSTER_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct Extrapolated {
    pub coarse_level: usize,
    pub fine_level: usize,
    /// Coarse eigenvalue paired with each fine one.
    pub coarse: Vec<f64>,
    pub fine: Vec<f64>,
    /// `(4λ_fine − λ_coarse)/3`.
    pub values: Vec<f64>,
    /// `|λ* − λ_fine|`, used as the error estimate.
    pub errors: Vec<f64>,
    pub correlations: Vec<f64>,
}

impl Extrapolated {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,coarse,fine,extrapolated,error,correlation\n");
        for i in 0..self.values.len() {
            let _ = writeln!(
                out,
                "{},{:.10},{:.10},{:.10},{:.3e},{:.6}",
                i + 1,
                self.coarse[i],
                self.fine[i],
                self.values[i],
                self.errors[i],
                self.correlations[i]
            );
        }
        out
    }
}

fn weighted_dot(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    w.iter().zip(a).zip(b).map(|((w, a), b)| w * a * b).sum()
}

/// Richardson extrapolation across one uniform refinement, with eigenvector pairing.
pub fn extrapolate(coarse: &EigenResult, fine: &EigenResult) -> Result<Extrapolated, FemError> {
    if fine.level() != coarse.level() + 1 || fine.mesh.coarse_vertex_count() != Some(coarse.mesh.vertices.len()) {
        return Err(FemError::Mismatch(format!(
            "levels {} and {} are not consecutive refinements",
            coarse.level(),
            fine.level()
        )));
    }
    let k = coarse.len().min(fine.len());
    let w = fine.mesh.vertex_weights();
    let (lc, lf) = (&coarse.eigenvalues[..k], &fine.eigenvalues[..k]);
    // Eigenvalues that move further than their separation under refinement are compared
    // as one subspace.
    let shift = lc.iter().zip(lf).map(|(c, f)| (c - f).abs() / f.abs().max(1.0)).fold(0.0, f64::max);
    let tol = PAIRING_CLUSTER_TOL.max(4.0 * shift);
    let prolonged: Vec<Vec<f64>> = coarse.eigenvectors[..k].iter().map(|v| fine.mesh.prolong(v)).collect::<Result<_, _>>()?;
    let mut correlations = vec![0.0; k];
    let mut partner: Vec<usize> = (0..k).collect();
    for range in clusters(lf, tol) {
        // Orthonormal basis of the fine cluster in the lumped inner product.
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for j in range.clone() {
            let mut v = fine.eigenvectors[j].clone();
            for _ in 0..2 {
                for q in &basis {
                    let c = weighted_dot(&w, &v, q);
                    v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
                }
            }
            let norm = weighted_dot(&w, &v, &v).sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
        let mut overlap = Vec::new();
        for i in range.clone() {
            let p = &prolonged[i];
            let norm = weighted_dot(&w, p, p).sqrt();
            let proj: Vec<f64> = basis.iter().map(|q| weighted_dot(&w, p, q) / norm).collect();
            let c = proj.iter().map(|x| x * x).sum::<f64>().sqrt();
            if c < PAIRING_THRESHOLD {
                return Err(FemError::Pairing { index: i + 1, correlation: c });
            }
            correlations[i] = c;
            overlap.extend(range.clone().zip(&proj).map(|(j, x)| (x.abs(), i, j)));
        }
        // Greedy matching by overlap with the individual fine eigenvectors.
        overlap.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let (mut used_c, mut used_f) = (Vec::new(), Vec::new());
        for (_, i, j) in overlap {
            if !used_c.contains(&i) && !used_f.contains(&j) {
                partner[j] = i;
                used_c.push(i);
                used_f.push(j);
            }
        }
    }
    let lc: Vec<f64> = partner.iter().map(|&i| lc[i]).collect();
    let correlations: Vec<f64> = partner.iter().map(|&i| correlations[i]).collect();
    let values: Vec<f64> = lc.iter().zip(lf).map(|(c, f)| (4.0 * f - c) / 3.0).collect();
    let errors = values.iter().zip(lf).map(|(v, f)| (v - f).abs()).collect();
    Ok(Extrapolated {
        coarse_level: coarse.level(),
        fine_level: fine.level(),
        coarse: lc,
        fine: lf.to_vec(),
        values,
        errors,
        correlations,
    })
}
