use rayon::prelude::*;

use super::count::count_nodal_domains;
use super::field::SampledField;
use super::NodalError;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry {
    pub t: f64,
    /// `None` when the count failed (unresolved or unstable under refinement).
    pub beta0: Option<usize>,
    pub uncertain_fraction: Option<f64>,
    pub failure: Option<String>,
}

/// An interval of `t` across which the accepted count changes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountChange {
    pub t_low: f64,
    pub t_high: f64,
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub entries: Vec<SweepEntry>,
}

impl SweepResult {
    /// Largest accepted count and the first `t` attaining it.
    pub fn max_beta0(&self) -> Option<(usize, f64)> {
        self.entries.iter().filter_map(|e| e.beta0.map(|b| (b, e.t))).fold(None, |best, (b, t)| match best {
            Some((bb, _)) if bb >= b => best,
            _ => Some((b, t)),
        })
    }

    /// Consecutive accepted entries whose counts differ. Unresolved entries in between are
    /// absorbed into the interval.
    pub fn changes(&self) -> Vec<CountChange> {
        let accepted: Vec<(f64, usize)> = self.entries.iter().filter_map(|e| e.beta0.map(|b| (e.t, b))).collect();
        accepted
            .windows(2)
            .filter(|w| w[0].1 != w[1].1)
            .map(|w| CountChange { t_low: w[0].0, t_high: w[1].0, from: w[0].1, to: w[1].1 })
            .collect()
    }

    pub fn unresolved(&self) -> usize {
        self.entries.iter().filter(|e| e.beta0.is_none()).count()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,beta0,uncertain_fraction,failure\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{:.8e},{},{},{}\n",
                e.t,
                e.beta0.map_or(String::new(), |b| b.to_string()),
                e.uncertain_fraction.map_or(String::new(), |f| format!("{f:.5}")),
                e.failure.as_deref().unwrap_or("")
            ));
        }
        out
    }
}

/// Counts nodal domains of `u + t·v` for each `t`, in parallel over `t`.
pub fn coefficient_sweep(u: &SampledField, v: &SampledField, t_values: &[f64]) -> Result<SweepResult, NodalError> {
    if t_values.windows(2).any(|w| w[0] > w[1]) {
        return Err(NodalError::UnsortedSweep);
    }
    // Fail fast on mismatched grids before spawning work.
    SampledField::combine(&[(1.0, u), (0.0, v)])?;
    let entries = t_values
        .par_iter()
        .map(|&t| {
            let field = SampledField::combine(&[(1.0, u), (t, v)]).expect("grids checked");
            match count_nodal_domains(&field) {
                Ok(p) => SweepEntry { t, beta0: Some(p.beta0), uncertain_fraction: Some(p.uncertain_fraction), failure: None },
                Err(e) => SweepEntry { t, beta0: None, uncertain_fraction: None, failure: Some(e.to_string()) },
            }
        })
        .collect();
    Ok(SweepResult { entries })
}

/// `count` values evenly spaced in `log t` over `[lo, hi]`.
pub fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count).map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (count - 1) as f64).exp()).collect(),
    }
}

/// `count` values evenly spaced over `[lo, hi]`.
pub fn lin_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect(),
    }
}
