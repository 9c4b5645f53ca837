use std::collections::BTreeMap;

use super::FemError;
use crate::triangle::{MixedProblemId, SpectrumColumn};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Less,
    Equal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InequalityStatus {
    Holds,
    /// The margin is within the combined error estimate.
    Inconclusive,
    Violated,
}

/// An eigenvalue reference `µ_i(problem)`, or the constant zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Term {
    Mu(MixedProblemId, usize),
    Zero,
}

impl std::fmt::Display for Term {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Term::Mu(p, i) => write!(f, "mu_{i}({})", p.letters()),
            Term::Zero => f.write_str("0"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InequalityCheck {
    pub family: &'static str,
    pub lhs: Term,
    pub rhs: Term,
    pub relation: Relation,
    pub lhs_value: f64,
    pub rhs_value: f64,
    pub margin: f64,
    pub error: f64,
    pub status: InequalityStatus,
}

impl InequalityCheck {
    pub fn describe(&self) -> String {
        let op = match self.relation {
            Relation::Less => "<",
            Relation::Equal => "=",
        };
        format!("{} {op} {}", self.lhs, self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InequalityVerdict {
    pub checks: Vec<InequalityCheck>,
}

impl InequalityVerdict {
    pub fn violations(&self) -> Vec<&InequalityCheck> {
        self.checks.iter().filter(|c| c.status == InequalityStatus::Violated).collect()
    }

    pub fn inconclusive(&self) -> Vec<&InequalityCheck> {
        self.checks.iter().filter(|c| c.status == InequalityStatus::Inconclusive).collect()
    }

    pub fn passed(&self) -> bool {
        self.violations().is_empty()
    }
}

pub const MAX_DEPTH: usize = 4;
/// Absolute slack matching the eigensolver tolerance, so that a computed zero equals 0.
const ZERO_FLOOR: f64 = 1e-8;

fn th(letters: &str) -> MixedProblemId {
    MixedProblemId::th(letters).expect("valid letters")
}

/// Chains of mixed eigenvalues on the hemiequilateral triangle: the column inequalities for
/// `i = 1..=depth` followed by the first-eigenvalue chain through the Dirichlet ground state.
pub fn inequality_chains(depth: usize) -> Vec<(&'static str, Vec<(Term, Relation, Term)>)> {
    let mu = |l: &str, i| Term::Mu(th(l), i);
    let mut out = Vec::new();
    let columns: [(&'static str, [&str; 3]); 4] = [
        ("neumann-outer", ["nnn", "ndn", "ndd"]),
        ("neumann-outer", ["nnn", "nnd", "ndd"]),
        ("dirichlet-outer", ["dnn", "ddn", "ddd"]),
        ("dirichlet-outer", ["dnn", "dnd", "ddd"]),
    ];
    for (family, chain) in columns {
        for i in 1..=depth {
            out.push((
                family,
                vec![(mu(chain[0], i), Relation::Less, mu(chain[1], i)), (mu(chain[1], i), Relation::Less, mu(chain[2], i))],
            ));
        }
    }
    let first = ["nnd", "ndn", "dnn", "ndd", "dnd", "ddn", "ddd"];
    let mut chain = vec![(Term::Zero, Relation::Equal, mu("nnn", 1)), (mu("nnn", 1), Relation::Less, mu("nnd", 1))];
    chain.extend(first.windows(2).map(|w| (mu(w[0], 1), Relation::Less, mu(w[1], 1))));
    chain.push((mu("ndn", 1), Relation::Equal, mu("nnn", 2)));
    out.push(("first-eigenvalue", chain));
    out
}

/// Checks every strict inequality with a margin exceeding the combined error estimate.
pub fn verify_inequalities(columns: &[SpectrumColumn], depth: usize) -> Result<InequalityVerdict, FemError> {
    if depth == 0 || depth > MAX_DEPTH {
        return Err(FemError::Mismatch(format!("depth {depth} outside 1..={MAX_DEPTH}")));
    }
    let by_problem: BTreeMap<MixedProblemId, &SpectrumColumn> = columns.iter().map(|c| (c.problem, c)).collect();
    let lookup = |t: Term| -> Result<(f64, f64), FemError> {
        match t {
            Term::Zero => Ok((0.0, 0.0)),
            Term::Mu(p, i) => {
                let c = by_problem.get(&p).ok_or_else(|| FemError::Mismatch(format!("missing column {p}")))?;
                match (c.values.get(i - 1), c.errors.get(i - 1)) {
                    (Some(&v), Some(&e)) => Ok((v, e)),
                    _ => Err(FemError::Mismatch(format!("column {p} has fewer than {i} values"))),
                }
            }
        }
    };
    let mut checks = Vec::new();
    for (family, chain) in inequality_chains(depth) {
        for (lhs, relation, rhs) in chain {
            let ((lv, le), (rv, re)) = (lookup(lhs)?, lookup(rhs)?);
            let error = le + re;
            let scale = 1e-12 * lv.abs().max(rv.abs()) + ZERO_FLOOR;
            let (margin, status) = match relation {
                Relation::Less => {
                    let m = rv - lv;
                    let s = if m > error + scale {
                        InequalityStatus::Holds
                    } else if m < -(error + scale) {
                        InequalityStatus::Violated
                    } else {
                        InequalityStatus::Inconclusive
                    };
                    (m, s)
                }
                Relation::Equal => {
                    let m = (rv - lv).abs();
                    (m, if m <= error + scale { InequalityStatus::Holds } else { InequalityStatus::Violated })
                }
            };
            checks.push(InequalityCheck { family, lhs, rhs, relation, lhs_value: lv, rhs_value: rv, margin, error, status });
        }
    }
    Ok(InequalityVerdict { checks })
}
