use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use super::Sl1dError;

/// Pointwise evaluator for a coefficient function.
pub type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Coefficients of `-(K u')' + Q u = λ G u`.
#[derive(Clone)]
pub struct CoefficientTriple {
    pub stiffness: Evaluator,
    pub potential: Evaluator,
    pub weight: Evaluator,
}

impl CoefficientTriple {
    pub fn new(
        stiffness: impl Fn(f64) -> f64 + Send + Sync + 'static,
        potential: impl Fn(f64) -> f64 + Send + Sync + 'static,
        weight: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            stiffness: Arc::new(stiffness),
            potential: Arc::new(potential),
            weight: Arc::new(weight),
        }
    }

    /// `K = G = 1`, `Q = 0`.
    pub fn sine() -> Self {
        Self::new(|_| 1.0, |_| 0.0, |_| 1.0)
    }

    /// `K = G = 1`, `Q = a cos x`.
    pub fn mathieu(a: f64) -> Self {
        Self::new(|_| 1.0, move |x| a * x.cos(), |_| 1.0)
    }

    pub fn k(&self, x: f64) -> f64 {
        (self.stiffness)(x)
    }

    pub fn q(&self, x: f64) -> f64 {
        (self.potential)(x)
    }

    pub fn g(&self, x: f64) -> f64 {
        (self.weight)(x)
    }
}

impl fmt::Debug for CoefficientTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CoefficientTriple { .. }")
    }
}

/// A real polynomial `c0 + c1 x + c2 x^2 + ...` parsed from strings like `1 + 0.5x^2 - x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub coefficients: Vec<f64>,
}

impl Polynomial {
    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn into_evaluator(self) -> Evaluator {
        Arc::new(move |x| self.eval(x))
    }
}

impl FromStr for Polynomial {
    type Err = Sl1dError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || Sl1dError::InvalidPolynomial(s.to_string());
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(bad());
        }
        let mut terms = Vec::new();
        let mut start = 0;
        let bytes = compact.as_bytes();
        for i in 1..bytes.len() {
            let prev = bytes[i - 1];
            if (bytes[i] == b'+' || bytes[i] == b'-') && prev != b'e' && prev != b'E' && prev != b'^' {
                terms.push(&compact[start..i]);
                start = i;
            }
        }
        terms.push(&compact[start..]);
        let mut coefficients = Vec::new();
        for term in terms {
            let (coef, power) = match term.find('x') {
                None => (term.parse::<f64>().map_err(|_| bad())?, 0usize),
                Some(pos) => {
                    let head = term[..pos].trim_end_matches('*');
                    let coef = match head {
                        "" | "+" => 1.0,
                        "-" => -1.0,
                        h => h.parse::<f64>().map_err(|_| bad())?,
                    };
                    let tail = &term[pos + 1..];
                    let power = if tail.is_empty() {
                        1
                    } else {
                        tail.strip_prefix('^')
                            .and_then(|p| p.parse::<usize>().ok())
                            .ok_or_else(bad)?
                    };
                    (coef, power)
                }
            };
            if coefficients.len() <= power {
                coefficients.resize(power + 1, 0.0);
            }
            coefficients[power] += coef;
        }
        Ok(Self { coefficients })
    }
}

/// Interval `[start, end]` or the circle of period 2π.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geometry1d {
    Interval { start: f64, end: f64 },
    Circle,
}

impl Geometry1d {
    pub fn unit_interval() -> Self {
        Self::Interval {
            start: 0.0,
            end: 1.0,
        }
    }

    pub fn length(&self) -> f64 {
        match *self {
            Self::Interval { start, end } => end - start,
            Self::Circle => 2.0 * PI,
        }
    }

    pub fn start(&self) -> f64 {
        match *self {
            Self::Interval { start, .. } => start,
            Self::Circle => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    Dirichlet,
    Neumann,
    Periodic,
}

/// Topology of a tabulated function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    Interval,
    Circle,
}

#[derive(Debug, Clone)]
pub struct SlProblem {
    geometry: Geometry1d,
    coefficients: CoefficientTriple,
    boundary: Boundary,
}

impl SlProblem {
    pub fn new(
        geometry: Geometry1d,
        coefficients: CoefficientTriple,
        boundary: Boundary,
    ) -> Result<Self, Sl1dError> {
        match (geometry, boundary) {
            (Geometry1d::Circle, Boundary::Periodic) => {
                for f in [
                    &coefficients.stiffness,
                    &coefficients.potential,
                    &coefficients.weight,
                ] {
                    let (a, b) = (f(0.0), f(2.0 * PI));
                    if (a - b).abs() > 1e-10 * a.abs().max(b.abs()).max(1.0) {
                        return Err(Sl1dError::NotPeriodic);
                    }
                }
            }
            (Geometry1d::Interval { start, end }, Boundary::Dirichlet | Boundary::Neumann) => {
                if !(start < end) || !start.is_finite() || !end.is_finite() {
                    return Err(Sl1dError::InvalidInterval { start, end });
                }
            }
            _ => return Err(Sl1dError::BoundaryMismatch),
        }
        Ok(Self {
            geometry,
            coefficients,
            boundary,
        })
    }

    /// Unit interval with `K = G = 1`, `Q = 0`.
    pub fn sine(boundary: Boundary) -> Result<Self, Sl1dError> {
        Self::new(Geometry1d::unit_interval(), CoefficientTriple::sine(), boundary)
    }

    /// Circle with the given coefficients and periodic boundary.
    pub fn circle(coefficients: CoefficientTriple) -> Result<Self, Sl1dError> {
        Self::new(Geometry1d::Circle, coefficients, Boundary::Periodic)
    }

    pub fn geometry(&self) -> Geometry1d {
        self.geometry
    }

    pub fn coefficients(&self) -> &CoefficientTriple {
        &self.coefficients
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn topology(&self) -> Topology {
        match self.geometry {
            Geometry1d::Circle => Topology::Circle,
            Geometry1d::Interval { .. } => Topology::Interval,
        }
    }
}
