//! Slater determinants of 1D eigenfunctions and the zero-count program built on them.

use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{det, halton};
use crate::sl1d::{SlSpectrum, Topology};

pub const MAX_PARTICLES: usize = 8;
const ORTHONORMAL_TOL: f64 = 1e-6;
const SCAN_POINTS: usize = 4000;
const BISECTION_TOL: f64 = 1e-12;
const TOUCH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GelfandError {
    #[error("particle count {0} outside 2..=8")]
    InvalidSize(usize),
    #[error("basis eigenvalues are not strictly increasing")]
    NotIncreasing,
    #[error("basis functions {i} and {j} have inner product {value}")]
    NotOrthonormal { i: usize, j: usize, value: f64 },
    #[error("expected {expected} coordinates, got {got}")]
    WrongArity { expected: usize, got: usize },
    #[error("points must be strictly increasing and interior")]
    BadPoints,
    #[error("all Slater minors vanish at the given points")]
    DegeneratePoints,
    #[error("coefficient vector is zero")]
    ZeroCoefficients,
    #[error("minor vector at the zeros of S_b is degenerate: solver accuracy failure")]
    SolverAccuracy,
    #[error("at least 10^4 samples required, got {0}")]
    TooFewSamples(usize),
    #[error("spectrum basis requires an interval problem with {needed} eigenpairs")]
    UnsuitableSpectrum { needed: usize },
}

#[derive(Debug, Clone)]
enum Source {
    Sine,
    Hermite,
    Spectrum(Arc<SlSpectrum>),
}

/// The first `n` eigenfunctions of a 1D problem, `λ_1 < … < λ_n`.
#[derive(Debug, Clone)]
pub struct SlaterBasis {
    n: usize,
    source: Source,
    eigenvalues: Vec<f64>,
}

/// Orthonormal Hermite functions `ψ_0..ψ_{n-1}` at `x`.
pub fn hermite_functions(n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25) * (-0.5 * x * x).exp();
    for k in 0..n {
        out.push(cur);
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    out
}

impl SlaterBasis {
    /// `√2 sin(jπx)` on `(0, 1)`, `λ_j = j²π²`.
    pub fn sine(n: usize) -> Result<Self, GelfandError> {
        check_size(n)?;
        let eigenvalues = (1..=n).map(|j| (j * j) as f64 * PI * PI).collect();
        Self::validated(n, Source::Sine, eigenvalues)
    }

    /// Hermite functions on `ℝ`, `λ_k = 2k + 1`.
    pub fn hermite(n: usize) -> Result<Self, GelfandError> {
        check_size(n)?;
        let eigenvalues = (0..n).map(|k| (2 * k + 1) as f64).collect();
        Self::validated(n, Source::Hermite, eigenvalues)
    }

    /// The first `n` computed eigenfunctions of an interval problem.
    pub fn from_spectrum(spectrum: Arc<SlSpectrum>, n: usize) -> Result<Self, GelfandError> {
        check_size(n)?;
        if spectrum.topology() != Topology::Interval || spectrum.len() < n {
            return Err(GelfandError::UnsuitableSpectrum { needed: n });
        }
        let eigenvalues = spectrum.eigenvalues()[..n].to_vec();
        Self::validated(n, Source::Spectrum(spectrum), eigenvalues)
    }

    fn validated(n: usize, source: Source, eigenvalues: Vec<f64>) -> Result<Self, GelfandError> {
        if eigenvalues.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(GelfandError::NotIncreasing);
        }
        let basis = Self { n, source, eigenvalues };
        let gram = basis.gram();
        for i in 0..n {
            for j in 0..n {
                let expected = if i == j { 1.0 } else { 0.0 };
                let value = gram[i * n + j];
                if (value - expected).abs() > ORTHONORMAL_TOL {
                    return Err(GelfandError::NotOrthonormal { i: i + 1, j: j + 1, value });
                }
            }
        }
        Ok(basis)
    }

    /// Gram matrix by quadrature: Gauss-Legendre panels for analytic bases,
    /// the solver's own trapezoid weights for tabulated ones.
    fn gram(&self) -> Vec<f64> {
        let n = self.n;
        let mut g = vec![0.0; n * n];
        let mut add = |w: f64, v: &[f64]| {
            for i in 0..n {
                for j in 0..n {
                    g[i * n + j] += w * v[i] * v[j];
                }
            }
        };
        match &self.source {
            Source::Spectrum(s) => {
                let h = s.spacing();
                let coeffs = s.problem().coefficients();
                let len = s.grid().len();
                for (k, &x) in s.grid().iter().enumerate() {
                    let w = if k == 0 || k == len - 1 { 0.5 * h } else { h };
                    let v: Vec<f64> = (1..=n).map(|j| s.eigenfunction(j)[k]).collect();
                    add(w * coeffs.g(x), &v);
                }
            }
            _ => {
                let (lo, hi) = match self.source {
                    Source::Hermite => (-14.0, 14.0),
                    _ => (0.0, 1.0),
                };
                let (nodes, weights) = gauss_legendre_8();
                let panels = 400;
                let width = (hi - lo) / panels as f64;
                for p in 0..panels {
                    let mid = lo + (p as f64 + 0.5) * width;
                    for (t, w) in nodes.iter().zip(&weights) {
                        let x = mid + 0.5 * width * t;
                        add(0.5 * width * w, &self.eval_all(x));
                    }
                }
            }
        }
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `Λ⁽ⁿ⁾ = λ_1 + … + λ_n`.
    pub fn energy(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    pub fn name(&self) -> &'static str {
        match self.source {
            Source::Sine => "sine",
            Source::Hermite => "hermite",
            Source::Spectrum(_) => "spectrum",
        }
    }

    /// Domain window used for sampling and zero scans.
    pub fn window(&self) -> (f64, f64) {
        match &self.source {
            Source::Sine => (0.0, 1.0),
            Source::Hermite => {
                let l = (2.0 * self.n as f64 + 1.0).sqrt() + 5.0;
                (-l, l)
            }
            Source::Spectrum(s) => (s.grid()[0], s.grid()[s.grid().len() - 1]),
        }
    }

    /// Window for simplex sampling (Hermite tails are truncated to keep values representable).
    fn sampling_window(&self) -> (f64, f64) {
        match self.source {
            Source::Hermite => (-3.0, 3.0),
            _ => self.window(),
        }
    }

    /// `(h_1(x), …, h_n(x))`.
    pub fn eval_all(&self, x: f64) -> Vec<f64> {
        match &self.source {
            Source::Sine => (1..=self.n).map(|j| SQRT_2 * (j as f64 * PI * x).sin()).collect(),
            Source::Hermite => hermite_functions(self.n, x),
            Source::Spectrum(s) => s.eval_all(x, self.n),
        }
    }

    /// `h_j(x)`, 1-based.
    pub fn eval(&self, j: usize, x: f64) -> f64 {
        self.eval_all(x)[j - 1]
    }

    /// `Σ_j b_j h_j(x)`.
    pub fn combination(&self, b: &[f64], x: f64) -> f64 {
        self.eval_all(x).iter().zip(b).map(|(h, c)| h * c).sum()
    }
}

fn check_size(n: usize) -> Result<(), GelfandError> {
    if (2..=MAX_PARTICLES).contains(&n) {
        Ok(())
    } else {
        Err(GelfandError::InvalidSize(n))
    }
}

fn gauss_legendre_8() -> ([f64; 8], [f64; 8]) {
    let x = [
        -0.960_289_856_497_536_3,
        -0.796_666_477_413_626_7,
        -0.525_532_409_916_329,
        -0.183_434_642_495_649_8,
        0.183_434_642_495_649_8,
        0.525_532_409_916_329,
        0.796_666_477_413_626_7,
        0.960_289_856_497_536_3,
    ];
    let w = [
        0.101_228_536_290_376_3,
        0.222_381_034_453_374_5,
        0.313_706_645_877_887_3,
        0.362_683_783_378_362,
        0.362_683_783_378_362,
        0.313_706_645_877_887_3,
        0.222_381_034_453_374_5,
        0.101_228_536_290_376_3,
    ];
    (x, w)
}

/// `det[h_i(x_j)]` by pivoted elimination.
pub fn slater_eval(basis: &SlaterBasis, point: &[f64]) -> Result<f64, GelfandError> {
    let n = basis.n();
    if point.len() != n {
        return Err(GelfandError::WrongArity { expected: n, got: point.len() });
    }
    let cols: Vec<Vec<f64>> = point.iter().map(|&x| basis.eval_all(x)).collect();
    let mut m = Vec::with_capacity(n * n);
    for i in 0..n {
        for col in &cols {
            m.push(col[i]);
        }
    }
    Ok(det(m, n))
}

fn sign_of(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Sign of the Slater determinant on the ordered simplex, from an evenly spread point.
pub fn simplex_sign(basis: &SlaterBasis) -> i8 {
    let (lo, hi) = basis.sampling_window();
    let n = basis.n();
    let p: Vec<f64> = (1..=n).map(|j| lo + (hi - lo) * j as f64 / (n + 1) as f64).collect();
    sign_of(slater_eval(basis, &p).expect("arity matches"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonvanishingVerdict {
    pub pass: bool,
    pub sign: i8,
    pub samples: usize,
    pub min_ratio: f64,
    /// Two simplex points with opposite signs, when found.
    pub witness: Option<(Vec<f64>, Vec<f64>)>,
}

/// Default relative floor on `|S_n|` over the sampled simplex.
pub const NONVANISHING_TOL: f64 = 1e-14;

/// Sample the ordered simplex at sorted Halton points and check for a constant sign.
pub fn simplex_nonvanishing_check(
    basis: &SlaterBasis,
    samples: usize,
    tolerance: f64,
) -> Result<NonvanishingVerdict, GelfandError> {
    if samples < 10_000 {
        return Err(GelfandError::TooFewSamples(samples));
    }
    let n = basis.n();
    let (lo, hi) = basis.sampling_window();
    let mut first: Option<(Vec<f64>, i8)> = None;
    let mut witness = None;
    let (mut min, mut max) = (f64::INFINITY, 0.0f64);
    for index in 1..=samples as u64 {
        let mut p: Vec<f64> = halton(index, n).iter().map(|u| lo + (hi - lo) * u).collect();
        p.sort_by(f64::total_cmp);
        let v = slater_eval(basis, &p)?;
        min = min.min(v.abs());
        max = max.max(v.abs());
        let s = sign_of(v);
        match &first {
            None => first = Some((p, s)),
            Some((q, s0)) => {
                if s != *s0 && witness.is_none() {
                    witness = Some((q.clone(), p));
                }
            }
        }
    }
    let sign = first.map(|(_, s)| s).unwrap_or(0);
    let min_ratio = if max > 0.0 { min / max } else { 0.0 };
    Ok(NonvanishingVerdict {
        pass: witness.is_none() && sign != 0 && min_ratio > tolerance,
        sign,
        samples,
        min_ratio,
        witness,
    })
}

/// Signed cofactors `s_j` with `S_n(c_1, …, c_{n−1}, x) = Σ_j s_j h_j(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinorVector {
    pub c: Vec<f64>,
    pub s: Vec<f64>,
}

impl MinorVector {
    pub fn eval(&self, basis: &SlaterBasis, x: f64) -> f64 {
        basis.combination(&self.s, x)
    }
}

fn check_points(basis: &SlaterBasis, c: &[f64]) -> Result<(), GelfandError> {
    if c.len() + 1 != basis.n() {
        return Err(GelfandError::WrongArity { expected: basis.n() - 1, got: c.len() });
    }
    let (lo, hi) = basis.window();
    let ok = c.windows(2).all(|w| w[0] < w[1]) && c.iter().all(|&x| x > lo && x < hi);
    if ok {
        Ok(())
    } else {
        Err(GelfandError::BadPoints)
    }
}

pub fn slater_minors(basis: &SlaterBasis, c: &[f64]) -> Result<MinorVector, GelfandError> {
    check_points(basis, c)?;
    let n = basis.n();
    let cols: Vec<Vec<f64>> = c.iter().map(|&x| basis.eval_all(x)).collect();
    let mut s = Vec::with_capacity(n);
    for row in 0..n {
        let mut minor = Vec::with_capacity((n - 1) * (n - 1));
        for r in (0..n).filter(|&r| r != row) {
            for col in &cols {
                minor.push(col[r]);
            }
        }
        // (−1)^{i+n} with 1-based i = row + 1
        let sign = if (row + 1 + n).is_multiple_of(2) { 1.0 } else { -1.0 };
        s.push(sign * det(minor, n - 1));
    }
    let scale = s.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(scale > 1e-13) {
        return Err(GelfandError::DegeneratePoints);
    }
    Ok(MinorVector { c: c.to_vec(), s })
}

/// A zero of a 1D function found by a scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanZero {
    pub position: f64,
    /// `false` for a flagged touching zero (|f| dips below threshold without a sign change).
    pub sign_change: bool,
}

/// Zeros of `f` on `(lo, hi)`: sign-change brackets refined by bisection, plus flagged touching zeros.
pub fn scan_zeros(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Vec<ScanZero> {
    let m = SCAN_POINTS;
    let xs: Vec<f64> = (1..m).map(|i| lo + (hi - lo) * i as f64 / m as f64).collect();
    let vs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let max = vs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut out = Vec::new();
    for i in 0..xs.len() {
        if vs[i] == 0.0 {
            out.push(ScanZero { position: xs[i], sign_change: i > 0 && i + 1 < vs.len() && vs[i - 1] * vs[i + 1] < 0.0 });
            continue;
        }
        if i + 1 < xs.len() && vs[i] * vs[i + 1] < 0.0 {
            let (mut a, mut b, fa) = (xs[i], xs[i + 1], vs[i]);
            while b - a > BISECTION_TOL {
                let mid = 0.5 * (a + b);
                let fm = f(mid);
                if fm == 0.0 {
                    a = mid;
                    b = mid;
                    break;
                }
                if (fm > 0.0) == (fa > 0.0) {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            out.push(ScanZero { position: 0.5 * (a + b), sign_change: true });
        }
        if i > 0 && i + 1 < xs.len() {
            let (l, r) = (vs[i - 1], vs[i + 1]);
            let a = vs[i].abs();
            let same = l * vs[i] > 0.0 && r * vs[i] > 0.0;
            if same && a < l.abs() && a <= r.abs() && a < TOUCH_TOL * max {
                out.push(ScanZero { position: xs[i], sign_change: false });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlabVerdict {
    pub slab_signs: Vec<i8>,
    pub expected_signs: Vec<i8>,
    pub changes_at_every_c: bool,
    pub pass: bool,
}

/// Signs of `x ↦ S_n(c, x)` on the slabs `(c_{j−1}, c_j)` against `(−1)^{n−j}` times the simplex sign.
pub fn sign_change_structure(basis: &SlaterBasis, c: &[f64]) -> Result<SlabVerdict, GelfandError> {
    let minors = slater_minors(basis, c)?;
    let n = basis.n();
    let global = simplex_sign(basis);
    let (lo, hi) = basis.window();
    let mut edges = vec![lo];
    edges.extend_from_slice(c);
    edges.push(hi);
    let mut slab_signs = Vec::with_capacity(n);
    for j in 0..n {
        let (a, b) = (edges[j], edges[j + 1]);
        let samples = 64;
        let signs: Vec<i8> = (1..samples)
            .map(|k| sign_of(minors.eval(basis, a + (b - a) * k as f64 / samples as f64)))
            .collect();
        let s = signs[0];
        slab_signs.push(if signs.iter().all(|&t| t == s) { s } else { 0 });
    }
    let expected_signs: Vec<i8> = (1..=n)
        .map(|j| if (n - j).is_multiple_of(2) { global } else { -global })
        .collect();
    let changes_at_every_c = slab_signs.windows(2).all(|w| w[0] != 0 && w[0] == -w[1]);
    Ok(SlabVerdict {
        pass: changes_at_every_c && slab_signs == expected_signs,
        slab_signs,
        expected_signs,
        changes_at_every_c,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum CollinearityOutcome {
    /// `S_b` has fewer than `n − 1` zeros.
    BoundAlreadySatisfied,
    Collinear { sin_angle: f64, minors: MinorVector },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollinearityVerdict {
    pub zeros: Vec<ScanZero>,
    pub outcome: CollinearityOutcome,
    pub pass: bool,
}

/// A collinearity residual below this passes.
pub const COLLINEARITY_TOL: f64 = 1e-6;

/// If `S_b` has `n − 1` zeros `c`, then `b` is parallel to `s(c)` and there are no further zeros.
pub fn collinearity_check(basis: &SlaterBasis, b: &[f64]) -> Result<CollinearityVerdict, GelfandError> {
    let n = basis.n();
    if b.len() != n {
        return Err(GelfandError::WrongArity { expected: n, got: b.len() });
    }
    let bn = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(bn > 0.0) {
        return Err(GelfandError::ZeroCoefficients);
    }
    let (lo, hi) = basis.window();
    let zeros = scan_zeros(|x| basis.combination(b, x), lo, hi);
    if zeros.len() < n - 1 {
        return Ok(CollinearityVerdict {
            zeros,
            outcome: CollinearityOutcome::BoundAlreadySatisfied,
            pass: true,
        });
    }
    let c: Vec<f64> = zeros[..n - 1].iter().map(|z| z.position).collect();
    let minors = slater_minors(basis, &c).map_err(|e| match e {
        GelfandError::DegeneratePoints => GelfandError::SolverAccuracy,
        other => other,
    })?;
    let sn = minors.s.iter().map(|v| v * v).sum::<f64>().sqrt();
    let proj: f64 = b.iter().zip(&minors.s).map(|(x, y)| x * y / sn).sum();
    let resid: f64 = b
        .iter()
        .zip(&minors.s)
        .map(|(x, y)| (x - proj * y / sn).powi(2))
        .sum::<f64>()
        .sqrt();
    let sin_angle = resid / bn;
    Ok(CollinearityVerdict {
        pass: sin_angle < COLLINEARITY_TOL && zeros.len() == n - 1,
        zeros,
        outcome: CollinearityOutcome::Collinear { sin_angle, minors },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HermiteVerdict {
    pub n: usize,
    pub constant: f64,
    pub max_relative_deviation: f64,
    pub pass: bool,
}

/// Ratio `S_n / (Π_{i<j}(x_i − x_j) e^{−|x|²/2})` at random points.
pub fn hermite_closed_form_check(n: usize, seed: u64) -> Result<HermiteVerdict, GelfandError> {
    if !(2..=5).contains(&n) {
        return Err(GelfandError::InvalidSize(n));
    }
    let basis = SlaterBasis::hermite(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ratios = Vec::with_capacity(200);
    while ratios.len() < 200 {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-2.5..2.5)).collect();
        let mut vdm = 1.0;
        for i in 0..n {
            for j in i + 1..n {
                vdm *= x[i] - x[j];
            }
        }
        let gauss = (-0.5 * x.iter().map(|v| v * v).sum::<f64>()).exp();
        let denom = vdm * gauss;
        if denom.abs() < 1e-12 {
            continue;
        }
        ratios.push(slater_eval(&basis, &x)? / denom);
    }
    let mut sorted = ratios.clone();
    sorted.sort_by(f64::total_cmp);
    let constant = sorted[sorted.len() / 2];
    let max_relative_deviation = ratios
        .iter()
        .map(|r| ((r - constant) / constant).abs())
        .fold(0.0f64, f64::max);
    Ok(HermiteVerdict {
        n,
        constant,
        max_relative_deviation,
        pass: max_relative_deviation < 1e-8,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_are_bounded() {
        assert!(SlaterBasis::sine(1).is_err());
        assert!(SlaterBasis::sine(9).is_err());
        assert!(SlaterBasis::hermite(8).is_ok());
    }

    #[test]
    fn hermite_functions_satisfy_the_oscillator_equation() {
        let h = 1e-3;
        for &x in &[-1.7, -0.2, 0.9, 2.3] {
            let v = hermite_functions(6, x);
            let vp = hermite_functions(6, x + h);
            let vm = hermite_functions(6, x - h);
            for k in 0..6 {
                let lap = (vp[k] - 2.0 * v[k] + vm[k]) / (h * h);
                let lhs = -lap + x * x * v[k];
                assert!((lhs - (2 * k + 1) as f64 * v[k]).abs() < 1e-4, "k={k}");
            }
        }
    }
}
