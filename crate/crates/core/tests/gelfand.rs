use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use courant_core::gelfand::*;
use courant_core::sl1d::{solve_sl, Boundary, CoefficientTriple, Geometry1d, SlProblem};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Determinant by the Leibniz permutation expansion.
fn leibniz(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = 0.0;
    permute(&mut perm, 0, m, &mut total);
    total
}

fn permute(p: &mut Vec<usize>, k: usize, m: &[Vec<f64>], total: &mut f64) {
    let n = p.len();
    if k == n {
        let mut inversions = 0;
        for i in 0..n {
            for j in i + 1..n {
                if p[i] > p[j] {
                    inversions += 1;
                }
            }
        }
        let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
        *total += sign * (0..n).map(|i| m[i][p[i]]).product::<f64>();
        return;
    }
    for i in k..n {
        p.swap(k, i);
        permute(p, k + 1, m, total);
        p.swap(k, i);
    }
}

fn sine(j: usize, x: f64) -> f64 {
    SQRT_2 * (j as f64 * PI * x).sin()
}

fn sine_matrix(x: &[f64]) -> Vec<Vec<f64>> {
    (1..=x.len()).map(|i| x.iter().map(|&xj| sine(i, xj)).collect()).collect()
}

fn sorted_uniform(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(lo..hi)).collect();
    v.sort_by(f64::total_cmp);
    v
}

#[test]
fn two_particle_sine_value() {
    let b = SlaterBasis::sine(2).unwrap();
    let v = slater_eval(&b, &[0.25, 0.5]).unwrap();
    // unnormalized closed form sin(π/4)sin(π) − sin(π/2)sin(π/2) = −1, times (√2)²
    let closed = (PI * 0.25).sin() * (2.0 * PI * 0.5).sin() - (PI * 0.5).sin() * (2.0 * PI * 0.25).sin();
    assert!((closed + 1.0).abs() < 1e-15);
    assert!((v - 2.0 * closed).abs() < 1e-14);
    assert_eq!(slater_eval(&b, &[0.3, 0.3]).unwrap(), 0.0);
    assert!(matches!(slater_eval(&b, &[0.3]), Err(GelfandError::WrongArity { .. })));
}

#[test]
fn lu_determinant_matches_leibniz() {
    let b = SlaterBasis::sine(4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let x: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..1.0)).collect();
        let a = slater_eval(&b, &x).unwrap();
        let o = leibniz(&sine_matrix(&x));
        assert!((a - o).abs() < 1e-12 * o.abs().max(1e-3));
    }
}

#[test]
fn nonvanishing_on_the_simplex() {
    let h2 = simplex_nonvanishing_check(&SlaterBasis::hermite(2).unwrap(), 10_000, NONVANISHING_TOL).unwrap();
    assert!(h2.pass && h2.sign == 1, "{h2:?}");

    let s2 = SlaterBasis::sine(2).unwrap();
    let v = simplex_nonvanishing_check(&s2, 10_000, NONVANISHING_TOL).unwrap();
    assert!(v.pass);
    // dense 2D grid oracle on 0 < x₁ < x₂ < 1
    let m = 400;
    for i in 1..m {
        for j in i + 1..m {
            let (x1, x2) = (i as f64 / m as f64, j as f64 / m as f64);
            let d = sine(1, x1) * sine(2, x2) - sine(2, x1) * sine(1, x2);
            assert_eq!(d.signum() as i8, v.sign);
        }
    }

    let s4 = SlaterBasis::sine(4).unwrap();
    let v = simplex_nonvanishing_check(&s4, 10_000, NONVANISHING_TOL).unwrap();
    assert!(v.pass, "{v:?}");
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let x = sorted_uniform(&mut rng, 4, 0.0, 1.0);
        assert_eq!(leibniz(&sine_matrix(&x)).signum() as i8, v.sign);
    }
    assert!(matches!(simplex_nonvanishing_check(&s4, 100, 1e-14), Err(GelfandError::TooFewSamples(100))));
}

#[test]
fn nonvanishing_for_a_computed_basis() {
    let p = SlProblem::new(
        Geometry1d::Interval { start: 0.0, end: PI },
        CoefficientTriple::mathieu(10.0),
        Boundary::Dirichlet,
    )
    .unwrap();
    let s = Arc::new(solve_sl(&p, 1024, 6).unwrap());
    let b = SlaterBasis::from_spectrum(s, 3).unwrap();
    assert!(simplex_nonvanishing_check(&b, 10_000, NONVANISHING_TOL).unwrap().pass);
}

#[test]
fn minors_two_particles() {
    let b = SlaterBasis::sine(2).unwrap();
    let m = slater_minors(&b, &[0.5]).unwrap();
    // s₁ = −h₂(1/2) = 0, s₂ = h₁(1/2) = √2
    assert!(m.s[0].abs() < 1e-15 && (m.s[1] - SQRT_2).abs() < 1e-15);
    for &x in &[0.1, 0.37, 0.8] {
        let direct = slater_eval(&b, &[0.5, x]).unwrap();
        assert!((m.eval(&b, x) - direct).abs() < 1e-14);
    }
}

#[test]
fn minors_reconstruct_the_determinant() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let b3 = SlaterBasis::sine(3).unwrap();
    let m = slater_minors(&b3, &[1.0 / 3.0, 2.0 / 3.0]).unwrap();
    for _ in 0..20 {
        let x = rng.random_range(0.0..1.0);
        let oracle = leibniz(&sine_matrix(&[1.0 / 3.0, 2.0 / 3.0, x]));
        assert!((m.eval(&b3, x) - oracle).abs() <= 1e-10 * oracle.abs().max(1e-12));
    }
    for n in 2..=6 {
        for basis in [SlaterBasis::sine(n).unwrap(), SlaterBasis::hermite(n).unwrap()] {
            let (lo, hi) = basis.window();
            let (lo, hi) = (lo.max(-3.0), hi.min(3.0));
            let c = sorted_uniform(&mut rng, n - 1, lo, hi);
            let m = slater_minors(&basis, &c).unwrap();
            for _ in 0..20 {
                let x = rng.random_range(lo..hi);
                let mut p = c.clone();
                p.push(x);
                let direct = slater_eval(&basis, &p).unwrap();
                let scale = m.s.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                let e = m.eval(&basis, x);
                assert!((e - direct).abs() <= 1e-10 * direct.abs().max(scale), "{} n={n} {e} {direct} {scale}", basis.name());
            }
        }
    }
}

#[test]
fn minors_reject_bad_points() {
    let b = SlaterBasis::sine(3).unwrap();
    assert_eq!(slater_minors(&b, &[0.6, 0.4]), Err(GelfandError::BadPoints));
    assert_eq!(slater_minors(&b, &[0.0, 0.4]), Err(GelfandError::BadPoints));
    assert!(matches!(slater_minors(&b, &[0.4]), Err(GelfandError::WrongArity { .. })));
}

#[test]
fn property_p_zero_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for n in 2..=4 {
        let b = SlaterBasis::sine(n).unwrap();
        for _ in 0..50 {
            let c = sorted_uniform(&mut rng, n - 1, 0.02, 0.98);
            if c.windows(2).any(|w| w[1] - w[0] < 1e-3) {
                continue;
            }
            let m = slater_minors(&b, &c).unwrap();
            let zeros = scan_zeros(|x| m.eval(&b, x), 0.0, 1.0);
            assert_eq!(zeros.len(), n - 1, "c={c:?}");
            for (z, cj) in zeros.iter().zip(&c) {
                assert!((z.position - cj).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn slab_signs_alternate() {
    let b2 = SlaterBasis::sine(2).unwrap();
    let v = sign_change_structure(&b2, &[0.5]).unwrap();
    assert!(v.pass && v.slab_signs.len() == 2);

    let b3 = SlaterBasis::sine(3).unwrap();
    let v = sign_change_structure(&b3, &[0.3, 0.6]).unwrap();
    assert!(v.pass);
    assert!(v.slab_signs == vec![1, -1, 1] || v.slab_signs == vec![-1, 1, -1]);

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let b4 = SlaterBasis::sine(4).unwrap();
    for _ in 0..20 {
        let c = sorted_uniform(&mut rng, 3, 0.05, 0.95);
        let v = sign_change_structure(&b4, &c).unwrap();
        assert_eq!(v.slab_signs.len(), 4);
        assert!(v.pass, "{c:?} {v:?}");
    }
    for n in 2..=5 {
        let h = SlaterBasis::hermite(n).unwrap();
        let c = sorted_uniform(&mut rng, n - 1, -2.0, 2.0);
        assert!(sign_change_structure(&h, &c).unwrap().pass);
    }
}

#[test]
fn collinearity_examples() {
    let b3 = SlaterBasis::sine(3).unwrap();
    let v = collinearity_check(&b3, &[0.0, 0.0, 1.0]).unwrap();
    assert!(v.pass);
    assert!((v.zeros[0].position - 1.0 / 3.0).abs() < 1e-11);
    assert!((v.zeros[1].position - 2.0 / 3.0).abs() < 1e-11);
    match v.outcome {
        CollinearityOutcome::Collinear { sin_angle, ref minors } => {
            assert!(sin_angle < 1e-9);
            assert!(minors.s[0].abs() < 1e-9 * minors.s[2].abs() && minors.s[1].abs() < 1e-9 * minors.s[2].abs());
        }
        _ => panic!("expected the collinear branch"),
    }
    let v = collinearity_check(&b3, &[1.0, 0.0, 0.0]).unwrap();
    assert_eq!(v.outcome, CollinearityOutcome::BoundAlreadySatisfied);
    assert!(v.pass);
    assert_eq!(collinearity_check(&b3, &[0.0; 3]).unwrap_err(), GelfandError::ZeroCoefficients);
}

#[test]
fn random_coefficients_are_collinear_or_have_few_zeros() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for n in 2..=4 {
        for basis in [SlaterBasis::sine(n).unwrap(), SlaterBasis::hermite(n).unwrap()] {
            for _ in 0..100 {
                let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                let v = collinearity_check(&basis, &b).unwrap();
                assert!(v.pass, "{} {b:?} {v:?}", basis.name());
                assert!(v.zeros.len() < n);
                // grid-scan oracle, independent of the bracketing code
                let (lo, hi) = basis.window();
                let m = 20_000;
                let vals: Vec<f64> = (1..m).map(|i| basis.combination(&b, lo + (hi - lo) * i as f64 / m as f64)).collect();
                let crossings = vals.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
                assert!(crossings < n);
            }
        }
    }
}

fn hermite_constant(n: usize) -> f64 {
    let mut c = if (n * (n - 1) / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut fact = 1.0;
    for k in 0..n {
        if k > 0 {
            fact *= k as f64;
        }
        c *= (2f64.powi(k as i32) / (fact * PI.sqrt())).sqrt();
    }
    c
}

#[test]
fn hermite_closed_form() {
    for n in 2..=5 {
        let v = hermite_closed_form_check(n, 9).unwrap();
        assert!(v.pass, "{v:?}");
        assert!((v.constant - hermite_constant(n)).abs() < 1e-10 * hermite_constant(n).abs());
    }
    let b = SlaterBasis::hermite(3).unwrap();
    assert!(slater_eval(&b, &[0.4, -1.0, 0.4]).unwrap().abs() < 1e-15);
    assert!(hermite_closed_form_check(6, 0).is_err());
}

#[test]
fn energy_is_the_eigenvalue_sum() {
    assert_eq!(SlaterBasis::hermite(3).unwrap().energy(), 9.0);
    assert!((SlaterBasis::sine(2).unwrap().energy() - 5.0 * PI * PI).abs() < 1e-12);
}

proptest! {
    #[test]
    fn transpositions_negate(x in prop::collection::vec(0.0f64..1.0, 5), i in 0usize..5, j in 0usize..5) {
        prop_assume!(i != j);
        let b = SlaterBasis::sine(5).unwrap();
        let v = slater_eval(&b, &x).unwrap();
        let mut y = x.clone();
        y.swap(i, j);
        let w = slater_eval(&b, &y).unwrap();
        prop_assert!((v + w).abs() <= 1e-12 * v.abs().max(1e-300) + 1e-15);
    }

    #[test]
    fn expansion_identity(c in prop::collection::vec(0.01f64..0.99, 3), x in 0.0f64..1.0) {
        let mut c = c;
        c.sort_by(f64::total_cmp);
        prop_assume!(c.windows(2).all(|w| w[1] - w[0] > 1e-3));
        let b = SlaterBasis::sine(4).unwrap();
        let m = slater_minors(&b, &c).unwrap();
        let mut p = c.clone();
        p.push(x);
        let direct = slater_eval(&b, &p).unwrap();
        let scale = m.s.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        prop_assert!((m.eval(&b, x) - direct).abs() <= 1e-10 * scale);
    }
}
