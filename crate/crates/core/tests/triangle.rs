use std::f64::consts::PI;
use std::sync::Arc;

use courant_core::geometry::{Point, Polygon, Reflection, SQRT3};
use courant_core::triangle::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn th(s: &str) -> MixedProblemId {
    MixedProblemId::th(s).unwrap()
}

fn multiples(s: &MixedSpectrum) -> Vec<u64> {
    s.entries.iter().map(|e| e.multiple).collect()
}

#[test]
fn lambda_hat_values() {
    assert!((lambda_hat(LatticePair::new(0, 1)) - 17.546).abs() < 1e-3);
    assert!((lambda_hat(LatticePair::new(1, 1)) - 52.638).abs() < 1e-3);
    assert_eq!(lambda_hat(LatticePair::new(0, 0)), 0.0);
    assert!((lambda_hat(LatticePair::new(2, 3)) - 19.0 * 16.0 * PI * PI / 9.0).abs() < 1e-12);
}

#[test]
fn ndn_below_160() {
    let s = enumerate_mixed_spectrum(th("ndn"), 160.0).unwrap();
    assert_eq!(multiples(&s), vec![1, 4, 7, 9]);
    assert!(s.entries.iter().all(|e| e.multiplicity == 1));
}

#[test]
fn dnd_below_380() {
    let s = enumerate_mixed_spectrum(th("dnd"), 380.0).unwrap();
    assert_eq!(multiples(&s), vec![3, 7, 12, 13, 19, 21]);
}

#[test]
fn equilateral_neumann_multiplicity() {
    let s = enumerate_mixed_spectrum(MixedProblemId::te("nnn").unwrap(), 200.0).unwrap();
    assert_eq!(s.multiplicity_of(7), 2);
    let e = s.entries.iter().find(|e| e.multiple == 7).unwrap();
    assert_eq!(e.pairs, vec![LatticePair::new(1, 2), LatticePair::new(2, 1)]);
    assert_eq!(s.multiplicity_of(0), 1);
    let d = enumerate_mixed_spectrum(MixedProblemId::te("ddd").unwrap(), 200.0).unwrap();
    assert_eq!(d.entries[0].multiple, 3);
}

#[test]
fn brute_force_multiplicities() {
    // Count admissible pairs directly for every value up to the default cutoff.
    let cases: [(&str, fn(u32, u32) -> bool); 4] =
        [("nnn", |m, n| m <= n), ("ndn", |m, n| m < n), ("dnd", |m, n| 1 <= m && m <= n), ("ddd", |m, n| 1 <= m && m < n)];
    for (letters, rule) in cases {
        let s = enumerate_mixed_spectrum(th(letters), DEFAULT_CUTOFF).unwrap();
        for e in &s.entries {
            let count = (0..40u32)
                .flat_map(|m| (0..40u32).map(move |n| (m, n)))
                .filter(|&(m, n)| rule(m, n) && (m * m + m * n + n * n) as u64 == e.multiple)
                .count();
            assert_eq!(count, e.multiplicity, "{letters} at {}", e.multiple);
        }
        assert!(s.entries.windows(2).all(|w| w[0].value < w[1].value));
        assert!(s.entries.last().unwrap().value <= DEFAULT_CUTOFF);
    }
}

#[test]
fn unsupported_problems() {
    for letters in ["nnd", "ndd", "dnn", "ddn"] {
        assert!(matches!(enumerate_mixed_spectrum(th(letters), 100.0), Err(TriangleError::Unsupported(_))));
    }
    assert!(enumerate_mixed_spectrum(MixedProblemId::te("nnd").unwrap(), 100.0).is_err());
    assert!(matches!(enumerate_mixed_spectrum(th("nnn"), f64::NAN), Err(TriangleError::InvalidCutoff(_))));
}

#[test]
fn neumann_table() {
    let t = analytic_table(th("nnn"), th("ndn"), 6).unwrap();
    let multiples: Vec<u64> = t.rows.iter().map(|r| r.multiple).collect();
    assert_eq!(multiples, vec![0, 1, 3, 4, 7, 9]);
    let first: Vec<Option<usize>> = t.rows.iter().map(|r| r.indices[0]).collect();
    let second: Vec<Option<usize>> = t.rows.iter().map(|r| r.indices[1]).collect();
    assert_eq!(first, (1..=6).map(Some).collect::<Vec<_>>());
    assert_eq!(second, vec![None, Some(1), None, Some(2), Some(3), Some(4)]);
    assert_eq!(t.rows[1].pairs, vec![LatticePair::new(0, 1), LatticePair::new(1, 0)]);
    assert_eq!(t.rows[2].pairs, vec![LatticePair::new(1, 1)]);
    let csv = t.to_csv();
    assert!(csv.starts_with("multiple,value,pairs,Th:nnn,Th:ndn\n"));
    assert!(csv.contains("\n7,"));
}

#[test]
fn dirichlet_table() {
    let t = analytic_table(th("dnd"), th("ddd"), 6).unwrap();
    let multiples: Vec<u64> = t.rows.iter().map(|r| r.multiple).collect();
    assert_eq!(multiples, vec![3, 7, 12, 13, 19, 21]);
    let second: Vec<Option<usize>> = t.rows.iter().map(|r| r.indices[1]).collect();
    assert_eq!(second, vec![None, Some(1), None, Some(2), Some(3), Some(4)]);
    assert_eq!(t.rows[3].pairs, vec![LatticePair::new(1, 3), LatticePair::new(3, 1)]);
    assert!(matches!(analytic_table(th("nnn"), th("ddd"), 6), Err(TriangleError::InconsistentOuter)));
}

#[test]
fn column_inclusions_and_simplicity() {
    let sub = |a: &str, b: &str| {
        let big = enumerate_mixed_spectrum(th(a), DEFAULT_CUTOFF).unwrap();
        let small = enumerate_mixed_spectrum(th(b), DEFAULT_CUTOFF).unwrap();
        small.entries.iter().all(|e| big.multiplicity_of(e.multiple) >= e.multiplicity)
    };
    assert!(sub("nnn", "ndn"));
    assert!(sub("dnd", "ddd"));
    for letters in ["nnn", "ndn", "dnd", "ddd"] {
        let s = enumerate_mixed_spectrum(th(letters), 9.0 * LAMBDA_UNIT).unwrap();
        assert!(s.entries.iter().all(|e| e.multiplicity == 1), "{letters}");
    }
}

#[test]
fn mixed_spectrum_csv() {
    let csv = enumerate_mixed_spectrum(th("ndn"), 160.0).unwrap().to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "problem,index,value,multiple,m,n,multiplicity,symmetry,kappa");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("Th:ndn,1,17.54"));
    assert!(lines[1].ends_with(",1,(-,+),1"));
}

#[test]
fn phi2_point_values() {
    assert!((phi2_neumann(0.0, 0.0) - 3.0).abs() < 1e-15);
    for y in [0.0, 0.1, 0.3, 0.43] {
        assert!((phi2_neumann(0.75, y) + 1.0).abs() < 1e-15);
    }
}

/// Uniform points of the lower equilateral half, kept `margin` away from its sides.
fn interior_points(count: usize, margin: f64, seed: u64) -> Vec<Point> {
    let tri = Polygon::equilateral();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let p = [rng.random::<f64>(), rng.random::<f64>() * SQRT3 / 2.0];
        if tri.contains(p, -margin) {
            out.push(p);
        }
    }
    out
}

#[test]
fn phi2_is_an_eigenfunction() {
    // Fourth-order five-point stencils in each direction.
    let h = 1e-3;
    let d2 = |g: &dyn Fn(f64) -> f64| (-g(2.0 * h) + 16.0 * g(h) - 30.0 * g(0.0) + 16.0 * g(-h) - g(-2.0 * h)) / (12.0 * h * h);
    for p in interior_points(50, 0.01, 3) {
        let lap = d2(&|s| phi2_neumann(p[0] + s, p[1])) + d2(&|s| phi2_neumann(p[0], p[1] + s));
        let lhs = -lap;
        let rhs = LAMBDA_UNIT * phi2_neumann(p[0], p[1]);
        assert!((lhs - rhs).abs() < 1e-6 * rhs.abs().max(LAMBDA_UNIT), "{p:?}: {lhs} vs {rhs}");
    }
}

#[test]
fn phi2_satisfies_neumann_condition() {
    let tri = Polygon::equilateral();
    let h = 1e-4;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for k in 0..100 {
        let (a, b) = tri.side(k % 3);
        let s: f64 = rng.random::<f64>() * 0.98 + 0.01;
        let p = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
        let len = (b[0] - a[0]).hypot(b[1] - a[1]);
        let normal = [(b[1] - a[1]) / len, -(b[0] - a[0]) / len];
        let g = |t: f64| phi2_neumann(p[0] + t * normal[0], p[1] + t * normal[1]);
        let dn = (g(h) - g(-h)) / (2.0 * h);
        assert!(dn.abs() < 1e-6, "side {} at {p:?}: {dn}", k % 3);
    }
}

fn phi2_eval() -> PlaneEvaluator {
    Arc::new(|p: Point| phi2_neumann(p[0], p[1]))
}

#[test]
fn even_extension_of_constant() {
    let f = reflect_extend(Arc::new(|_| 1.0), Sign::Plus);
    assert!(f.is_continuous());
    for p in sample_rhombus(200, 5) {
        assert_eq!(f.eval(p), 1.0);
    }
}

#[test]
fn odd_extension_of_constant_is_discontinuous() {
    let f = reflect_extend(Arc::new(|_| 1.0), Sign::Minus);
    assert!(!f.is_continuous());
    let m = Reflection::short_diagonal();
    for p in sample_rhombus(200, 6) {
        let expected = if m.signed_distance(p) > 0.0 { 1.0 } else { -1.0 };
        if m.signed_distance(p).abs() > 1e-12 {
            assert_eq!(f.eval(p), expected, "{p:?}");
        }
    }
    // An odd extension of a function vanishing on the mirror is continuous.
    let g = reflect_extend(Arc::new(|p: Point| SQRT3 - SQRT3 * p[0] - p[1]), Sign::Minus);
    assert!(g.is_continuous());
}

#[test]
fn extended_phi2_is_doubly_even() {
    let f = reflect_extend(phi2_eval(), Sign::Plus);
    let class = SymmetryClass::new(Sign::Plus, Sign::Plus);
    assert!(f.symmetry_defect(class, 1000, 2) < 1e-9);
    // The extension is smooth across the mirror: one-sided slopes agree.
    let h = 1e-5;
    for s in [0.2, 0.5, 0.8] {
        let p = [1.0 - 0.5 * s, 0.5 * SQRT3 * s];
        let n = [SQRT3 / 2.0, 0.5];
        let up = (f.eval([p[0] + h * n[0], p[1] + h * n[1]]) - f.eval(p)) / h;
        let down = (f.eval(p) - f.eval([p[0] - h * n[0], p[1] - h * n[1]])) / h;
        assert!((up - down).abs() < 1e-3);
    }
}

#[test]
fn projection_of_constant() {
    let f = RhombusFunction::new(|_| 2.5);
    let parts = symmetry_project(&f);
    for p in sample_rhombus(100, 7) {
        for (class, g) in &parts {
            let expected = if *class == SymmetryClass::ALL[0] { 2.5 } else { 0.0 };
            assert!((g.eval(p) - expected).abs() < 1e-15);
        }
    }
}

#[test]
fn projection_of_extended_phi2() {
    let f = reflect_extend(phi2_eval(), Sign::Plus);
    let parts = symmetry_project(&f);
    let pts = sample_rhombus(1000, 8);
    let scale = pts.iter().map(|&p| f.eval(p).abs()).fold(0.0, f64::max);
    for (class, g) in &parts {
        if class.sigma == Sign::Minus {
            let worst = pts.iter().map(|&p| g.eval(p).abs()).fold(0.0, f64::max);
            assert!(worst < 1e-12 * scale, "{class}: {worst}");
        }
    }
}

fn bump(centre: Point, width: f64, tilt: f64) -> RhombusFunction {
    RhombusFunction::new(move |p: Point| {
        let r2 = (p[0] - centre[0]).powi(2) + (p[1] - centre[1]).powi(2);
        (-r2 / (width * width)).exp() + tilt * p[0] * p[1]
    })
}

#[test]
fn projection_reconstructs_bump() {
    let f = bump([0.4, 0.2], 0.3, 0.7);
    let parts = symmetry_project(&f);
    for p in sample_rhombus(500, 9) {
        let sum: f64 = parts.iter().map(|(_, g)| g.eval(p)).sum();
        assert!((sum - f.eval(p)).abs() <= 1e-12 * f.eval(p).abs().max(1.0));
    }
    for (class, g) in &parts {
        assert!(g.symmetry_defect(*class, 300, 10) < 1e-12);
    }
}

fn column(letters: &str, values: &[f64]) -> SpectrumColumn {
    SpectrumColumn::computed(th(letters), values.to_vec(), vec![0.01; values.len()])
}

#[test]
fn neumann_rhombus_ordering() {
    let cutoff = 100.0;
    let columns = vec![
        SpectrumColumn::analytic(&enumerate_mixed_spectrum(th("nnn"), DEFAULT_CUTOFF).unwrap()),
        SpectrumColumn::analytic(&enumerate_mixed_spectrum(th("ndn"), DEFAULT_CUTOFF).unwrap()),
        column("nnd", &[7.16, 37.49, 90.06, 120.87]),
        column("ndd", &[47.63, 110.36, 189.52, 224.68]),
    ];
    let s = rhombus_spectrum_assemble(&columns, cutoff).unwrap();
    let v = s.values();
    assert_eq!(v[0], 0.0);
    assert!(v[0] < v[1] && v[1] < v[2] && v[3] < v[4]);
    assert_eq!(v[2], v[3]);
    assert_eq!(s.entries[1].problem, th("nnd"));
    assert_eq!(s.entries[1].class, SymmetryClass::new(Sign::Plus, Sign::Minus));
    assert_eq!(s.entries[2].kappa, 3);
    assert_eq!(s.entries[3].kappa, 3);
    assert_eq!(s.entries[2].multiplicity, 2);
    let classes: Vec<SymmetryClass> = s.entries[2..4].iter().map(|e| e.class).collect();
    assert!(classes.contains(&SymmetryClass::new(Sign::Plus, Sign::Plus)));
    assert!(classes.contains(&SymmetryClass::new(Sign::Minus, Sign::Plus)));
    assert_eq!(s.entries[4].problem, th("nnd"));
    assert!(s.to_csv().lines().count() == v.len() + 1);
}

#[test]
fn assembly_errors() {
    let nnn = SpectrumColumn::analytic(&enumerate_mixed_spectrum(th("nnn"), 200.0).unwrap());
    let ndn = SpectrumColumn::analytic(&enumerate_mixed_spectrum(th("ndn"), 200.0).unwrap());
    let dnd = SpectrumColumn::analytic(&enumerate_mixed_spectrum(th("dnd"), 200.0).unwrap());
    let nnd = column("nnd", &[7.16, 37.49, 90.06, 120.87]);
    let ndd = column("ndd", &[47.63, 110.36, 189.52, 224.68]);
    assert_eq!(
        rhombus_spectrum_assemble(&[nnn.clone(), ndn.clone(), nnd.clone(), dnd], 100.0),
        Err(TriangleError::InconsistentOuter)
    );
    assert!(matches!(
        rhombus_spectrum_assemble(&[nnn.clone(), ndn.clone(), nnd.clone(), nnd.clone()], 100.0),
        Err(TriangleError::DuplicateClass(_))
    ));
    assert!(matches!(
        rhombus_spectrum_assemble(&[nnn.clone(), ndn.clone(), nnd.clone(), ndd.clone()], 150.0),
        Err(TriangleError::IncompleteColumn { .. })
    ));
    assert!(matches!(rhombus_spectrum_assemble(&[nnn, ndn], 100.0), Err(TriangleError::ColumnCount(2))));
}

proptest! {
    #[test]
    fn projectors_are_idempotent(cx in 0.2f64..1.2, cy in 0.1f64..0.7, w in 0.1f64..0.5, tilt in -1.0f64..1.0) {
        let f = bump([cx, cy], w, tilt);
        for (class, g) in symmetry_project(&f) {
            let again = symmetry_project(&g);
            for p in sample_rhombus(20, 4) {
                for (other, h) in &again {
                    let expected = if *other == class { g.eval(p) } else { 0.0 };
                    prop_assert!((h.eval(p) - expected).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn lambda_hat_is_symmetric_and_monotone(m in 0u32..50, n in 0u32..50) {
        let a = LatticePair::new(m, n);
        prop_assert_eq!(lambda_hat(a), lambda_hat(LatticePair::new(n, m)));
        prop_assert!(lambda_hat(LatticePair::new(m + 1, n)) > lambda_hat(a));
    }
}
