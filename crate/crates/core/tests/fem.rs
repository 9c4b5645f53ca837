use std::f64::consts::PI;
use std::sync::Arc;

use courant_core::fem::*;
use courant_core::geometry::{Polygon, O, SQRT3};
use courant_core::triangle::*;
use proptest::prelude::*;

fn th(l: &str) -> MixedProblemId {
    MixedProblemId::th(l).unwrap()
}

fn opts() -> SolveOptions {
    SolveOptions::default()
}

#[test]
fn refinement_quadruples_cells() {
    for domain in [MeshDomain::Hemiequilateral, MeshDomain::Equilateral, MeshDomain::Rhombus, MeshDomain::UnitSquare] {
        let base = reference_mesh(domain, 0).unwrap().cells.len();
        for level in 0..=4 {
            let mesh = reference_mesh(domain, level).unwrap();
            assert_eq!(mesh.cells.len(), base * 4usize.pow(level as u32), "{}", domain.name());
            mesh.validate().unwrap();
        }
    }
    assert!(matches!(reference_mesh(MeshDomain::Rhombus, MAX_LEVEL + 1), Err(FemError::Level(_))));
}

#[test]
fn hemiequilateral_sides_tagged_by_decreasing_length() {
    let mesh = reference_mesh(MeshDomain::Hemiequilateral, 0).unwrap();
    assert_eq!(mesh.cells.len(), 1);
    assert_eq!(mesh.sides(), vec![1, 2, 3]);
    let lengths: Vec<f64> = (1..=3).map(|s| mesh.side_length(s)).collect();
    for (l, want) in lengths.iter().zip([1.0, SQRT3 / 2.0, 0.5]) {
        assert!((l - want).abs() < 1e-14);
    }
    // Tags and lengths survive refinement.
    let fine = reference_mesh(MeshDomain::Hemiequilateral, 3).unwrap();
    for s in 1..=3 {
        assert!((fine.side_length(s) - lengths[s as usize - 1]).abs() < 1e-12);
    }
    assert!((fine.area() - SQRT3 / 8.0).abs() < 1e-14);
}

#[test]
fn rhombus_splits_into_four_quarters_at_the_centre() {
    let mesh = reference_mesh(MeshDomain::Rhombus, 0).unwrap();
    assert_eq!(mesh.cells.len(), 4);
    for cell in &mesh.cells {
        assert!(cell.iter().any(|&v| mesh.vertices[v] == O));
        let p = cell.map(|v| mesh.vertices[v]);
        let mut sides: Vec<f64> = (0..3).map(|k| (p[k][0] - p[(k + 1) % 3][0]).hypot(p[k][1] - p[(k + 1) % 3][1])).collect();
        sides.sort_by(f64::total_cmp);
        for (s, want) in sides.iter().zip([0.5, SQRT3 / 2.0, 1.0]) {
            assert!((s - want).abs() < 1e-14);
        }
    }
    assert!((mesh.area() - Polygon::rhombus().area()).abs() < 1e-14);
}

#[test]
fn mesh_text_round_trip() {
    let mesh = reference_mesh(MeshDomain::Equilateral, 2).unwrap();
    let text = mesh.to_text();
    let back: TriangleMesh = text.parse().unwrap();
    assert_eq!(back.vertices, mesh.vertices);
    assert_eq!(back.cells, mesh.cells);
    assert_eq!(back.boundary, mesh.boundary);
    assert!(matches!("3 1 0\n0 0\n1 0\n".parse::<TriangleMesh>(), Err(FemError::Parse(_))));
}

#[test]
fn invalid_meshes_are_rejected() {
    let collinear = TriangleMesh::new(vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]], vec![[0, 1, 2]], vec![]);
    assert!(matches!(collinear, Err(FemError::DegenerateCell { .. })));
    let untagged = TriangleMesh::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]], vec![]);
    assert!(matches!(untagged, Err(FemError::Nonconforming(_))));
    let mesh = Arc::new(reference_mesh(MeshDomain::Hemiequilateral, 1).unwrap());
    let partial = BcAssignment::new([(1, Letter::Neumann), (2, Letter::Neumann)]);
    assert!(matches!(assemble(mesh, &partial), Err(FemError::UnassignedSide(3))));
}

#[test]
fn assembled_matrices_are_symmetric_and_neumann_rows_sum_to_zero() {
    let mesh = Arc::new(reference_mesh(MeshDomain::Rhombus, 3).unwrap());
    let sys = assemble(mesh.clone(), &BcAssignment::uniform(4, Letter::Neumann)).unwrap();
    assert!(sys.stiffness.asymmetry() < 1e-14);
    assert!(sys.mass.asymmetry() < 1e-14);
    let ones = vec![1.0; sys.dofs()];
    let a1 = sys.stiffness.apply(&ones);
    assert!(a1.iter().all(|v| v.abs() < 1e-12));
    let total: f64 = sys.mass.apply(&ones).iter().sum();
    assert!((total - mesh.area()).abs() < 1e-12);
    let dir = assemble(mesh.clone(), &BcAssignment::uniform(4, Letter::Dirichlet)).unwrap();
    let boundary_vertices: std::collections::BTreeSet<usize> = mesh.boundary.iter().flat_map(|e| [e.a, e.b]).collect();
    assert_eq!(dir.dofs(), mesh.vertices.len() - boundary_vertices.len());
}

#[test]
fn square_dirichlet_ground_state() {
    let pair = solve_level_pair(MeshDomain::UnitSquare, &BcAssignment::uniform(4, Letter::Dirichlet), 6, 3, &opts()).unwrap();
    let exact = 2.0 * PI * PI;
    assert!(pair.fine.eigenvalues[0] > exact && pair.coarse.eigenvalues[0] > pair.fine.eigenvalues[0]);
    assert!(pair.monotone());
    assert!((pair.extrapolated.values[0] - exact).abs() / exact < 1e-4);
    assert!((pair.extrapolated.values[1] - 5.0 * PI * PI).abs() / (5.0 * PI * PI) < 1e-3);
}

#[test]
fn neumann_ground_state_is_constant() {
    let pair = solve_level_pair(MeshDomain::Rhombus, &BcAssignment::uniform(4, Letter::Neumann), 4, 3, &opts()).unwrap();
    assert!(pair.extrapolated.values[0].abs() < 1e-10);
    let v = &pair.fine.eigenvectors[0];
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    assert!(hi - lo < 1e-8 * hi.abs());
    assert!(hi > 0.0);
}

#[test]
fn eigenvectors_are_mass_orthonormal_with_small_residuals() {
    let mesh = Arc::new(reference_mesh(MeshDomain::Hemiequilateral, 5).unwrap());
    let sys = assemble(mesh, &BcAssignment::for_problem(&th("nnd"))).unwrap();
    let res = solve_lowest(&sys, 5).unwrap();
    let vs: Vec<Vec<f64>> = res.eigenvectors.iter().map(|v| sys.restrict(v)).collect();
    for i in 0..5 {
        let bi = sys.mass.apply(&vs[i]);
        for j in 0..5 {
            let g: f64 = bi.iter().zip(&vs[j]).map(|(a, b)| a * b).sum();
            assert!((g - if i == j { 1.0 } else { 0.0 }).abs() < 1e-8, "({i},{j}) {g}");
        }
        assert!(res.residuals[i] < 1e-8);
    }
    assert!(res.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    let csv = res.to_csv();
    assert!(csv.starts_with("index,level,eigenvalue,residual\n"));
    assert_eq!(csv.lines().count(), 6);
}

#[test]
fn too_many_eigenpairs() {
    let mesh = Arc::new(reference_mesh(MeshDomain::Hemiequilateral, 1).unwrap());
    let sys = assemble(mesh, &BcAssignment::for_problem(&th("nnn"))).unwrap();
    assert!(matches!(solve_lowest(&sys, 50), Err(FemError::TooManyEigenpairs { .. })));
}

#[test]
fn hemiequilateral_columns_match_published_values_at_level_7() {
    let published = [("nnd", [7.16, 37.49, 90.06, 120.87]), ("ndd", [47.63, 110.36, 189.52, 224.68])];
    for (letters, want) in published {
        let (col, pair) = mixed_column(th(letters), 7, 4, &opts()).unwrap();
        assert!(pair.monotone());
        for (v, w) in col.values.iter().zip(want) {
            assert!((v - w).abs() / w < 0.01, "{letters}: {v} vs {w}");
            // Two published decimals are met, not just 1%.
            assert!((v - w).abs() < 0.02, "{letters}: {v} vs {w}");
        }
    }
}

#[test]
fn analytic_columns_within_half_percent() {
    for letters in ["ndn", "nnn", "dnd", "ddd"] {
        let problem = th(letters);
        let exact = enumerate_mixed_spectrum(problem, 400.0).unwrap().values();
        let (col, _) = mixed_column(problem, 7, 4, &opts()).unwrap();
        for (v, e) in col.values.iter().zip(&exact) {
            if *e == 0.0 {
                assert!(v.abs() < 1e-9);
            } else {
                assert!((v - e).abs() / e < 0.005, "{letters}: {v} vs {e}");
            }
        }
    }
    // ndn is 16π²/9 · {1, 4, 7, 9}.
    let (col, _) = mixed_column(th("ndn"), 6, 4, &opts()).unwrap();
    for (v, m) in col.values.iter().zip([1.0, 4.0, 7.0, 9.0]) {
        assert!((v / LAMBDA_UNIT - m).abs() < 5e-3 * m);
    }
}

#[test]
fn extrapolation_across_levels_six_and_seven() {
    let pair = solve_level_pair(MeshDomain::Hemiequilateral, &BcAssignment::for_problem(&th("nnd")), 7, 2, &opts()).unwrap();
    let ex = &pair.extrapolated;
    assert_eq!((ex.coarse_level, ex.fine_level), (6, 7));
    assert!((ex.values[1] - 37.49).abs() / 37.49 < 0.01);
    assert!(ex.correlations.iter().all(|&c| c > 0.99));
    for i in 0..2 {
        assert!(ex.errors[i] < (ex.fine[i] - ex.coarse[i]).abs());
    }
    assert!(ex.to_csv().lines().count() == 3);
}

#[test]
fn broken_pairing_is_reported() {
    let bc = BcAssignment::uniform(4, Letter::Dirichlet);
    let pair = solve_level_pair(MeshDomain::UnitSquare, &bc, 4, 4, &opts()).unwrap();
    let mut fine = pair.fine.clone();
    fine.eigenvectors.swap(0, 3);
    assert!(matches!(extrapolate(&pair.coarse, &fine), Err(FemError::Pairing { index: 1, .. })));
    assert!(matches!(extrapolate(&pair.fine, &pair.coarse), Err(FemError::Mismatch(_))));
}

#[test]
fn rhombus_spectrum_is_union_of_quarter_columns() {
    let level = 5;
    for (outer, sets) in [(Letter::Neumann, ["nnn", "nnd", "ndn", "ndd"]), (Letter::Dirichlet, ["dnn", "dnd", "ddn", "ddd"])] {
        let columns: Vec<SpectrumColumn> = sets.iter().map(|l| mixed_column(th(l), level, 6, &opts()).unwrap().0).collect();
        let assembled = rhombus_spectrum_assemble(&columns, 150.0).unwrap();
        let direct = solve_level_pair(MeshDomain::Rhombus, &BcAssignment::uniform(4, outer), level, 10, &opts()).unwrap();
        let mut direct_values = direct.extrapolated.values.clone();
        direct_values.sort_by(f64::total_cmp);
        let from_columns = assembled.values();
        let n = from_columns.len().min(8);
        assert!(n >= 6);
        for (a, b) in from_columns[..n].iter().zip(&direct_values) {
            assert!((a - b).abs() <= 1e-3 * b.abs().max(1.0), "{outer:?}: {a} vs {b}");
        }
    }
}

#[test]
fn mixed_inequalities_hold() {
    let all = ["nnn", "nnd", "ndn", "ndd", "dnn", "dnd", "ddn", "ddd"];
    let columns: Vec<SpectrumColumn> = all.iter().map(|l| mixed_column(th(l), 6, 4, &opts()).unwrap().0).collect();
    let verdict = verify_inequalities(&columns, MAX_DEPTH).unwrap();
    assert!(verdict.passed(), "{:?}", verdict.violations());
    assert!(verdict.inconclusive().is_empty(), "{:?}", verdict.inconclusive());
    // 4 chains × 4 depths × 2 links + the first-eigenvalue chain.
    assert_eq!(verdict.checks.len(), 32 + 9);
    let first = verdict.checks.iter().find(|c| c.describe() == "mu_1(nnd) < mu_1(ndn)").unwrap();
    assert!((first.lhs_value - 7.16).abs() < 0.01 && (first.rhs_value - LAMBDA_UNIT).abs() < 1e-3);
    assert!(verify_inequalities(&columns[..3], 1).is_err());
    assert!(verify_inequalities(&columns, 0).is_err());
}

#[test]
fn swapped_columns_violate() {
    let mut a = SpectrumColumn::computed(th("nnn"), vec![0.0, 17.55, 52.64, 70.18], vec![1e-6; 4]);
    let mut others: Vec<SpectrumColumn> = ["nnd", "ndn", "ndd", "dnn", "dnd", "ddn", "ddd"]
        .iter()
        .zip([[7.16, 37.49, 90.06, 120.87], [17.55, 70.18, 122.82, 157.91], [47.63, 110.36, 189.52, 224.68], [24.90, 83.83, 140.45, 169.23], [52.64, 122.82, 200.0, 250.0], [71.71, 169.77, 234.06, 292.70], [122.82, 228.10, 300.0, 350.0]])
        .map(|(l, v)| SpectrumColumn::computed(th(l), v.to_vec(), vec![1e-6; 4]))
        .collect();
    let mut columns = vec![a.clone()];
    columns.append(&mut others.clone());
    assert!(verify_inequalities(&columns, 2).unwrap().passed());
    a.values[1] = 200.0;
    others.insert(0, a);
    let verdict = verify_inequalities(&others, 2).unwrap();
    assert!(!verdict.passed());
}

#[test]
fn p1_interpolation_is_exact_for_linear_fields() {
    let mesh = Arc::new(reference_mesh(MeshDomain::Rhombus, 4).unwrap());
    let locator = Arc::new(PointLocator::new(mesh.clone()));
    let lin = |p: [f64; 2]| 2.0 * p[0] - 3.0 * p[1] + 0.5;
    let field = P1Field::new(locator.clone(), mesh.vertices.iter().map(|&p| lin(p)).collect());
    for p in sample_rhombus(500, 7) {
        assert!((field.eval(p).unwrap() - lin(p)).abs() < 1e-12);
    }
    assert!(field.eval([1.0, 0.0]).is_some());
    assert!(field.eval([-0.1, 0.5]).is_none());
    assert!(field.eval([0.2, 0.8]).is_none());
}

#[test]
fn p1_interpolation_error_is_second_order() {
    let quad = |p: [f64; 2]| p[0] * p[0] + p[0] * p[1];
    let err = |level| {
        let mesh = Arc::new(reference_mesh(MeshDomain::Rhombus, level).unwrap());
        let field = P1Field::new(Arc::new(PointLocator::new(mesh.clone())), mesh.vertices.iter().map(|&p| quad(p)).collect());
        sample_rhombus(400, 3).iter().map(|&p| (field.eval(p).unwrap() - quad(p)).abs()).fold(0.0, f64::max)
    };
    let (e3, e4) = (err(3), err(4));
    assert!(e3 / e4 > 3.0, "{e3} {e4}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn prolongation_preserves_affine_functions(a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0) {
        let coarse = reference_mesh(MeshDomain::Equilateral, 2).unwrap();
        let fine = coarse.refine();
        let f = |p: [f64; 2]| a * p[0] + b * p[1] + c;
        let up = fine.prolong(&coarse.vertices.iter().map(|&p| f(p)).collect::<Vec<_>>()).unwrap();
        for (v, p) in up.iter().zip(&fine.vertices) {
            prop_assert!((v - f(*p)).abs() < 1e-12);
        }
    }
}
