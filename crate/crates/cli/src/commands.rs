use std::f64::consts::PI;
use std::sync::Arc;

use anyhow::{bail, Result};
use courant_core::fem::{mixed_column, verify_inequalities, InequalityStatus, SolveOptions, MAX_DEPTH};
use courant_core::gelfand::{
    collinearity_check, hermite_closed_form_check, scan_zeros, sign_change_structure, simplex_nonvanishing_check,
    slater_minors, CollinearityOutcome, SlaterBasis, NONVANISHING_TOL,
};
use courant_core::geometry::Polygon;
use courant_core::nodal::{
    coefficient_sweep, counterexample_rhombus_neumann, ecp_check, kappa, lin_space, product_lift, sphere_bounds,
    AnalyticCounterexample, EcpReport, EcpVerdict, LiftOutcome, NodalPartition, RhombusEigenbasis, SampledField,
    SweepResult,
};
use courant_core::sl1d::{
    solve_sl, sturm_bounds_check, Boundary, CoefficientTriple, CombinationSpec, Geometry1d, Polynomial, SlProblem,
};
use courant_core::triangle::{
    analytic_table, enumerate_mixed_spectrum, rhombus_spectrum_assemble, AnalyticTable, Letter, MixedProblemId,
    SpectrumColumn, SymmetryClass, DEFAULT_CUTOFF, LAMBDA_UNIT,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::{Command, ConfigError, RunConfig};
use crate::report::{Verdict, VerdictEntry};
use crate::svg::emit_svg;

/// Letter sets of the eight hemiequilateral problems, Neumann outer side first.
pub const PROBLEMS: [&str; 8] = ["nnn", "nnd", "ndn", "ndd", "dnn", "dnd", "ddn", "ddd"];

/// Eigenvalues per hemiequilateral column.
const COLUMN_DEPTH: usize = 4;
/// Eigenpairs per rhombus eigenbasis.
const BASIS_SIZE: usize = 8;
/// Sturm-Liouville discretization.
const SL_GRID: usize = 1024;
const SL_MODES: usize = 8;

const PUBLISHED: [(&str, [f64; 4]); 2] =
    [("nnd", [7.16, 37.49, 90.06, 120.87]), ("ndd", [47.63, 110.36, 189.52, 224.68])];
const PUBLISHED_REL_TOL: f64 = 0.01;
const ANALYTIC_REL_TOL: f64 = 0.005;
const SEGMENT_TOL: f64 = 1e-9;
const CONTROL_MAX: usize = 4;

pub struct Artifact {
    pub name: String,
    pub contents: String,
}

pub struct Outcome {
    command: Command,
    pub verdicts: Vec<VerdictEntry>,
    pub artifacts: Vec<Artifact>,
}

impl Outcome {
    fn new(command: Command) -> Self {
        Self { command, verdicts: Vec::new(), artifacts: Vec::new() }
    }

    /// A single failed verdict carrying the error chain.
    pub fn failure(command: Command, error: &anyhow::Error) -> Self {
        let mut out = Self::new(command);
        out.push("run", Verdict::Fail, json!({ "error": format!("{error:#}") }));
        out
    }

    fn push(&mut self, check: impl Into<String>, verdict: Verdict, details: Value) {
        self.verdicts.push(VerdictEntry { command: self.command.name().into(), check: check.into(), verdict, details });
    }

    fn artifact(&mut self, name: impl Into<String>, contents: String) {
        self.artifacts.push(Artifact { name: name.into(), contents });
    }
}

/// Results shared between commands of one run.
pub struct Context<'a> {
    config: &'a RunConfig,
    columns: Option<Vec<SpectrumColumn>>,
    neumann: Option<Arc<RhombusEigenbasis>>,
    dirichlet: Option<Arc<RhombusEigenbasis>>,
    counterexample: Option<Arc<AnalyticCounterexample>>,
}

impl<'a> Context<'a> {
    pub fn new(config: &'a RunConfig) -> Self {
        Self { config, columns: None, neumann: None, dirichlet: None, counterexample: None }
    }

    fn columns(&mut self) -> Result<Vec<SpectrumColumn>> {
        if self.columns.is_none() {
            let opts = SolveOptions::default();
            let mut cols = Vec::with_capacity(PROBLEMS.len());
            for letters in PROBLEMS {
                cols.push(mixed_column(th(letters), self.config.mesh_level, COLUMN_DEPTH, &opts)?.0);
            }
            self.columns = Some(cols);
        }
        Ok(self.columns.clone().unwrap_or_default())
    }

    fn basis(&mut self, letter: Letter) -> Result<Arc<RhombusEigenbasis>> {
        let level = self.config.sweep_level;
        let slot = match letter {
            Letter::Neumann => &mut self.neumann,
            Letter::Dirichlet => &mut self.dirichlet,
        };
        if let Some(b) = slot {
            return Ok(b.clone());
        }
        let b = Arc::new(RhombusEigenbasis::compute(letter, level, BASIS_SIZE, &SolveOptions::default())?);
        *slot = Some(b.clone());
        Ok(b)
    }

    fn counterexample(&mut self) -> Result<Arc<AnalyticCounterexample>> {
        if let Some(c) = &self.counterexample {
            return Ok(c.clone());
        }
        let spectrum = self.basis(Letter::Neumann)?.spectrum();
        let c = Arc::new(counterexample_rhombus_neumann(self.config.grid, &spectrum)?);
        self.counterexample = Some(c.clone());
        Ok(c)
    }
}

pub fn run(command: Command, ctx: &mut Context) -> Result<Outcome> {
    match command {
        Command::Sl1dVerify => sl1d_verify(ctx.config),
        Command::GelfandVerify => gelfand_verify(ctx.config),
        Command::TriangleTables => triangle_tables(),
        Command::FemTables => fem_tables(ctx),
        Command::Inequalities => inequalities(ctx),
        Command::RhombusNeumannCounterexample => neumann_counterexample(ctx),
        Command::RhombusNeumannSweep => neumann_sweep(ctx),
        Command::RhombusDirichletSweep => dirichlet_sweep(ctx),
        Command::ProductLift => product_lift_command(ctx),
        Command::SphereBounds => sphere_bounds_command(ctx.config),
        Command::ReproduceAll => bail!("reproduce-all is expanded by the runner"),
    }
}

fn th(letters: &str) -> MixedProblemId {
    MixedProblemId::th(letters).expect("fixed letter sets are valid")
}

fn slug(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '-' }).collect()
}

/// `sine`, `mathieu:A` (`Q = A cos x`) or `custom:K;Q;G` with polynomial coefficients.
pub fn parse_potential(preset: &str) -> Result<CoefficientTriple, ConfigError> {
    let bad = || ConfigError::Preset(preset.to_string());
    if preset == "sine" {
        return Ok(CoefficientTriple::sine());
    }
    if let Some(a) = preset.strip_prefix("mathieu:") {
        return a.trim().parse::<f64>().ok().filter(|a| a.is_finite()).map(CoefficientTriple::mathieu).ok_or_else(bad);
    }
    if let Some(rest) = preset.strip_prefix("custom:") {
        let parts: Vec<&str> = rest.split(';').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let mut polys = Vec::new();
        for p in parts {
            polys.push(p.parse::<Polynomial>().map_err(|_| bad())?.into_evaluator());
        }
        let (k, q, g) = (polys[0].clone(), polys[1].clone(), polys[2].clone());
        return Ok(CoefficientTriple::new(move |x| k(x), move |x| q(x), move |x| g(x)));
    }
    Err(bad())
}

fn sl1d_verify(cfg: &RunConfig) -> Result<Outcome> {
    let mut out = Outcome::new(Command::Sl1dVerify);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for preset in &cfg.potentials {
        let coefficients = parse_potential(preset)?;
        for boundary in [Boundary::Dirichlet, Boundary::Neumann, Boundary::Periodic] {
            let problem = match boundary {
                Boundary::Periodic => SlProblem::circle(coefficients.clone())?,
                b => SlProblem::new(Geometry1d::Interval { start: 0.0, end: PI }, coefficients.clone(), b)?,
            };
            let spectrum = solve_sl(&problem, SL_GRID, SL_MODES)?;
            let mut failures = 0usize;
            let mut witness = Value::Null;
            for _ in 0..cfg.samples {
                let combo = loop {
                    let m = rng.random_range(1..=SL_MODES);
                    let n = rng.random_range(m..=SL_MODES);
                    let a: Vec<f64> = (m..=n).map(|_| rng.random_range(-1.0..1.0)).collect();
                    if let Ok(c) = CombinationSpec::new(m, a) {
                        break c;
                    }
                };
                let v = sturm_bounds_check(&spectrum, &combo)?;
                if !v.passed() {
                    failures += 1;
                    if witness.is_null() {
                        witness = json!({
                            "m": combo.m(),
                            "coefficients": combo.coefficients(),
                            "zeros": v.zeros,
                            "zero_bound": v.zero_bound,
                            "sign_changes": v.sign_changes,
                            "sign_change_bound": v.sign_change_bound,
                        });
                    }
                }
            }
            let boundary_name = format!("{boundary:?}").to_lowercase();
            out.push(
                format!("sturm bounds {preset} {boundary_name}"),
                Verdict::from_bool(failures == 0),
                json!({
                    "potential": preset,
                    "boundary": boundary_name,
                    "samples": cfg.samples,
                    "failures": failures,
                    "eigenvalues": spectrum.eigenvalues(),
                    "witness": witness,
                }),
            );
            out.artifact(format!("sl1d-{}-{boundary_name}.csv", slug(preset)), spectrum.to_csv()?);
        }
    }
    Ok(out)
}

fn sorted_uniform(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(lo..hi)).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Sorted points in `[lo, hi]` at mutual distance at least `gap`.
fn separated_points(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64, gap: f64) -> Vec<f64> {
    loop {
        let c = sorted_uniform(rng, n, lo, hi);
        if c.windows(2).all(|w| w[1] - w[0] >= gap) {
            return c;
        }
    }
}

fn bases(n: usize) -> Result<[SlaterBasis; 2]> {
    Ok([SlaterBasis::sine(n)?, SlaterBasis::hermite(n)?])
}

fn gelfand_verify(cfg: &RunConfig) -> Result<Outcome> {
    let mut out = Outcome::new(Command::GelfandVerify);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let entry = |out: &mut Outcome, check: &str, n: usize, basis: &str, pass: bool, extra: Value| {
        let mut details = json!({ "check": check, "n": n, "basis": basis, "pass": pass });
        if let (Value::Object(d), Value::Object(e)) = (&mut details, extra) {
            d.extend(e);
        }
        out.push(format!("{check} n={n} {basis}"), Verdict::from_bool(pass), details);
    };

    for n in 2..=4 {
        for basis in bases(n)? {
            let v = simplex_nonvanishing_check(&basis, 10_000, NONVANISHING_TOL)?;
            let witness = v.witness.as_ref().map(|(a, b)| json!([a, b]));
            let mut extra = json!({ "samples": v.samples, "sign": v.sign, "min_ratio": v.min_ratio });
            if let Some(w) = witness {
                extra["witness"] = w;
            }
            entry(&mut out, "simplex nonvanishing", n, basis.name(), v.pass, extra);
        }
    }

    for n in 2..=4 {
        let basis = SlaterBasis::sine(n)?;
        let (mut pass, mut witness) = (true, Value::Null);
        for _ in 0..50 {
            let c = separated_points(&mut rng, n - 1, 0.02, 0.98, 1e-3);
            let m = slater_minors(&basis, &c)?;
            let zeros = scan_zeros(|x| m.eval(&basis, x), 0.0, 1.0);
            let ok = zeros.len() == n - 1 && zeros.iter().zip(&c).all(|(z, cj)| (z.position - cj).abs() < 1e-9);
            if !ok && pass {
                witness = json!({ "c": c, "zeros": zeros.iter().map(|z| z.position).collect::<Vec<_>>() });
            }
            pass &= ok;
        }
        let mut extra = json!({ "samples": 50 });
        if !witness.is_null() {
            extra["witness"] = witness;
        }
        entry(&mut out, "property P zero count", n, basis.name(), pass, extra);
    }

    for n in 2..=5 {
        for basis in bases(n)? {
            let (lo, hi) = match basis.name() {
                "sine" if n == 5 => continue,
                "sine" => (0.05, 0.95),
                _ => (-2.0, 2.0),
            };
            let (mut pass, mut witness) = (true, Value::Null);
            for _ in 0..20 {
                let c = separated_points(&mut rng, n - 1, lo, hi, 1e-3);
                let v = sign_change_structure(&basis, &c)?;
                if !v.pass && pass {
                    witness = json!({ "c": c, "slab_signs": v.slab_signs });
                }
                pass &= v.pass;
            }
            let mut extra = json!({ "samples": 20 });
            if !witness.is_null() {
                extra["witness"] = witness;
            }
            entry(&mut out, "slab sign alternation", n, basis.name(), pass, extra);
        }
    }

    for n in 2..=4 {
        for basis in bases(n)? {
            let (mut pass, mut witness, mut worst) = (true, Value::Null, 0.0f64);
            for _ in 0..100 {
                let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                let v = collinearity_check(&basis, &b)?;
                if let CollinearityOutcome::Collinear { sin_angle, .. } = &v.outcome {
                    worst = worst.max(*sin_angle);
                }
                if !v.pass && pass {
                    witness = json!({ "b": b, "zeros": v.zeros.len() });
                }
                pass &= v.pass;
            }
            let mut extra = json!({ "samples": 100, "max_sin_angle": worst });
            if !witness.is_null() {
                extra["witness"] = witness;
            }
            entry(&mut out, "collinearity", n, basis.name(), pass, extra);
        }
    }

    for n in 2..=5 {
        let v = hermite_closed_form_check(n, cfg.seed)?;
        let extra = json!({ "constant": v.constant, "max_relative_deviation": v.max_relative_deviation });
        entry(&mut out, "hermite closed form", n, "hermite", v.pass, extra);
    }
    Ok(out)
}

struct ExpectedTable {
    first: &'static str,
    second: &'static str,
    multiples: [u64; 6],
    pairs: [&'static str; 6],
    second_indices: [Option<usize>; 6],
}

const TABLES: [ExpectedTable; 2] = [
    ExpectedTable {
        first: "nnn",
        second: "ndn",
        multiples: [0, 1, 3, 4, 7, 9],
        pairs: ["(0,0)", "(0,1) (1,0)", "(1,1)", "(0,2) (2,0)", "(1,2) (2,1)", "(0,3) (3,0)"],
        second_indices: [None, Some(1), None, Some(2), Some(3), Some(4)],
    },
    ExpectedTable {
        first: "dnd",
        second: "ddd",
        multiples: [3, 7, 12, 13, 19, 21],
        pairs: ["(1,1)", "(1,2) (2,1)", "(2,2)", "(1,3) (3,1)", "(2,3) (3,2)", "(1,4) (4,1)"],
        second_indices: [None, Some(1), None, Some(2), Some(3), Some(4)],
    },
];

fn table_rows(t: &AnalyticTable) -> Vec<Value> {
    t.rows
        .iter()
        .map(|r| {
            json!({
                "multiple": r.multiple,
                "value": r.value,
                "pairs": r.pairs.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" "),
                "indices": r.indices,
            })
        })
        .collect()
}

fn triangle_tables() -> Result<Outcome> {
    let mut out = Outcome::new(Command::TriangleTables);
    for want in &TABLES {
        let t = analytic_table(th(want.first), th(want.second), 6)?;
        let multiples: Vec<u64> = t.rows.iter().map(|r| r.multiple).collect();
        let exact_values = t.rows.iter().all(|r| r.value == LAMBDA_UNIT * r.multiple as f64);
        let pairs_ok = t
            .rows
            .iter()
            .zip(want.pairs)
            .all(|(r, p)| r.pairs.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(" ") == p);
        let first_ok = t.rows.iter().enumerate().all(|(i, r)| r.indices[0] == Some(i + 1));
        let second_ok = t.rows.iter().map(|r| r.indices[1]).eq(want.second_indices);
        let pass = multiples == want.multiples && exact_values && pairs_ok && first_ok && second_ok;
        out.push(
            format!("table {}/{}", want.first, want.second),
            Verdict::from_bool(pass),
            json!({
                "columns": [t.columns[0].to_string(), t.columns[1].to_string()],
                "unit": LAMBDA_UNIT,
                "multiples": multiples,
                "rows": table_rows(&t),
            }),
        );
        out.artifact(format!("table-{}-{}.csv", want.first, want.second), t.to_csv());
    }
    Ok(out)
}

fn column<'c>(cols: &'c [SpectrumColumn], letters: &str) -> &'c SpectrumColumn {
    let id = th(letters);
    cols.iter().find(|c| c.problem == id).expect("all eight columns are computed")
}

fn columns_csv(cols: &[SpectrumColumn]) -> String {
    let mut out = String::from("problem,index,value,error\n");
    for c in cols {
        for (i, (v, e)) in c.values.iter().zip(&c.errors).enumerate() {
            out.push_str(&format!("{},{},{v:.10},{e:.3e}\n", c.problem, i + 1));
        }
    }
    out
}

fn strictly_increasing(v: &[f64], tol: f64) -> bool {
    v.windows(2).all(|w| w[1] - w[0] > tol * w[1].abs().max(1.0))
}

fn fem_tables(ctx: &mut Context) -> Result<Outcome> {
    let cfg = ctx.config;
    let tol = cfg.tol;
    let cols = ctx.columns()?;
    let mut out = Outcome::new(Command::FemTables);
    let level = json!(cfg.mesh_level);

    let mut rows = Vec::new();
    let mut pass = true;
    for (letters, want) in PUBLISHED {
        let c = column(&cols, letters);
        for (i, (&v, w)) in c.values.iter().zip(want).enumerate() {
            let rel = (v - w).abs() / w;
            pass &= rel < PUBLISHED_REL_TOL;
            rows.push(json!({ "problem": letters, "index": i + 1, "computed": v, "error": c.errors[i], "published": w, "relative": rel }));
        }
    }
    out.push("published values", Verdict::from_bool(pass), json!({ "mesh_level": level, "tolerance": PUBLISHED_REL_TOL, "rows": rows }));

    let mut rows = Vec::new();
    let mut pass = true;
    for letters in ["nnn", "ndn", "dnd", "ddd"] {
        let exact = enumerate_mixed_spectrum(th(letters), DEFAULT_CUTOFF)?.values();
        let c = column(&cols, letters);
        for (i, (&v, &e)) in c.values.iter().zip(&exact).enumerate() {
            let ok = if e == 0.0 { v.abs() < 1e-9 } else { (v - e).abs() / e < ANALYTIC_REL_TOL };
            pass &= ok;
            rows.push(json!({ "problem": letters, "index": i + 1, "computed": v, "exact": e }));
        }
    }
    out.push("analytic columns", Verdict::from_bool(pass), json!({ "mesh_level": level, "tolerance": ANALYTIC_REL_TOL, "rows": rows }));

    let pick = |sets: [&str; 4]| -> Vec<SpectrumColumn> { sets.iter().map(|l| column(&cols, l).clone()).collect() };
    let nu = rhombus_spectrum_assemble(&pick(["nnn", "nnd", "ndn", "ndd"]), 40.0)?;
    let v = nu.values();
    let pass = v.len() >= 5
        && v[0].abs() < 1e-8
        && strictly_increasing(&v[..3], tol)
        && (v[2] - v[3]).abs() <= tol * v[3]
        && strictly_increasing(&v[3..5], tol)
        && nu.entries[2].kappa == 3
        && nu.entries[3].kappa == 3;
    out.push(
        "neumann rhombus ordering",
        Verdict::from_bool(pass),
        json!({
            "values": v,
            "kappa": nu.entries.iter().map(|e| e.kappa).collect::<Vec<_>>(),
            "classes": nu.entries.iter().map(|e| e.class.to_string()).collect::<Vec<_>>(),
            "nu3_nu4_relative_gap": v.get(3).map(|v3| (v[2] - v3).abs() / v3),
            "tolerance": tol,
        }),
    );
    out.artifact("rhombus-neumann-spectrum.csv", nu.to_csv());

    let delta = rhombus_spectrum_assemble(&pick(["dnn", "dnd", "ddn", "ddd"]), 130.0)?;
    let v = delta.values();
    let pass = v.len() >= 6 && strictly_increasing(&v[..5], tol) && {
        let (a, b) = (&delta.entries[4], &delta.entries[5]);
        (a.value - b.value).abs() <= (a.error + b.error).max(tol * b.value) && a.kappa == 5 && b.kappa == 5
    };
    out.push(
        "dirichlet rhombus degeneracy",
        Verdict::from_bool(pass),
        json!({
            "values": v,
            "errors": delta.entries.iter().map(|e| e.error).collect::<Vec<_>>(),
            "kappa": delta.entries.iter().map(|e| e.kappa).collect::<Vec<_>>(),
            "classes": delta.entries.iter().map(|e| e.class.to_string()).collect::<Vec<_>>(),
            "tolerance": tol,
        }),
    );
    out.artifact("rhombus-dirichlet-spectrum.csv", delta.to_csv());
    out.artifact("fem-columns.csv", columns_csv(&cols));
    Ok(out)
}

fn inequalities(ctx: &mut Context) -> Result<Outcome> {
    let cols = ctx.columns()?;
    let verdict = verify_inequalities(&cols, MAX_DEPTH)?;
    let mut out = Outcome::new(Command::Inequalities);
    let mut families: Vec<&str> = verdict.checks.iter().map(|c| c.family).collect();
    families.dedup();
    for family in families {
        let checks: Vec<_> = verdict.checks.iter().filter(|c| c.family == family).collect();
        let violated: Vec<String> =
            checks.iter().filter(|c| c.status == InequalityStatus::Violated).map(|c| c.describe()).collect();
        let inconclusive: Vec<String> =
            checks.iter().filter(|c| c.status == InequalityStatus::Inconclusive).map(|c| c.describe()).collect();
        let min_ratio = checks
            .iter()
            .filter(|c| c.error > 0.0)
            .map(|c| c.margin / c.error)
            .fold(f64::INFINITY, f64::min);
        out.push(
            family,
            Verdict::from_bool(violated.is_empty()),
            json!({
                "checks": checks.len(),
                "violated": violated,
                "inconclusive": inconclusive,
                "min_margin_over_error": if min_ratio.is_finite() { json!(min_ratio) } else { Value::Null },
            }),
        );
    }
    out.push(
        "all chains",
        Verdict::from_bool(verdict.passed()),
        json!({
            "checks": verdict.checks.len(),
            "violations": verdict.violations().len(),
            "inconclusive": verdict.inconclusive().iter().map(|c| c.describe()).collect::<Vec<_>>(),
        }),
    );
    let mut csv = String::from("family,check,lhs,rhs,margin,error,status\n");
    for c in &verdict.checks {
        csv.push_str(&format!(
            "{},{},{:.10},{:.10},{:.6e},{:.3e},{:?}\n",
            c.family,
            c.describe(),
            c.lhs_value,
            c.rhs_value,
            c.margin,
            c.error,
            c.status
        ));
    }
    out.artifact("inequalities.csv", csv);
    Ok(out)
}

fn report_json(r: &EcpReport, partition: Option<&NodalPartition>) -> Value {
    json!({
        "description": r.description,
        "beta0": r.beta0,
        "kappa": r.kappa.map(|k| k.kappa),
        "largest_eigenvalue": r.largest_eigenvalue,
        "refined_beta0": partition.and_then(|p| p.refined_beta0),
        "uncertain_fraction": r.uncertain_fraction,
        "verdict": r.verdict.to_string(),
        "note": r.note,
    })
}

/// `violation_confirmed` for a resolved violation, `inconclusive` when the count was not
/// trustworthy, `fail` otherwise.
fn violation_verdict(r: &EcpReport, extra_ok: bool) -> Verdict {
    match r.verdict {
        EcpVerdict::Violation if extra_ok => Verdict::ViolationConfirmed,
        EcpVerdict::Inconclusive => Verdict::Inconclusive,
        _ => Verdict::Fail,
    }
}

fn neumann_counterexample(ctx: &mut Context) -> Result<Outcome> {
    let grid = ctx.config.grid;
    let c = ctx.counterexample()?;
    let mut out = Outcome::new(Command::RhombusNeumannCounterexample);
    let r = &c.report;
    let counts_ok = r.beta0 == Some(4) && r.kappa.map(|k| k.kappa) == Some(3) && c.probe_consistent;
    let mut details = report_json(r, c.partition.as_ref());
    details["grid"] = json!(grid);
    details["probe_count"] = json!(c.probe_count);
    details["probe_min"] = json!(c.probe_min);
    details["probe_consistent"] = json!(c.probe_consistent);
    out.push("1 + phi2 exceeds its Courant index", violation_verdict(r, counts_ok), details);
    let segments_ok = c.segment_residuals.iter().all(|&s| s < SEGMENT_TOL);
    out.push(
        "nodal segments",
        Verdict::from_bool(segments_ok),
        json!({
            "segments": ["x = 3/4", "x + sqrt(3) y = 3/2"],
            "residuals": c.segment_residuals,
            "samples": c.segment_samples,
            "tolerance": SEGMENT_TOL,
        }),
    );
    if let Some(p) = &c.partition {
        out.artifact("neumann-counterexample.svg", emit_svg(p, &Polygon::rhombus()));
    }
    Ok(out)
}

struct SweepRun {
    result: SweepResult,
    grid: usize,
    best: Option<(usize, f64)>,
    report: Option<EcpReport>,
    partition: Option<NodalPartition>,
}

/// Sweeps `u + t v`; if `target` is not reached, repeats once at half the pitch.
fn run_sweep(
    basis: &RhombusEigenbasis,
    (u, v): (&[f64], &[f64]),
    participating: &[f64],
    ts: &[f64],
    grid: usize,
    target: Option<usize>,
    label: &str,
) -> Result<SweepRun> {
    let spectrum = basis.spectrum();
    let mut grid = grid;
    let mut retried = false;
    loop {
        let fu = basis.field(u.to_vec(), grid)?;
        let fv = basis.field(v.to_vec(), grid)?;
        let result = coefficient_sweep(&fu, &fv, ts)?;
        let best = result.max_beta0();
        let reached = target.is_none_or(|t| best.is_some_and(|(b, _)| b >= t));
        if !reached && !retried {
            retried = true;
            grid = 2 * grid - 1;
            continue;
        }
        let (report, partition) = match best {
            Some((_, t)) => {
                let combo = SampledField::combine(&[(1.0, &fu), (t, &fv)])?;
                let (r, p) = ecp_check(label, &combo, participating, &spectrum);
                (Some(r), p)
            }
            None => (None, None),
        };
        return Ok(SweepRun { result, grid, best, report, partition });
    }
}

fn sweep_json(run: &SweepRun, ts: &[f64]) -> Value {
    json!({
        "grid": run.grid,
        "t_range": [ts.first(), ts.last()],
        "t_count": ts.len(),
        "best_beta0": run.best.map(|b| b.0),
        "best_t": run.best.map(|b| b.1),
        "unresolved": run.result.unresolved(),
        "changes": run.result.changes().iter().map(|c| json!([c.t_low, c.t_high, c.from, c.to])).collect::<Vec<_>>(),
        "best_member": run.report.as_ref().map(|r| report_json(r, run.partition.as_ref())),
    })
}

fn sweep_verdict(run: &SweepRun, want: usize, kappa_want: usize) -> Verdict {
    match &run.report {
        Some(r) => {
            let stable = run.partition.as_ref().is_some_and(|p| p.refined_beta0 == Some(p.beta0));
            let ok = r.beta0 == Some(want) && r.kappa.map(|k| k.kappa) == Some(kappa_want) && stable;
            violation_verdict(r, ok)
        }
        None => Verdict::Inconclusive,
    }
}

fn neumann_sweep(ctx: &mut Context) -> Result<Outcome> {
    let cfg = ctx.config;
    let basis = ctx.basis(Letter::Neumann)?;
    let spectrum = basis.spectrum();
    let ts = lin_space(-1.0, 1.0, cfg.sweep_points);
    let (u, v) = (basis.vector(2)?, basis.vector(5)?);
    let run = run_sweep(&basis, (&u, &v), &[spectrum[1], spectrum[4]], &ts, cfg.grid, Some(6), "nu_2 + t nu_5")?;
    let mut out = Outcome::new(Command::RhombusNeumannSweep);
    let mut details = sweep_json(&run, &ts);
    details["kappa_nu5"] = json!(kappa(&spectrum, spectrum[4], cfg.tol)?.kappa);
    details["spectrum"] = json!(spectrum);
    out.push("nu_2 + t nu_5 reaches six domains", sweep_verdict(&run, 6, 5), details);
    out.artifact("neumann-sweep.csv", run.result.to_csv());
    if let Some(p) = &run.partition {
        out.artifact("neumann-sweep-best.svg", emit_svg(p, &Polygon::rhombus()));
    }
    Ok(out)
}

fn dirichlet_sweep(ctx: &mut Context) -> Result<Outcome> {
    let cfg = ctx.config;
    let basis = ctx.basis(Letter::Dirichlet)?;
    let spectrum = basis.spectrum();
    let mut out = Outcome::new(Command::RhombusDirichletSweep);

    let class = SymmetryClass::ALL[1];
    let found = basis.class_of(2)?;
    let cluster = basis.cluster(5)?.len();
    let ts = lin_space(-1.5, 1.5, cfg.sweep_points);
    let (u, v) = (basis.class_vector(2, class)?, basis.class_vector(5, class)?);
    let run = run_sweep(&basis, (&u, &v), &[spectrum[1], spectrum[4]], &ts, cfg.grid, Some(6), "delta_2 + t delta_5")?;
    let mut details = sweep_json(&run, &ts);
    details["symmetry_class"] = json!(class.to_string());
    details["delta2_class"] = json!(found.map(|c| c.to_string()));
    details["delta5_multiplicity"] = json!(cluster);
    details["kappa_delta5"] = json!(kappa(&spectrum, spectrum[4], cfg.tol)?.kappa);
    details["spectrum"] = json!(spectrum);
    let verdict = if found == Some(class) { sweep_verdict(&run, 6, 5) } else { Verdict::Fail };
    out.push("delta_2 + t delta_5 reaches six domains", verdict, details);
    out.artifact("dirichlet-sweep.csv", run.result.to_csv());
    if let Some(p) = &run.partition {
        out.artifact("dirichlet-sweep-best.svg", emit_svg(p, &Polygon::rhombus()));
    }

    let ts = lin_space(-5.0, 5.0, cfg.sweep_points);
    let (u, v) = (basis.vector(1)?, basis.vector(4)?);
    let control = run_sweep(&basis, (&u, &v), &[spectrum[0], spectrum[3]], &ts, cfg.grid, None, "delta_1 + t delta_4")?;
    let max = control.best.map(|b| b.0);
    out.push(
        "delta_1 + t delta_4 stays within four domains",
        Verdict::from_bool(max.is_some_and(|m| m <= CONTROL_MAX)),
        sweep_json(&control, &ts),
    );
    out.artifact("dirichlet-control-sweep.csv", control.result.to_csv());
    Ok(out)
}

fn product_lift_command(ctx: &mut Context) -> Result<Outcome> {
    let eps = ctx.config.epsilon;
    let spectrum = ctx.basis(Letter::Neumann)?.spectrum();
    let c = ctx.counterexample()?;
    let circle = solve_sl(&SlProblem::circle(CoefficientTriple::sine())?, 512, 7)?;
    let mut fiber = circle.eigenvalues().to_vec();
    if fiber[0].abs() < 1e-9 {
        fiber[0] = 0.0;
    }
    let mut out = Outcome::new(Command::ProductLift);
    let lift = product_lift(&c.report, &spectrum, &fiber, eps)?;
    let (verdict, details) = match &lift.outcome {
        LiftOutcome::Collapsed { report, lifted_kappa } => (
            violation_verdict(report, report.beta0 == Some(4) && lifted_kappa.kappa == 3),
            json!({ "lifted": report_json(report, None), "lifted_kappa": lifted_kappa.kappa }),
        ),
        LiftOutcome::NotCollapsed => (Verdict::Inconclusive, json!({ "note": "epsilon is not below the threshold" })),
    };
    let mut details = details;
    details["epsilon"] = json!(lift.epsilon);
    details["epsilon_star"] = json!(lift.epsilon_star);
    details["fiber"] = json!(fiber);
    details["lifted_spectrum"] = json!(lift.lifted_spectrum);
    out.push("collapsed product keeps the violation", verdict, details);

    let above = product_lift(&c.report, &spectrum, &fiber, 2.0 * lift.epsilon_star)?;
    out.push(
        "no collapse above the threshold",
        Verdict::from_bool(above.outcome == LiftOutcome::NotCollapsed),
        json!({ "epsilon": above.epsilon, "lifted_spectrum": above.lifted_spectrum }),
    );
    Ok(out)
}

/// Pascal's triangle up to row `n`.
fn pascal(n: usize) -> Vec<Vec<u128>> {
    let mut rows: Vec<Vec<u128>> = vec![vec![1]];
    for i in 1..=n {
        let prev = &rows[i - 1];
        let row = (0..=i).map(|j| if j == 0 || j == i { 1 } else { prev[j - 1] + prev[j] }).collect();
        rows.push(row);
    }
    rows
}

fn sphere_bounds_command(cfg: &RunConfig) -> Result<Outcome> {
    let mut out = Outcome::new(Command::SphereBounds);
    let (max_d, max_k) = (6u64, 20u64);
    let table = pascal((max_d + max_k) as usize);
    let choose = |n: i64, r: u64| -> u128 {
        if n < 0 || (n as u64) < r {
            0
        } else {
            table[n as usize][r as usize]
        }
    };

    let mut mismatches = Vec::new();
    for d in 1..=max_d {
        for k in 0..=max_k {
            let direct = choose((d + k) as i64 - 1, d) + choose((d + k) as i64 - 2, d) + 1;
            let b = sphere_bounds(d, k)?;
            if b.courant != direct {
                mismatches.push(json!({ "d": d, "k": k, "computed": b.courant, "direct": direct }));
            }
        }
    }
    out.push(
        "binomial form",
        Verdict::from_bool(mismatches.is_empty()),
        json!({ "d": [1, max_d], "k": [0, max_k], "mismatches": mismatches }),
    );

    let mut rows = Vec::new();
    let (mut courant_ok, mut leydold_ok) = (true, true);
    for k in 0..=max_k {
        let b = sphere_bounds(2, k)?;
        let k = k as u128;
        courant_ok &= b.courant == k * k + 1;
        let leydold = k * k + 2 - k;
        leydold_ok &= b.leydold == Some(leydold) && b.effective == leydold.min(b.courant);
        rows.push(json!({ "k": k, "courant": b.courant, "leydold": b.leydold }));
    }
    out.push("two-sphere courant bound k^2+1", Verdict::from_bool(courant_ok), json!({ "rows": rows }));
    out.push("two-sphere leydold bound k(k-1)+2", Verdict::from_bool(leydold_ok), json!({ "k": [0, max_k] }));

    if let (Some(d), Some(k)) = (cfg.d, cfg.k) {
        let b = sphere_bounds(d, k)?;
        out.push(
            format!("bounds d={d} k={k}"),
            Verdict::Pass,
            json!({
                "d": d,
                "k": k,
                "courant": b.courant,
                "leydold": b.leydold,
                "effective": b.effective,
            }),
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets() {
        assert!(parse_potential("sine").is_ok());
        assert!(parse_potential("mathieu:10").is_ok());
        assert!(parse_potential("custom:1;0;1 + x").is_ok());
        assert!(parse_potential("mathieu:x").is_err());
        assert!(parse_potential("custom:1;0").is_err());
        assert!(parse_potential("bessel").is_err());
    }

    #[test]
    fn pascal_rows() {
        let t = pascal(6);
        assert_eq!(t[6], vec![1, 6, 15, 20, 15, 6, 1]);
    }

    #[test]
    fn slugs_are_file_safe() {
        assert_eq!(slug("mathieu:10"), "mathieu-10");
    }
}
