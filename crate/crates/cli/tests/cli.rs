use std::path::Path;
use std::process::Command;

use clap::Parser;
use courant_cli::config::{Command as Cmd, Format, RunConfig};
use courant_cli::svg::{emit_svg, BAND_FILL, NEGATIVE_FILL, POSITIVE_FILL};
use courant_cli::Cli;
use courant_core::geometry::Polygon;
use courant_core::nodal::{count_nodal_domains, phi2_plus_one, SampledField};
use serde_json::Value;

fn courant(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_courant")).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn only_run_dir(out: &Path) -> std::path::PathBuf {
    let dirs: Vec<_> = std::fs::read_dir(out).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(dirs.len(), 1, "{dirs:?}");
    dirs[0].clone()
}

#[test]
fn constant_field_is_one_filled_rhombus() {
    let f = SampledField::sample("rhombus", &Polygon::rhombus(), 61, |_| 1.0).unwrap();
    let p = count_nodal_domains(&f).unwrap();
    let svg = emit_svg(&p, &Polygon::rhombus());
    assert_eq!(svg.matches("<path").count(), 1);
    assert!(svg.contains(POSITIVE_FILL) && !svg.contains(BAND_FILL));
    assert!(svg.contains(r#"id="outline""#));
    assert_eq!(svg, emit_svg(&p, &Polygon::rhombus()));
}

#[test]
fn phi2_plus_one_has_four_regions_and_a_band() {
    let f = phi2_plus_one();
    let field = SampledField::sample("rhombus", &Polygon::rhombus(), 201, |p| f.eval(p)).unwrap();
    let p = count_nodal_domains(&field).unwrap();
    let svg = emit_svg(&p, &Polygon::rhombus());
    assert_eq!(svg.matches(r#"id="domain-"#).count(), 4);
    assert_eq!(svg.matches(POSITIVE_FILL).count() + svg.matches(NEGATIVE_FILL).count(), 4);
    assert!(svg.contains(r#"id="zero-band""#));
    // The band passes through the centre (3/4, √3/4): its pixel is gray, not a domain.
    let centre = p.label_near([0.75, 3f64.sqrt() / 4.0]);
    assert_eq!(centre, courant_core::nodal::Label::ZeroBand);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    std::fs::write(&path, r#"{ "grid": 301, "seed": 5, "formats": ["json"] }"#).unwrap();
    let cli = Cli::parse_from(["courant", "sl1d-verify", "--config", path.to_str().unwrap(), "--seed", "9"]);
    let c = cli.resolve().unwrap();
    assert_eq!(cli.command, Cmd::Sl1dVerify);
    assert_eq!((c.grid, c.seed, c.formats.clone()), (301, 9, vec![Format::Json]));
    assert_eq!(c.mesh_level, RunConfig::default().mesh_level);

    std::fs::write(&path, r#"{ "grid": 301, "colour": "red" }"#).unwrap();
    let cli = Cli::parse_from(["courant", "sl1d-verify", "--config", path.to_str().unwrap()]);
    assert!(cli.resolve().is_err());
}

#[test]
fn invalid_config_values_are_rejected() {
    let mut c = RunConfig::default();
    assert!(c.validate().is_ok());
    c.tol = 0.0;
    assert!(c.validate().is_err());
    let c = RunConfig { mesh_level: 0, ..RunConfig::default() };
    assert!(c.validate().is_err());
    let c = RunConfig { potentials: vec!["airy".into()], ..RunConfig::default() };
    assert!(c.validate().is_err());
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(courant(&["no-such-command"]).0, 2);
    assert_eq!(courant(&["sphere-bounds", "--tol=-1"]).0, 2);
    assert_eq!(courant(&["sphere-bounds", "--format", "pdf"]).0, 2);
}

#[test]
fn sphere_bounds_report() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout) = courant(&["sphere-bounds", "--d", "2", "--k", "3", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 0, "{stdout}");
    let run = only_run_dir(dir.path());
    assert!(run.file_name().unwrap().to_str().unwrap().starts_with("sphere-bounds-"));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(run.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["schema_version"], "1");
    assert_eq!(report["command"], "sphere-bounds");
    assert_eq!(report["config"]["d"], 2);
    assert!(report["timings"][0]["seconds"].is_number());
    let requested = report["verdicts"].as_array().unwrap().iter().find(|v| v["check"] == "bounds d=2 k=3").unwrap();
    assert_eq!(requested["details"]["courant"], 10);
    assert_eq!(requested["details"]["leydold"], 8);
    let stable: Value = serde_json::from_str(&std::fs::read_to_string(run.join("verdicts.json")).unwrap()).unwrap();
    assert!(stable.get("timings").is_none());
    assert_eq!(stable["verdicts"], report["verdicts"]);
}

#[test]
fn triangle_tables_write_csv_only_when_asked() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(courant(&["triangle-tables", "--out", out, "--format", "json"]).0, 0);
    let run = only_run_dir(dir.path());
    assert!(!run.join("table-nnn-ndn.csv").exists());
    std::fs::remove_dir_all(&run).unwrap();

    assert_eq!(courant(&["triangle-tables", "--out", out, "--format", "json,csv"]).0, 0);
    let run = only_run_dir(dir.path());
    let csv = std::fs::read_to_string(run.join("table-nnn-ndn.csv")).unwrap();
    assert!(csv.starts_with("multiple,value,pairs,Th:nnn,Th:ndn\n"));
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn failed_runs_exit_with_one_and_still_report() {
    let dir = tempfile::tempdir().unwrap();
    // A potential that is not 2π-periodic cannot be posed on the circle.
    let (code, _) = courant(&["sl1d-verify", "--potential", "custom:1;x;1", "--samples", "5", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 1);
    let run = only_run_dir(dir.path());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(run.join("report.json")).unwrap()).unwrap();
    let verdicts = report["verdicts"].as_array().unwrap();
    assert!(verdicts.iter().any(|v| v["verdict"] == "fail" && v["details"]["error"].is_string()));
}
