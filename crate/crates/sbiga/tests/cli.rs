use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sbiga::run::read_csv;
use sbiga::vtk::read_vtk;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn sbiga(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sbiga")).current_dir(dir).args(args).output().unwrap()
}

fn square_case(bc: &str, load: &str) -> String {
    format!(
        r#"name = "tiny"
[discretization]
p = 3
[material]
E = 1.0
nu = 0.3
D = 1.0
[loads.surface]
{load}
[study]
kind = "single"
levels = [2]
[outputs]
csv = "tiny.csv"
field = "tiny.vtk"
grid = [5, 4]
[[geometry.blocks]]
center = [0.4, 0.45]
curves = [
  {{ kind = "line", from = [0, 0], to = [1, 0], bc = "{bc}" }},
  {{ kind = "line", from = [1, 0], to = [1, 1], bc = "{bc}" }},
  {{ kind = "line", from = [1, 1], to = [0, 1], bc = "{bc}" }},
  {{ kind = "line", from = [0, 1], to = [0, 0], bc = "{bc}" }},
]
"#
    )
}

#[test]
fn unknown_bc_is_a_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), square_case("hinged", "constant = 1.0")).unwrap();
    let out = sbiga(dir.path(), &["run", "bad.toml"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("unknown bc tag 'hinged'"), "{err}");
    let json = err.lines().find(|l| l.starts_with('{')).unwrap();
    let v: serde_json::Value = serde_json::from_str(json).unwrap();
    assert_eq!(v["error"], "schema-error");
}

#[test]
fn missing_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = sbiga(dir.path(), &["run", "absent.toml"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn serial_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("square_smooth.toml");
    let cfg = cfg.to_str().unwrap();
    let mut tables = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let out = sbiga(dir.path(), &["--serial", "--no-timing", "converge", cfg, "--levels", "4,6", "--csv", name]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        tables.push(std::fs::read(dir.path().join(name)).unwrap());
    }
    assert_eq!(tables[0], tables[1]);
    let rows = read_csv(&dir.path().join("a.csv")).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.wall_time_s == 0.0 && r.h2_semi.is_some()));
    assert!(rows[1].l2.unwrap() < rows[0].l2.unwrap());
}

#[test]
fn vtk_export_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("tiny.toml"), square_case("simply_supported", "constant = 1.0")).unwrap();
    let out = sbiga(dir.path(), &["export", "tiny.toml"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let data = read_vtk(&dir.path().join("tiny.vtk")).unwrap();
    assert_eq!(data.dims, [5, 4, 4]);
    assert_eq!(data.points.len(), 80);
    let u = &data.fields["u"];
    assert!(u.iter().all(|v| v.is_finite()) && u.iter().any(|&v| v > 0.0));
    let text = std::fs::read_to_string(dir.path().join("tiny.vtk")).unwrap();
    assert_eq!(sbiga::vtk::to_vtk(&sbiga::vtk::parse_vtk(&text).unwrap(), "tiny level 2"), text);
}

#[test]
fn zero_solution_exports_zero_fields() {
    let cfg = sbiga::config::parse(&square_case("clamped", "constant = 1.0")).unwrap();
    let case = sbiga::Case::from_config(&cfg).unwrap();
    let cs = sbiga::run::coupled_space(&case, 2, &sbiga::RunOptions::default()).unwrap();
    let field = sbiga::core::plate::Field::from_coupled(&cs, &vec![0.0; cs.n6()]);
    let data = sbiga::vtk::sample_field(&field, &case.material, [3, 3]).unwrap();
    let back = sbiga::vtk::parse_vtk(&sbiga::vtk::to_vtk(&data, "zero")).unwrap();
    assert_eq!(back, data);
    assert!(back.fields.values().all(|f| f.iter().all(|&v| v == 0.0)));
}

#[test]
fn bundled_square_configs_verify() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["square_smooth.toml", "square_pointload.toml"] {
        let cfg = configs().join(name);
        let out = sbiga(dir.path(), &["verify", cfg.to_str().unwrap()]);
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stdout));
        let text = String::from_utf8_lossy(&out.stdout);
        assert!(text.contains("asg1") && text.contains("c1-jump") && text.contains("reproduction"));
    }
}

fn two_blocks(bulge: f64) -> String {
    let third = 1.0 / 3.0;
    let cut = format!("[[0.5, 0], [{bulge}, {third:?}], [0.5, {:?}], [0.5, 1]]", 2.0 * third);
    let back = format!("[[0.5, 1], [0.5, {:?}], [{bulge}, {third:?}], [0.5, 0]]", 2.0 * third);
    format!(
        r#"name = "two_blocks"
[discretization]
p = 3
[material]
E = 1.0
nu = 0.3
D = 1.0
[loads.surface]
constant = 1.0
[study]
kind = "single"
levels = [4]
[[geometry.blocks]]
center = [0.25, 0.5]
curves = [
  {{ kind = "line", from = [0, 0], to = [0.5, 0], bc = "clamped" }},
  {{ kind = "nurbs", degree = 3, knots = [0, 0, 0, 0, 1, 1, 1, 1], points = {cut}, weights = [1, 1, 1, 1] }},
  {{ kind = "line", from = [0.5, 1], to = [0, 1], bc = "clamped" }},
  {{ kind = "line", from = [0, 1], to = [0, 0], bc = "clamped" }},
]
[[geometry.blocks]]
center = [0.75, 0.5]
curves = [
  {{ kind = "line", from = [0.5, 0], to = [1, 0], bc = "clamped" }},
  {{ kind = "line", from = [1, 0], to = [1, 1], bc = "clamped" }},
  {{ kind = "line", from = [1, 1], to = [0.5, 1], bc = "clamped" }},
  {{ kind = "nurbs", degree = 3, knots = [0, 0, 0, 0, 1, 1, 1, 1], points = {back}, weights = [1, 1, 1, 1] }},
]
"#
    )
}

#[test]
fn perturbed_interface_is_located() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("flat.toml"), two_blocks(0.5)).unwrap();
    std::fs::write(dir.path().join("bent.toml"), two_blocks(0.56)).unwrap();
    let flat = sbiga(dir.path(), &["verify", "flat.toml"]);
    assert!(flat.status.success(), "{}", String::from_utf8_lossy(&flat.stdout));
    let bent = sbiga(dir.path(), &["verify", "bent.toml", "--checks", "c1-jump"]);
    assert_eq!(bent.status.code(), Some(1));
    let text = String::from_utf8_lossy(&bent.stdout);
    let failed: Vec<&str> = text.lines().filter(|l| l.ends_with("FAIL")).collect();
    assert_eq!(failed.len(), 1, "{text}");
    assert!(failed[0].starts_with("c1-jump") && failed[0].contains("interface 8 (1|7)"), "{text}");
}

#[test]
fn exported_samples_match_evaluation() {
    let cfg = sbiga::config::load(&configs().join("square_smooth.toml")).unwrap();
    let case = sbiga::Case::from_config(&cfg).unwrap();
    let solved = sbiga::run::solve_level(&case, 4, &sbiga::RunOptions::default()).unwrap();
    let field = solved.field();
    let data = sbiga::vtk::sample_field(&field, &case.material, [6, 5]).unwrap();
    let (zs, xs) = sbiga::vtk::lattice(6, 5);
    let mut k = 0;
    for patch in 0..field.space.domain.patches.len() {
        for &x in &xs {
            for &z in &zs {
                let v = field.eval(patch, z, x, 2).unwrap();
                assert_eq!(data.fields["u"][k], v.value);
                assert_eq!(data.fields["m12"][k], case.material.bending_moments(v.hess)[2]);
                k += 1;
            }
        }
    }
    let umax = data.fields["u"].iter().copied().fold(f64::MIN, f64::max);
    assert!((umax - 1.0).abs() < 0.05);
}
