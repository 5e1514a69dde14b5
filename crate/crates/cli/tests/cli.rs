use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use adsweyl::cone_metric::ConeMetric;
use serde_json::Value;
use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn run(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adsweyl"))
        .arg(cmd)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .expect("binary runs")
}

fn ok(cmd: &str, config: &Path, out: &Path) -> Value {
    let o = run(cmd, config, out, &[]);
    assert!(
        o.status.success(),
        "{cmd} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    manifest(out)
}

fn manifest(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap()
}

fn csv_column(path: &Path, col: &str) -> Vec<String> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header
        .iter()
        .position(|h| *h == col)
        .unwrap_or_else(|| panic!("no column {col}"));
    lines
        .map(|l| l.split(',').nth(k).unwrap().to_string())
        .collect()
}

fn floats(path: &Path, col: &str) -> Vec<f64> {
    csv_column(path, col)
        .iter()
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().unwrap())
        .collect()
}

#[test]
fn forward_diagonal_fixture_is_strictly_concave() {
    let d = TempDir::new().unwrap();
    let m = ok("forward", &fixture("forward_ads.toml"), d.path());
    let kappa = floats(&d.path().join("curvature.csv"), "kappa");
    assert_eq!(kappa.len(), 2);
    assert!(kappa.iter().all(|k| *k < 0.0), "{kappa:?}");
    assert_eq!(m["verdicts"]["strictly_concave"], true);
    let metric =
        ConeMetric::from_toml(&fs::read_to_string(d.path().join("metric.toml")).unwrap()).unwrap();
    assert!(metric.is_strict());
    assert!(fs::read_to_string(d.path().join("surface.obj"))
        .unwrap()
        .contains("\nf "));
}

#[test]
fn forward_is_deterministic() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    ok("forward", &fixture("forward_ads.toml"), a.path());
    ok("forward", &fixture("forward_ads.toml"), b.path());
    for f in ["metric.toml", "surface.obj", "curvature.csv"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn forward_with_small_radius_fails_without_metric() {
    let d = TempDir::new().unwrap();
    let cfg = d.path().join("small.toml");
    let text = fs::read_to_string(fixture("forward_ads.toml"))
        .unwrap()
        .replace("radius = 6", "radius = 1");
    fs::write(&cfg, text).unwrap();
    let out = d.path().join("out");
    let o = run("forward", &cfg, &out, &[]);
    assert_eq!(
        o.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(!out.join("metric.toml").exists());
    assert!(!out.join("manifest.json").exists());
    let err: Value =
        serde_json::from_str(&fs::read_to_string(out.join("error.json")).unwrap()).unwrap();
    assert_eq!(err["kind"], "UnstableHull");
    assert_eq!(err["exit_code"], 4);
}

#[test]
fn forward_minkowski_satisfies_gauss_bonnet() {
    let d = TempDir::new().unwrap();
    ok("forward", &fixture("forward_minkowski.toml"), d.path());
    let total: f64 = floats(&d.path().join("curvature.csv"), "kappa")
        .iter()
        .sum();
    assert!((total + 4.0 * std::f64::consts::PI).abs() < 1e-8, "{total}");
}

#[test]
fn inverse_reproduces_forward_fixture() {
    let d = TempDir::new().unwrap();
    let m = ok("inverse", &fixture("inverse_ads.toml"), d.path());
    assert_eq!(m["verdicts"]["solver"], "ads");
    let diff = floats(&d.path().join("residual.csv"), "difference");
    assert!(diff.iter().all(|x| x.abs() < 1e-7), "{diff:?}");

    // feed the solution back through forward and compare with the fixture
    let sol: toml::Value =
        toml::from_str(&fs::read_to_string(d.path().join("solution.toml")).unwrap()).unwrap();
    let points: Vec<Value> = sol["point"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| serde_json::to_value(&p["coords"]).unwrap())
        .collect();
    let cfg = format!(
        "[forward]\nradius = 6\n\n[forward.configuration]\ngeometry = \"ads\"\nleft = {{ fn = {} }}\nright = {{ fn = {} }}\npoints = {}\n",
        serde_json::to_string(&serde_json::to_value(&sol["left"]["fn"]).unwrap()).unwrap(),
        serde_json::to_string(&serde_json::to_value(&sol["right"]["fn"]).unwrap()).unwrap(),
        serde_json::to_string(&points).unwrap(),
    );
    let path = d.path().join("again.toml");
    fs::write(&path, cfg).unwrap();
    let again = d.path().join("again");
    ok("forward", &path, &again);
    let load = |p: PathBuf| ConeMetric::from_toml(&fs::read_to_string(p).unwrap()).unwrap();
    let (a, b) = (
        load(fixture("ads_metric.toml")),
        load(again.join("metric.toml")),
    );
    assert_eq!(a.tri.triangles.len(), b.tri.triangles.len());
    let mut la = a.lengths.clone();
    let mut lb = b.lengths.clone();
    la.sort_by(f64::total_cmp);
    lb.sort_by(f64::total_cmp);
    let worst = la
        .iter()
        .zip(&lb)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-7, "{worst}");
}

#[test]
fn inverse_on_euclidean_target_uses_minkowski_solver() {
    let d = TempDir::new().unwrap();
    let m = ok("inverse", &fixture("inverse_minkowski.toml"), d.path());
    assert_eq!(m["verdicts"]["solver"], "minkowski");
    let sol = fs::read_to_string(d.path().join("solution.toml")).unwrap();
    assert!(sol.contains("geometry = \"minkowski\""));
    let diff = floats(&d.path().join("residual.csv"), "difference");
    assert!(diff.iter().all(|x| x.abs() < 1e-7), "{diff:?}");
}

#[test]
fn inverse_pair_on_symmetric_targets_has_equal_spectra() {
    let d = TempDir::new().unwrap();
    let m = ok("inverse-pair", &fixture("inverse_pair.toml"), d.path());
    let gap = m["verdicts"]["spectrum_gap"].as_f64().unwrap();
    assert!(gap < 1e-6, "{gap}");
    let diff = floats(&d.path().join("spectra.csv"), "difference");
    assert!(!diff.is_empty());
    assert!(diff.iter().all(|x| x.abs() < 1e-6));
    for f in [
        "residual_plus.csv",
        "residual_minus.csv",
        "trace.jsonl",
        "solution.toml",
    ] {
        assert!(d.path().join(f).exists(), "{f}");
    }
}

#[test]
fn area_check_reports_formula_at_right_angle() {
    let d = TempDir::new().unwrap();
    let cfg = d.path().join("area.toml");
    let text = fs::read_to_string(fixture("area.toml"))
        .unwrap()
        .replace("1.5607963267948966]", "1.5707963267948966]")
        .replace("samples = 1000000", "samples = 200000");
    fs::write(&cfg, text).unwrap();
    let out = d.path().join("out");
    ok("area-check", &cfg, &out);
    let r = floats(&out.join("area.csv"), "r");
    let formula = floats(&out.join("area.csv"), "formula_area");
    let mc = floats(&out.join("area.csv"), "monte_carlo_area");
    let last = r.len() - 1;
    assert_eq!(r[last], std::f64::consts::FRAC_PI_2);
    assert!((formula[last] - 4.0 * std::f64::consts::PI).abs() < 1e-12);
    assert!(
        (mc[last] / formula[last] - 1.0).abs() < 0.01,
        "{}",
        mc[last]
    );
}

#[test]
fn area_plot_is_reproducible_under_seed() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let cfg = a.path().join("area.toml");
    let text = fs::read_to_string(fixture("area.toml"))
        .unwrap()
        .replace("samples = 1000000", "samples = 20000");
    fs::write(&cfg, text).unwrap();
    let (oa, ob) = (a.path().join("out"), b.path().join("out"));
    ok("area-check", &cfg, &oa);
    ok("area-check", &cfg, &ob);
    for f in ["area.csv", "area.svg"] {
        assert_eq!(
            fs::read(oa.join(f)).unwrap(),
            fs::read(ob.join(f)).unwrap(),
            "{f}"
        );
    }
    let oc = b.path().join("other");
    assert!(run("area-check", &cfg, &oc, &["--seed", "8"])
        .status
        .success());
    assert_ne!(
        fs::read(oa.join("area.csv")).unwrap(),
        fs::read(oc.join("area.csv")).unwrap()
    );
    assert_eq!(manifest(&oc)["seed"], 8);
}

#[test]
fn transition_fixture_converges_to_second_order() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    ok("transition", &fixture("transition.toml"), a.path());
    let path = a.path().join("transition.csv");
    let slopes = floats(&path, "slope");
    assert!(!slopes.is_empty());
    assert!(slopes.iter().all(|s| *s >= 1.9), "{slopes:?}");
    assert!(csv_column(&path, "subdivision").iter().all(|v| v == "true"));
    ok("transition", &fixture("transition.toml"), b.path());
    assert_eq!(
        fs::read(path).unwrap(),
        fs::read(b.path().join("transition.csv")).unwrap()
    );
    assert_eq!(
        fs::read(a.path().join("transition.svg")).unwrap(),
        fs::read(b.path().join("transition.svg")).unwrap()
    );
}

#[test]
fn probe_reports_single_cluster() {
    let d = TempDir::new().unwrap();
    let m = ok("probe-uniqueness", &fixture("probe.toml"), d.path());
    assert_eq!(m["verdicts"]["unique"], true);
    assert_eq!(m["seed"], 3);
    assert!(d.path().join("probe.json").exists());
}

#[test]
fn manifest_lists_every_emitted_file() {
    let d = TempDir::new().unwrap();
    let m = ok("forward", &fixture("forward_ads.toml"), d.path());
    let files = m["files"].as_array().unwrap();
    let mut names: Vec<&str> = files.iter().map(|f| f["path"].as_str().unwrap()).collect();
    names.sort();
    assert_eq!(names, ["curvature.csv", "metric.toml", "surface.obj"]);
    for f in files {
        let bytes = fs::read(d.path().join(f["path"].as_str().unwrap())).unwrap();
        assert_eq!(f["bytes"].as_u64().unwrap() as usize, bytes.len());
        assert_eq!(f["sha256"].as_str().unwrap().len(), 64);
    }
    assert_eq!(m["command"], "forward");
    assert_eq!(m["config"]["forward"]["radius"], 6);
    assert!(m["wall_time_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn locked_output_directory_is_rejected() {
    let d = TempDir::new().unwrap();
    fs::write(d.path().join(".adsweyl.lock"), "1\n").unwrap();
    let o = run("forward", &fixture("forward_ads.toml"), d.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!d.path().join("manifest.json").exists());
    assert!(d.path().join(".adsweyl.lock").exists());
}

#[test]
fn mismatched_command_is_a_validation_error() {
    let d = TempDir::new().unwrap();
    let o = run("inverse", &fixture("forward_ads.toml"), d.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    let err: Value = serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap();
    assert_eq!(err["kind"], "Config");
}

#[test]
fn unknown_config_keys_are_rejected() {
    let d = TempDir::new().unwrap();
    let cfg = d.path().join("bad.toml");
    fs::write(&cfg, "command = \"forward\"\nbogus = 1\n").unwrap();
    assert_eq!(
        run("forward", &cfg, &d.path().join("out"), &[])
            .status
            .code(),
        Some(2)
    );
}
