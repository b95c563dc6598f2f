//! End-to-end runs of the `nonlocal-lab` binary on the shipped configs.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nonlocal_core::domain::{build_grid, DomainDescriptor};
use nonlocal_core::model::Exponent;
use nonlocal_core::spectral::{first_eigenpair, Normalization};
use serde_json::Value;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nonlocal-lab")).args(args).output().expect("binary runs")
}

/// Runs `kind` on a shipped config into a fresh directory.
fn run(kind: &str, name: &str, extra: &[&str]) -> (Output, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(name);
    let mut args = vec![kind, "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()];
    args.extend_from_slice(extra);
    (lab(&args), dir)
}

fn stem(name: &str) -> &str {
    name.trim_end_matches(".json")
}

fn summary(dir: &Path, name: &str) -> Value {
    let text = fs::read_to_string(dir.join(format!("{}.summary.json", stem(name)))).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn sweep_rows(dir: &Path, name: &str) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_path(dir.join(format!("{}.sweep.csv", stem(name)))).unwrap();
    r.records().map(Result::unwrap).collect()
}

fn ok(out: &Output) {
    assert!(out.status.success(), "status {:?}, stderr: {}", out.status, String::from_utf8_lossy(&out.stderr));
}

#[test]
fn exact_fixture_solve_matches_closed_form() {
    let name = "remark310_solve.json";
    let (out, dir) = run("solve", name, &[]);
    ok(&out);
    let s = summary(dir.path(), name);
    assert_eq!(s["outcome"]["kind"], "completed");
    let err = s["exact_sup_error"].as_f64().unwrap();
    assert!(err < 1e-3, "sup error {err}");
    assert_eq!(s["config_hash"].as_str().unwrap().len(), 64);

    // same computation, so equality is exact
    let grid = build_grid(DomainDescriptor::Interval { a: 0.0, b: 1.0 }, 101).unwrap();
    let lam = first_eigenpair(&grid, Normalization::IntegralOne).unwrap().lambda1;
    assert_eq!(s["lambda1"].as_f64().unwrap(), lam);

    let csv = fs::read_to_string(dir.path().join("remark310_solve.trace.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,sup_norm,mass,J,I"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first.len(), 5);
    assert_eq!(first[1], "1.0000000000000000e0");
}

#[test]
fn nonpositive_exponent_is_a_schema_error() {
    let (out, dir) = run("solve", "bad_exponent.json", &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("exponent r = -1") && err.contains("must be positive"), "{err}");
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn exact_candidate_has_two_sided_residuals() {
    let name = "remark310_certify.json";
    let (out, dir) = run("certify", name, &[]);
    ok(&out);
    let s = summary(dir.path(), name);
    assert_eq!(s["candidate"]["kind"], "exact_solution");
    assert_eq!(s["passed"], true);
    for key in ["interior_min_residual", "boundary_min_residual"] {
        let r = s["residuals"][key].as_f64().unwrap();
        // oriented as −|residual| for an exact solution
        assert!(r <= 0.0 && r >= -1e-8, "{key} = {r}");
    }
}

#[test]
fn compare_pairs_stay_ordered() {
    let (out, dir) = run("compare", "heat_compare.json", &[]);
    ok(&out);
    let s = summary(dir.path(), "heat_compare.json");
    assert_eq!(s["report"]["passed"], true);
    assert!(s["report"]["max_violation"].as_f64().unwrap() <= 1e-12);

    let (out, dir) = run("compare", "remark310_compare.json", &[]);
    ok(&out);
    assert_eq!(summary(dir.path(), "remark310_compare.json")["report"]["passed"], true);
}

#[test]
fn positivity_proviso_exits_with_hypothesis_code() {
    let (out, _dir) = run("compare", "proviso_compare.json", &[]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("min(r, p, l) < 1") && err.contains("strictly positive"), "{err}");
}

#[test]
fn regime_map_covers_the_grid() {
    let name = "regime_map.json";
    let (out, dir) = run("sweep", name, &[]);
    ok(&out);
    let rows = sweep_rows(dir.path(), name);
    assert_eq!(rows.len(), 36);
    let cell = |rp: &str, l: &str| rows.iter().find(|r| &r[0] == rp && &r[1] == l).unwrap().clone();
    let low = cell("0.5", "0.5");
    assert_eq!((&low[2], &low[3]), ("0.25", "0.25"));
    assert!(!low[6].contains("2.4"), "{:?}", low);
    assert!(cell("3", "3")[6].contains("BlowUpLargeData"));
    // lexicographic: r+p outer, l inner
    let keys: Vec<(String, String)> = rows.iter().map(|r| (r[0].to_string(), r[1].to_string())).collect();
    assert_eq!(keys[0], ("0.5".into(), "0.5".into()));
    assert_eq!(keys[1], ("0.5".into(), "1".into()));
    assert_eq!(keys[6], ("1".into(), "0.5".into()));
}

#[test]
fn l_axis_flips_past_the_threshold() {
    let name = "l_flip.json";
    let (out, dir) = run("sweep", name, &[]);
    ok(&out);
    let rows = sweep_rows(dir.path(), name);
    let threshold: Exponent = "1.5".parse().unwrap(); // (q + 1)/2 with q = 2
    let first_above = rows.iter().position(|r| r[0].parse::<Exponent>().unwrap() > threshold).unwrap();
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r[5].contains("BlowUpLargeData(2.4-i)"), i >= first_above, "row {i}: {r:?}");
    }
    assert_eq!(&rows[first_above][0], "1.75");
}

#[test]
fn point_sweep_equals_classify() {
    let (out, dir) = run("classify", "blowup_classify.json", &[]);
    ok(&out);
    let labels: Vec<String> = summary(dir.path(), "blowup_classify.json")["labels"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    assert!(!labels.is_empty());

    let (out, dir) = run("sweep", "blowup_point_sweep.json", &[]);
    ok(&out);
    let rows = sweep_rows(dir.path(), "blowup_point_sweep.json");
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][4], labels.join(";"));
}

#[test]
fn reruns_are_byte_identical_and_thread_count_free() {
    for (kind, name) in [("solve", "remark310_solve.json"), ("sweep", "regime_map.json")] {
        let (a, da) = run(kind, name, &["--threads", "1"]);
        let (b, db) = run(kind, name, &["--threads", "4", "--seed", "7"]);
        ok(&a);
        ok(&b);
        let mut files: Vec<_> = fs::read_dir(da.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        files.sort();
        assert!(files.len() >= 2);
        for f in files {
            assert_eq!(fs::read(da.path().join(&f)).unwrap(), fs::read(db.path().join(&f)).unwrap(), "{f:?}");
        }
    }
}

#[test]
fn eig_summary_and_gnuplot_script() {
    let name = "disc_eig.json";
    let (out, dir) = run("eig", name, &["--emit-gnuplot"]);
    ok(&out);
    let lam = summary(dir.path(), name)["lambda1"].as_f64().unwrap();
    assert!((lam - 5.7832).abs() / 5.7832 < 1e-3, "{lam}");
    let gp = fs::read_to_string(dir.path().join("disc_eig.eig.gp")).unwrap();
    assert!(gp.contains("'disc_eig.eig.csv'"));
}

#[test]
fn config_errors_exit_two() {
    let cfg = config("remark310_solve.json");
    let out = lab(&["eig", "--config", cfg.to_str().unwrap(), "--out", "/nonexistent-never-written"]);
    assert_eq!(out.status.code(), Some(2), "kind mismatch");
    let out = lab(&["solve", "--config", "/no/such/config.json"]);
    assert_eq!(out.status.code(), Some(2), "missing file");
}

#[test]
fn strict_classify_reports_missing_hypotheses() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg: Value = serde_json::from_str(&fs::read_to_string(config("blowup_classify.json")).unwrap()).unwrap();
    cfg["classify"] = serde_json::json!({"hypotheses": [], "strict": true});
    let path = dir.path().join("strict.json");
    fs::write(&path, cfg.to_string()).unwrap();
    let out = lab(&["classify", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("kernel_lower_bound"));
}
