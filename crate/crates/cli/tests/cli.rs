use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;
use zerolab::averaging::{midpoint_rate, LineSequence};
use zerolab::models::{build_model, differentiation_flow};
use zerolab::perturbation::EpsilonProfile;

fn zerolab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zerolab")).current_dir(dir).args(args).output().expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) {
    let out = zerolab(dir, args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

const SMALL_FLOW: [&str; 7] = ["flow", "--J", "160", "--eps", "0.05", "--steps", "6"];

#[test]
fn flow_reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    for out in ["a", "b"] {
        let mut args = SMALL_FLOW.to_vec();
        args.extend(["--seed", "7", "--out", out]);
        ok(tmp.path(), &args);
    }
    let m = manifest(&tmp.path().join("a"));
    assert_eq!(m["status"], "ok");
    assert_eq!(m["seed"], 7);
    assert_eq!(m["rng"], zerolab::rng::RNG_NAME);
    let outputs: Vec<&str> = m["outputs"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(outputs, ["trajectory.csv", "steps.csv", "gap_reports.json", "cosine_fit.json"]);
    for name in outputs {
        let a = fs::read(tmp.path().join("a").join(name)).unwrap();
        let b = fs::read(tmp.path().join("b").join(name)).unwrap();
        assert!(a == b, "{name} differs between reruns");
    }
    let (header, _) = read_csv(&tmp.path().join("a/trajectory.csv"));
    assert_eq!(header, ["step [derivatives]", "index [rank from origin]", "zero [x]"]);
}

#[test]
fn other_seed_changes_the_trajectory() {
    let tmp = TempDir::new().unwrap();
    for (seed, out) in [("7", "a"), ("8", "b")] {
        let mut args = SMALL_FLOW.to_vec();
        args.extend(["--seed", seed, "--out", out]);
        ok(tmp.path(), &args);
    }
    let a = fs::read(tmp.path().join("a/trajectory.csv")).unwrap();
    let b = fs::read(tmp.path().join("b/trajectory.csv")).unwrap();
    assert_ne!(a, b);
}

#[test]
fn flow_discrepancy_matches_library_run() {
    let tmp = TempDir::new().unwrap();
    let mut args = SMALL_FLOW.to_vec();
    args.extend(["--seed", "3", "--out", "f"]);
    ok(tmp.path(), &args);
    let (header, rows) = read_csv(&tmp.path().join("f/steps.csv"));
    let col = header.iter().position(|h| h == "sup_discrepancy [x]").unwrap();

    let profile = EpsilonProfile::seeded_uniform(3, 0, -160, 160, 0.05).unwrap();
    let flow = differentiation_flow(&build_model(&profile, 160, 1.0).unwrap(), 6).unwrap();
    assert_eq!(rows.len(), flow.steps.len());
    for (row, step) in rows.iter().zip(&flow.steps) {
        assert_eq!(row[0], step.order.to_string());
        assert_eq!(row[col].parse::<f64>().unwrap(), step.report.sup_discrepancy);
    }
}

#[test]
fn unperturbed_flow_has_only_truncation_discrepancy() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["flow", "--eps", "0", "--J", "240", "--steps", "20", "--out", "z"]);
    let (header, rows) = read_csv(&tmp.path().join("z/steps.csv"));
    let col = header.iter().position(|h| h == "sup_discrepancy [x]").unwrap();
    assert_eq!(rows[0][col].parse::<f64>().unwrap(), 0.0);
    for row in &rows {
        assert!(row[col].parse::<f64>().unwrap() < 2e-3, "step {}: {}", row[0], row[col]);
    }
}

#[test]
fn exact_kernel_centers_are_reciprocal_odd_numbers() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["kernel", "--preset", "diff2", "--center", "--lmax", "20", "--exact", "--out", "k"]);
    let (header, rows) = read_csv(&tmp.path().join("k/centers.csv"));
    assert_eq!(header, ["power [count]", "center [mass]", "center_decimal [mass]"]);
    assert_eq!(rows.len(), 20);
    for (l, row) in (1..).zip(&rows) {
        assert_eq!(row[0], l.to_string());
        assert_eq!(row[1], format!("1/{}", 1 + 2 * l));
    }
}

#[test]
fn avg_slope_matches_library_rate_fit() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["avg", "--n", "4001", "--eps", "0.4", "--steps", "400", "--fit", "--seed", "5", "--out", "v"]);
    let fit: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("v/fit.json")).unwrap()).unwrap();
    let slope = fit["slope"].as_f64().unwrap();

    let s = LineSequence::noisy_lattice(5, 0, -2000, 2000, 0.4).unwrap();
    let oracle = midpoint_rate(&s, 400, 1000, 10).unwrap();
    assert!((slope - oracle.slope).abs() < 1e-12, "{slope} vs {}", oracle.slope);
    let (_, rows) = read_csv(&tmp.path().join("v/discrepancy.csv"));
    assert_eq!(rows.len(), 401);
    for (j, d) in oracle.steps.iter().zip(&oracle.discrepancy) {
        assert_eq!(rows[*j][2].parse::<f64>().unwrap(), *d);
    }
}

#[test]
fn circle_bump_row_zero_agrees() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["perturb", "--mode", "circle", "--n", "16", "--bump", "0", "0.0016", "--out", "p"]);
    let (header, rows) = read_csv(&tmp.path().join("p/table.csv"));
    assert_eq!(header[1], "predicted [turns]");
    let row = rows.iter().find(|r| r[0] == "0").unwrap();
    let (predicted, measured): (f64, f64) = (row[1].parse().unwrap(), row[2].parse().unwrap());
    assert!(predicted > 0.0);
    assert!((predicted - measured).abs() < 0.05 * predicted, "{predicted} vs {measured}");
    assert_eq!(row[5], "false");
}

#[test]
fn config_file_values_yield_to_flags() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("run.toml"), "seed = 4\n[flow]\nJ = 120\nsteps = 3\neps = 0.1\n").unwrap();
    ok(tmp.path(), &["flow", "--config", "run.toml", "--steps", "2", "--out", "g"]);
    let m = manifest(&tmp.path().join("g"));
    assert_eq!(m["seed"], 4);
    assert_eq!(m["config"]["truncation"], 120);
    assert_eq!(m["config"]["steps"], 2);
    assert_eq!(m["config"]["profile"]["kind"], "random");
}

#[test]
fn exit_codes() {
    let tmp = TempDir::new().unwrap();
    let code = |args: &[&str]| zerolab(tmp.path(), args).status.code();

    assert_eq!(code(&["flow", "--no-such-flag"]), Some(2));
    fs::write(tmp.path().join("bad.toml"), "[flow]\nstepz = 3\n").unwrap();
    assert_eq!(code(&["flow", "--config", "bad.toml"]), Some(2));
    assert_eq!(code(&["flow", "--J", "100", "--steps", "40", "--out", "e"]), Some(2));
    assert_eq!(code(&["flow", "--J", "100", "--steps", "2", "--exact", "--out", "e"]), Some(2));
    assert_eq!(code(&["kernel", "--preset", "midpoint2", "--out", "e"]), Some(2));

    let out =
        zerolab(tmp.path(), &["flow", "--J", "16", "--steps", "1", "--eps", "0.1", "--kappa", "0.01", "--out", "n"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("models::cosine_fit"));
    assert!(manifest(&tmp.path().join("n"))["status"].as_str().unwrap().starts_with("failed (exit 3)"));

    assert_eq!(code(&["report", "--out", "missing"]), Some(4));
    assert_eq!(code(&["flow", "--config", "missing.toml"]), Some(4));
}

#[test]
fn failed_run_keeps_its_manifest() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(zerolab(tmp.path(), &["flow", "--J", "100", "--steps", "40", "--out", "e"]).status.code(), Some(2));
    let m = manifest(&tmp.path().join("e"));
    assert!(m["status"].as_str().unwrap().contains("models::differentiation_flow"));
    assert_eq!(m["outputs"].as_array().unwrap().len(), 0);
}

#[test]
fn circle_modes_and_bessel_table() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["circle", "--trials", "2", "--out", "c"]);
    let (_, rows) = read_csv(&tmp.path().join("c/rate.csv"));
    assert_eq!(rows.len(), 2);
    for row in &rows {
        let rel: f64 = row[3].parse().unwrap();
        assert!(rel.abs() < 0.02);
    }

    ok(tmp.path(), &["circle", "--mode", "attractor", "--trials", "2", "--degree", "6", "--k", "40", "--out", "a"]);
    let (_, rows) = read_csv(&tmp.path().join("a/attractor.csv"));
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r[1] == "6" && r[4].parse::<f64>().unwrap() < 1e-4));
    let (_, zeros) = read_csv(&tmp.path().join("a/zeros.csv"));
    assert_eq!(zeros.len(), 12);

    ok(tmp.path(), &["bessel", "--orders", "0", "--ks", "10,40", "--out", "b"]);
    let (header, rows) = read_csv(&tmp.path().join("b/errors.csv"));
    assert_eq!(header[2], "sup_relative_error [1]");
    let errs: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert_eq!(errs.len(), 2);
    assert!(errs[1] < errs[0]);

    let out = zerolab(tmp.path(), &["report", "--out", "b"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("experiment   bessel") && text.contains("errors.csv"));
}
