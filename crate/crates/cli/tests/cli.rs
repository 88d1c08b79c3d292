//! End-to-end runs of the `co2did` binary: exit codes, artifact trees,
//! rerun stability, and the numbers that must survive the trip through
//! CSV and JSON.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_co2did"))
}

/// The 12-household screening fixture shared with the core crate.
fn fixture_conf() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/ledger12/run.conf")
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn json_file(path: &Path) -> serde_json::Value {
    let text =
        std::fs::read_to_string(path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()));
    serde_json::from_str(&text).unwrap_or_else(|e| panic!("parsing {}: {e}", path.display()))
}

/// Generate a survey bundle into `dir` and return the run.conf path.
fn simulate_into(dir: &Path, extra: &[&str]) -> PathBuf {
    let output = bin()
        .arg("simulate")
        .args(["--out", dir.to_str().unwrap()])
        .args(extra)
        .output()
        .expect("running simulate");
    assert!(
        output.status.success(),
        "simulate failed: {}",
        stderr_of(&output)
    );
    dir.join("run.conf")
}

#[test]
fn validate_accepts_the_fixture() {
    let out = TempDir::new().unwrap();
    let output = bin()
        .arg("validate")
        .args(["--config", fixture_conf().to_str().unwrap()])
        .args(["--out", out.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr_of(&output));

    let stdout = stdout_of(&output);
    assert!(
        stdout.contains("0 fatal"),
        "summary line missing:\n{stdout}"
    );
    let doc = json_file(&out.path().join("validate.json"));
    assert_eq!(doc["fatal"], 0);
    assert!(out.path().join("manifest.json").exists());
}

#[test]
fn panel_prints_the_ledger_and_writes_csv() {
    let out = TempDir::new().unwrap();
    let output = bin()
        .arg("panel")
        .args(["--config", fixture_conf().to_str().unwrap()])
        .args(["--out", out.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr_of(&output));
    assert!(stdout_of(&output).contains("3 households retained"));

    let csv = std::fs::read_to_string(out.path().join("panel_ledger.csv")).unwrap();
    assert!(csv.starts_with("# manifest_digest="));
    // wave 1: 3 missing-info, 1 incomplete VMT, 1 factor gap, 4 unmatched, 3 kept.
    assert!(
        csv.contains("\n1,3,1,1,4,3,12\n"),
        "ledger row changed:\n{csv}"
    );
    assert!(
        csv.contains("\n2,2,2,1,3,3,11\n"),
        "ledger row changed:\n{csv}"
    );
}

#[test]
fn zero_noise_did_recovers_the_planted_coefficients() {
    let dir = TempDir::new().unwrap();
    let conf_text = "sim.noise_sd = 0\nsim.seed = 7\n";
    let sim_conf = dir.path().join("sim.conf");
    std::fs::write(&sim_conf, conf_text).unwrap();

    let bundle = dir.path().join("bundle");
    let run_conf = simulate_into(&bundle, &["--config", sim_conf.to_str().unwrap()]);

    let out = dir.path().join("out");
    let output = bin()
        .arg("did")
        .args(["--config", run_conf.to_str().unwrap()])
        .args(["--out", out.to_str().unwrap()])
        .args(["--model", "1"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr_of(&output));

    let doc = json_file(&out.join("did_model1.json"));
    assert_eq!(doc["n_used"], 320);
    let effect = doc["treatment_effect"].as_f64().unwrap();
    assert!(
        (effect - -2316.8).abs() < 1e-6,
        "treatment effect drifted: {effect}"
    );
    let terms = doc["terms"].as_array().unwrap();
    assert_eq!(terms.len(), 4);
    let intercept = terms[0]["estimate"].as_f64().unwrap();
    assert!(
        (intercept - 9992.7).abs() < 1e-6,
        "intercept drifted: {intercept}"
    );
    // Only model 1 was requested.
    assert!(!out.join("did_model2.json").exists());
}

#[test]
fn lifecycle_prices_the_fixture_rail_uptake() {
    let out = TempDir::new().unwrap();
    let output = bin()
        .arg("lifecycle")
        .args(["--config", fixture_conf().to_str().unwrap()])
        .args(["--out", out.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr_of(&output));

    let doc = json_file(&out.path().join("lifecycle.json"));
    let uptake = doc["rail_uptake_trips_per_day"].as_f64().unwrap();
    assert!((uptake - 1.5).abs() < 1e-12, "uptake {uptake}");
    let offset = doc["transit_offset_g"].as_f64().unwrap();
    let per_trip = doc["rail"]["per_trip_lifecycle_g"].as_f64().unwrap();
    assert!((offset - 1.5 * per_trip).abs() < 1e-9);
    assert!(stdout_of(&output).contains("rail uptake: 1.500 trips/day"));
}

#[test]
fn report_writes_the_full_tree_and_reruns_byte_identically() {
    let dir = TempDir::new().unwrap();
    let run_conf = simulate_into(&dir.path().join("bundle"), &["--seed", "42"]);

    let first = dir.path().join("first");
    let output = bin()
        .arg("report")
        .args(["--config", run_conf.to_str().unwrap()])
        .args(["--out", first.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr_of(&output));
    // The generated bundle has no lifecycle factors; the section is
    // skipped with a notice rather than failing the run.
    assert!(stderr_of(&output).contains("skipping the life-cycle section"));

    let expected = [
        "manifest.json",
        "validate.json",
        "panel_ledger.csv",
        "emissions.csv",
        "contrast_daily_co2_g.csv",
        "contrast_daily_vmt.csv",
        "contrast_car_trips_per_day.csv",
        "contrast_bus_trips_per_day.csv",
        "contrast_train_trips_per_day.csv",
        "contrast_within_changes.csv",
        "did_model1.json",
        "did_model2.json",
        "did_model3.json",
        "did_model4.json",
        "sensitivity.csv",
    ];
    for name in expected {
        assert!(first.join(name).exists(), "missing artifact {name}");
    }

    let second = dir.path().join("second");
    let rerun = bin()
        .arg("report")
        .args(["--config", run_conf.to_str().unwrap()])
        .args(["--out", second.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(rerun.status.code(), Some(0));
    for name in expected {
        if name == "manifest.json" {
            continue; // carries the run timestamp by design
        }
        let a = std::fs::read(first.join(name)).unwrap();
        let b = std::fs::read(second.join(name)).unwrap();
        assert_eq!(a, b, "{name} is not stable across reruns");
    }
}

#[test]
fn simulate_is_deterministic_per_seed() {
    let dir = TempDir::new().unwrap();
    simulate_into(&dir.path().join("a"), &["--seed", "11"]);
    simulate_into(&dir.path().join("b"), &["--seed", "11"]);
    simulate_into(&dir.path().join("c"), &["--seed", "12"]);

    for name in [
        "households.csv",
        "vehicles.csv",
        "odometer.csv",
        "trips.csv",
    ] {
        let a = std::fs::read(dir.path().join("a").join(name)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs for the same seed");
    }
    let a = std::fs::read(dir.path().join("a/households.csv")).unwrap();
    let c = std::fs::read(dir.path().join("c/households.csv")).unwrap();
    assert_ne!(a, c, "different seeds produced identical households");
}

#[test]
fn simulate_leaves_inputs_untouched_by_analysis() {
    let dir = TempDir::new().unwrap();
    let bundle = dir.path().join("bundle");
    let run_conf = simulate_into(&bundle, &["--seed", "5"]);
    let before = std::fs::read(bundle.join("households.csv")).unwrap();

    let output = bin()
        .arg("report")
        .args(["--config", run_conf.to_str().unwrap()])
        .args(["--out", dir.path().join("out").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr_of(&output));

    let after = std::fs::read(bundle.join("households.csv")).unwrap();
    assert_eq!(before, after, "analysis modified its input");
}

#[test]
fn recover_writes_a_parsable_recovery_report() {
    let out = TempDir::new().unwrap();
    let output = bin()
        .arg("recover")
        .args(["--out", out.path().to_str().unwrap()])
        .args(["--reps", "8"])
        .args(["--seed", "3"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr_of(&output));

    let doc = json_file(&out.path().join("recovery.json"));
    assert_eq!(doc["replications"], 8);
    let truth = doc["true_effect"].as_f64().unwrap();
    assert!((truth - -2316.8).abs() < 1e-9);
    assert!(stdout_of(&output).contains("8 replications"));
}

#[test]
fn sensitivity_accepts_mixed_unit_radii() {
    let dir = TempDir::new().unwrap();
    let run_conf = simulate_into(&dir.path().join("bundle"), &["--seed", "42"]);
    let out = dir.path().join("out");
    let output = bin()
        .arg("sensitivity")
        .args(["--config", run_conf.to_str().unwrap()])
        .args(["--out", out.to_str().unwrap()])
        .args(["--radii", "0.5mi,1km"])
        .args(["--model", "1"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr_of(&output));

    let csv = std::fs::read_to_string(out.join("sensitivity.csv")).unwrap();
    assert!(csv.contains("0.5 mi"), "mile radius missing:\n{csv}");
    assert!(csv.contains("1 km"), "km radius missing:\n{csv}");
}

#[test]
fn usage_errors_exit_two() {
    let bad_subcommand = bin().arg("frobnicate").output().unwrap();
    assert_eq!(bad_subcommand.status.code(), Some(2));
    assert!(stderr_of(&bad_subcommand).contains("Usage:"));

    let bad_model = bin()
        .arg("did")
        .args(["--config", "whatever.conf", "--model", "5"])
        .output()
        .unwrap();
    assert_eq!(bad_model.status.code(), Some(2));

    let bad_radius = bin()
        .arg("sensitivity")
        .args(["--config", "whatever.conf", "--radii", "0.5parsec"])
        .output()
        .unwrap();
    assert_eq!(bad_radius.status.code(), Some(2));
}

#[test]
fn pipeline_errors_exit_one_with_the_module_message() {
    let missing = bin()
        .arg("did")
        .args(["--config", "/nonexistent/run.conf", "--out", "/tmp"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(1));
    assert!(stderr_of(&missing).starts_with("error: "));

    // The fixture's experimental group keeps a single household, which
    // is too thin for a two-sample contrast; the stats error surfaces.
    let out = TempDir::new().unwrap();
    let thin = bin()
        .arg("contrast")
        .args(["--config", fixture_conf().to_str().unwrap()])
        .args(["--out", out.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(thin.status.code(), Some(1));
    assert!(
        stderr_of(&thin).contains("at least 2 observations"),
        "unexpected message: {}",
        stderr_of(&thin)
    );
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = TempDir::new().unwrap();
    let conf = dir.path().join("bad.conf");
    std::fs::write(&conf, "panel.catchment_radius = 0.5mi\ntypo.key = 1\n").unwrap();
    let output = bin()
        .arg("panel")
        .args(["--config", conf.to_str().unwrap()])
        .args(["--out", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(
        stderr_of(&output).contains("typo.key"),
        "error should name the offending key: {}",
        stderr_of(&output)
    );
}
