//! End-to-end contract tests for the `mhk` binary: exit codes, artifact
//! layout, manifest contents, and the override flags, all through real
//! process invocations on temporary directories.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn mhk() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mhk"));
    cmd.env_remove("MHK_OUT_DIR");
    cmd
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("the CLI binary runs")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// A small passing `validate` configuration on the reference kernel.
fn write_validate_config(path: &Path, seed: u64) {
    let eps = [0.05, 0.1, 0.15, 0.2];
    let cfg = serde_json::json!({
        "schema_version": "1",
        "experiment": "validate",
        "seed": seed,
        "validate": {
            "chain": { "kind": "two_state_reference" },
            "observable": { "kind": "indicator", "index": 0 },
            "n": 60,
            "trials": 1000,
            "eps": eps,
            "start": { "kind": "stationary" },
            "specs": [{
                "family": "time_indep",
                "n": 60,
                "eps": eps,
                "m_stretch": 1.0,
                "gamma": 28.0 / 9.0,
                "span": 1.0
            }]
        }
    });
    fs::write(path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
}

fn tempdir() -> tempfile::TempDir {
    tempfile::tempdir().unwrap()
}

fn out_dir(root: &tempfile::TempDir, name: &str) -> PathBuf {
    let dir = root.path().join(name);
    fs::create_dir(&dir).unwrap();
    dir
}

#[test]
fn validate_run_exits_zero_with_csv_and_manifest() {
    let root = tempdir();
    let cfg = root.path().join("cfg.json");
    write_validate_config(&cfg, 17);
    let out = out_dir(&root, "run");

    let result = run(mhk().args(["validate", "--config"]).arg(&cfg).arg("--out").arg(&out));
    assert!(result.status.success(), "stderr: {}", stderr_of(&result));

    let csv = fs::read_to_string(out.join("validate.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("family,epsilon,p_hat,ci_low,ci_high,bound,verdict")
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4, "one row per grid point");
    assert!(rows.iter().all(|r| r.starts_with("time_indep,") && r.ends_with(",PASS")));

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["experiment"], "validate");
    assert_eq!(manifest["seed"], 17);
    assert_eq!(manifest["verdict"], "PASS");
    assert_eq!(manifest["outputs"], serde_json::json!(["validate.csv"]));
    let hash = format!("{:x}", Sha256::digest(fs::read(&cfg).unwrap()));
    assert_eq!(manifest["config_sha256"], serde_json::Value::String(hash));
}

#[test]
fn refuted_bound_exits_one() {
    // An independence-strength bound declared for a strongly dependent
    // chain: at n = 2000 the empirical interval sits far above it.
    let root = tempdir();
    let cfg = root.path().join("cfg.json");
    let cfg_json = serde_json::json!({
        "schema_version": "1",
        "experiment": "validate",
        "seed": 11,
        "validate": {
            "chain": { "kind": "two_state_reference" },
            "observable": { "kind": "indicator", "index": 0 },
            "n": 2000,
            "trials": 2000,
            "eps": [0.05],
            "start": { "kind": "stationary" },
            "specs": [{
                "family": "iid_hoeffding",
                "n": 2000,
                "eps": [0.05],
                "span_list": vec![1.0; 2000]
            }]
        }
    });
    fs::write(&cfg, serde_json::to_string(&cfg_json).unwrap()).unwrap();
    let out = out_dir(&root, "run");

    let result = run(mhk().args(["validate", "--config"]).arg(&cfg).arg("--out").arg(&out));
    assert_eq!(result.status.code(), Some(1), "stderr: {}", stderr_of(&result));

    let csv = fs::read_to_string(out.join("validate.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().ends_with(",FAIL"));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["verdict"], "FAIL");
}

#[test]
fn malformed_configs_exit_two_with_diagnostics() {
    let root = tempdir();
    let out = out_dir(&root, "run");

    // Missing required key.
    let missing = root.path().join("missing.json");
    let mut cfg: serde_json::Value = {
        let tmp = root.path().join("base.json");
        write_validate_config(&tmp, 1);
        serde_json::from_str(&fs::read_to_string(tmp).unwrap()).unwrap()
    };
    cfg["validate"].as_object_mut().unwrap().remove("trials");
    fs::write(&missing, serde_json::to_string(&cfg).unwrap()).unwrap();
    let result = run(mhk().args(["validate", "--config"]).arg(&missing).arg("--out").arg(&out));
    assert_eq!(result.status.code(), Some(2));
    assert!(stderr_of(&result).contains("trials"), "stderr: {}", stderr_of(&result));

    // Unknown key.
    let unknown = root.path().join("unknown.json");
    cfg["validate"]["trials"] = serde_json::json!(1000);
    cfg["validate"]["typo_key"] = serde_json::json!(3);
    fs::write(&unknown, serde_json::to_string(&cfg).unwrap()).unwrap();
    let result = run(mhk().args(["validate", "--config"]).arg(&unknown).arg("--out").arg(&out));
    assert_eq!(result.status.code(), Some(2));
    assert!(stderr_of(&result).contains("typo_key"), "stderr: {}", stderr_of(&result));

    // Subcommand/experiment mismatch.
    let good = root.path().join("good.json");
    write_validate_config(&good, 1);
    let result = run(mhk().args(["simulate", "--config"]).arg(&good).arg("--out").arg(&out));
    assert_eq!(result.status.code(), Some(2));
    assert!(stderr_of(&result).contains("validate"), "stderr: {}", stderr_of(&result));
}

#[test]
fn seed_override_changes_outputs_deterministically() {
    let root = tempdir();
    let cfg = root.path().join("cfg.json");
    write_validate_config(&cfg, 17);
    let (a, b, c) = (out_dir(&root, "a"), out_dir(&root, "b"), out_dir(&root, "c"));

    let result = run(mhk().args(["validate", "--config"]).arg(&cfg).arg("--out").arg(&a));
    assert!(result.status.success());
    let result = run(mhk().args(["validate", "--config"]).arg(&cfg).arg("--out").arg(&b));
    assert!(result.status.success());
    let result = run(mhk()
        .args(["validate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&c)
        .args(["--seed", "99"]));
    assert!(result.status.success());

    let (csv_a, csv_b, csv_c) = (
        fs::read(a.join("validate.csv")).unwrap(),
        fs::read(b.join("validate.csv")).unwrap(),
        fs::read(c.join("validate.csv")).unwrap(),
    );
    assert_eq!(csv_a, csv_b, "same seed reproduces the CSV byte for byte");
    assert_ne!(csv_a, csv_c, "a different seed moves the estimates");

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(c.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 99);
    assert_eq!(manifest["overrides"]["seed"], 99);
}

#[test]
fn inapplicable_overrides_are_rejected() {
    let root = tempdir();
    let cfg = root.path().join("cfg.json");
    write_validate_config(&cfg, 17);
    let out = out_dir(&root, "run");

    // --horizon has no meaning for validate.
    let result = run(mhk()
        .args(["validate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(["--horizon", "50"]));
    assert_eq!(result.status.code(), Some(2));
    assert!(stderr_of(&result).contains("horizon"), "stderr: {}", stderr_of(&result));

    // --trials below the validation floor.
    let result = run(mhk()
        .args(["validate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(["--trials", "10"]));
    assert_eq!(result.status.code(), Some(2));
    assert!(stderr_of(&result).contains("1000"), "stderr: {}", stderr_of(&result));

    // --trials has no meaning for ipm.
    let ipm_cfg = root.path().join("ipm.json");
    let cfg_json = serde_json::json!({
        "schema_version": "1",
        "experiment": "ipm",
        "seed": 5,
        "ipm": {
            "mu": { "kind": "dirac", "at": 0.0 },
            "nu": { "kind": "dirac", "at": 1.0 },
            "generators": [{ "kind": "tv" }, { "kind": "w1" }]
        }
    });
    fs::write(&ipm_cfg, serde_json::to_string(&cfg_json).unwrap()).unwrap();
    let result = run(mhk()
        .args(["ipm", "--config"])
        .arg(&ipm_cfg)
        .arg("--out")
        .arg(&out)
        .args(["--trials", "50"]));
    assert_eq!(result.status.code(), Some(2));
    assert!(stderr_of(&result).contains("trials"), "stderr: {}", stderr_of(&result));
}

#[test]
fn output_directory_resolution_prefers_flag_over_environment() {
    let root = tempdir();
    let cfg = root.path().join("cfg.json");
    write_validate_config(&cfg, 17);
    let (env_dir, flag_dir) = (out_dir(&root, "env"), out_dir(&root, "flag"));

    // Environment variable alone.
    let result = run(mhk()
        .args(["validate", "--config"])
        .arg(&cfg)
        .env("MHK_OUT_DIR", &env_dir));
    assert!(result.status.success(), "stderr: {}", stderr_of(&result));
    assert!(env_dir.join("validate.csv").exists());

    // The flag wins over the environment.
    let decoy = out_dir(&root, "decoy");
    let result = run(mhk()
        .args(["validate", "--config"])
        .arg(&cfg)
        .env("MHK_OUT_DIR", &decoy)
        .arg("--out")
        .arg(&flag_dir));
    assert!(result.status.success(), "stderr: {}", stderr_of(&result));
    assert!(flag_dir.join("validate.csv").exists());
    assert!(flag_dir.join("manifest.json").exists());
    assert!(!decoy.join("validate.csv").exists());
}
