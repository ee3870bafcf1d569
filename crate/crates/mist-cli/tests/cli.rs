use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mist(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mist")).current_dir(dir).env("MIST_THREADS", "2").args(args).output().unwrap()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = mist(tmp.path(), &["chirikov", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn calibration_with_unit_shift_gives_one_photon() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("stark.csv"), "power,delta_omega_GHz\n1.0,-0.002\n3.0,-0.006\n").unwrap();
    let o = mist(tmp.path(), &["calib", "--stark", "stark.csv", "--chi", "-0.001", "--out", "cal"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = tmp.path().join("cal");
    let c: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("calibration.json")).unwrap()).unwrap();
    assert!((c["n_bar"][0].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert!((c["slope_photons_per_power_unit"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    let m = manifest(&out);
    assert!(m["error"].is_null());
    assert_eq!(m["command"], "calib");
    assert_eq!(m["threads"], 2);
}

#[test]
fn failed_run_still_writes_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let o = mist(tmp.path(), &["calib", "--stark", "missing.csv", "--out", "bad"]);
    assert_eq!(o.status.code(), Some(1));
    let m = manifest(&tmp.path().join("bad"));
    assert!(m["error"].as_str().unwrap().contains("missing.csv"));
}

#[test]
fn bad_params_file_is_reported_in_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("p.toml"), "E_J = -1.0\n").unwrap();
    let o = mist(tmp.path(), &["chirikov", "--params", "p.toml", "--out", "bad"]);
    assert_eq!(o.status.code(), Some(1));
    let m = manifest(&tmp.path().join("bad"));
    assert!(m["error"].as_str().unwrap().contains("p.toml"));
    assert!(m["params"].is_null());
}

#[test]
fn existing_directory_needs_overwrite() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["chirikov", "--samples", "11", "--out", "c"];
    assert!(mist(tmp.path(), &args).status.success());
    fs::write(tmp.path().join("c/marker"), "x").unwrap();
    let o = mist(tmp.path(), &args);
    assert_eq!(o.status.code(), Some(1));
    assert!(tmp.path().join("c/marker").exists());

    let mut with = args.to_vec();
    with.push("--overwrite");
    assert!(mist(tmp.path(), &with).status.success());
    assert!(!tmp.path().join("c/marker").exists());
    assert!(tmp.path().join("c/chirikov.csv").exists());
    let leftovers: Vec<_> = fs::read_dir(tmp.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().starts_with('.'))
        .collect();
    assert!(leftovers.is_empty());
}

#[test]
fn same_seed_gives_identical_files() {
    let tmp = tempfile::tempdir().unwrap();
    for dir in ["a", "b"] {
        let o = mist(tmp.path(), &["readout", "--shots", "200", "--seed", "11", "--out", dir]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["iq.csv", "labels.csv", "pointers.csv", "confusion.json"] {
        let a = fs::read(tmp.path().join("a").join(f)).unwrap();
        let b = fs::read(tmp.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
    let o = mist(tmp.path(), &["readout", "--shots", "200", "--seed", "12", "--out", "c"]);
    assert!(o.status.success());
    assert_ne!(fs::read(tmp.path().join("a/iq.csv")).unwrap(), fs::read(tmp.path().join("c/iq.csv")).unwrap());
}

#[test]
fn branches_reports_flux_activated_crossing() {
    let tmp = tempfile::tempdir().unwrap();
    let o = mist(tmp.path(), &["branches", "--flux", "-0.04", "--pairs", "1-5", "--out", "br"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let events: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("br/crossings.json")).unwrap()).unwrap();
    assert!(!events.as_array().unwrap().is_empty());
    let csv = fs::read_to_string(tmp.path().join("br/branches.csv")).unwrap();
    assert!(csv.lines().count() > 100);
}
