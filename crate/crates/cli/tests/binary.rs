use std::process::Command;

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dunkl-experiments"))
}

#[test]
fn list_presets_prints_one_line_each() {
    let out = cli().arg("list-presets").output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().lines().count() >= 8);
}

#[test]
fn unknown_preset_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli().args(["run", "no-such-preset", "--out"]).arg(dir.path()).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("unknown preset"));
    assert!(!cli().args(["describe", "no-such-preset"]).output().unwrap().status.success());
}

#[test]
fn validate_config_reports_field_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    let text = dunkl_experiments::preset("fsp-dunkl-1d").unwrap().config().to_toml().unwrap().replace("tol = 0.05", "tol = 2.0");
    std::fs::write(&path, text).unwrap();
    let out = cli().arg("validate-config").arg(&path).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("cone.tol"));
}

#[test]
fn run_from_config_with_seed_override() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = dunkl_experiments::preset("transform-k0").unwrap().config();
    cfg.transform.as_mut().unwrap().functions = 3;
    let path = dir.path().join("t.toml");
    std::fs::write(&path, cfg.to_toml().unwrap()).unwrap();
    let out_dir = dir.path().join("out");
    // random bumps are about 1e-11 at the edge of this grid, which strict mode rejects
    let strict = cli().args(["run", "--strict", "--config"]).arg(&path).arg("--out").arg(&out_dir).output().unwrap();
    assert!(!strict.status.success());
    assert!(String::from_utf8(strict.stderr).unwrap().contains("does not decay"));
    let out = cli()
        .args(["run", "--seed", "7", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(&out_dir)
        .env("DUNKL_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("PASS inversion"));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["threads"], 2);
    assert_eq!(manifest["passed"], true);
}
