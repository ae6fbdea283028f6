//! The `covfield` executable: flags, exit codes, files on disk.

use std::fs;
use std::process::Command;

use covfield_cli::verify_manifest;

fn covfield() -> Command {
    Command::new(env!("CARGO_BIN_EXE_covfield"))
}

#[test]
fn kernel_with_defaults_writes_table_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let status = covfield()
        .arg("kernel")
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(
        status.status.success(),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );
    let manifest = verify_manifest(&out).unwrap();
    assert_eq!(manifest.command, "kernel");
    let csv = fs::read_to_string(out.join("kernel.csv")).unwrap();
    assert!(csv.starts_with("u,gamma\n"));
    assert_eq!(csv.lines().count(), 202);
}

#[test]
fn config_file_and_seed_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("fdt.ini");
    fs::write(
        &cfg,
        "family = gaussian-cutoff\nlambda = 0.5\ncutoff = 2\n\n[fdt]\nk = 0, 1\nomega = 1.5, 3\n",
    )
    .unwrap();
    let out = dir.path().join("fdt");
    let status = covfield()
        .args(["fdt", "--seed", "9", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(
        status.status.success(),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );
    let manifest = verify_manifest(&out).unwrap();
    assert_eq!(manifest.seed, 9);
    assert_eq!(
        fs::read_to_string(out.join("fdt.csv"))
            .unwrap()
            .lines()
            .count(),
        5
    );
}

#[test]
fn bad_value_exits_2_with_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.ini");
    fs::write(&cfg, "# comment\nfamily = exp-cutoff\nlambda = -1\n").unwrap();
    let status = covfield()
        .arg("kernel")
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
    let err = String::from_utf8_lossy(&status.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn locked_directory_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join(".covfield.lock"), "").unwrap();
    let status = covfield()
        .arg("kernel")
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(3));
}
