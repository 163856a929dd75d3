use std::path::Path;
use std::process::{Command, Output};

fn ipmagnus(args: &[&str], envs: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ipmagnus"));
    cmd.args(args).env_remove("MAGNUS_OUT");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn verify_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = ipmagnus(&["verify", "--out-dir", dir.path().to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(dir.path().join("verify_report.txt")).unwrap();
    assert!(report.ends_with("overall: PASS\n"));
    assert!(report.contains("pull-out identity"));
}

#[test]
fn small_local_run_emits_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = ipmagnus(
        &["magnus-local", "--n", "16", "--dt", "0.4,0.2,0.1", "--quad", "64,32", "--out-dir", dir.path().to_str().unwrap()],
        &[],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let csv = std::fs::read_to_string(dir.path().join("magnus_local.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 6);
    assert!(rows[0].starts_with("magnus_local,1,16,"));
    assert!(rows[5].starts_with("magnus_local,2,16,"));
    let svg = std::fs::read_to_string(dir.path().join("magnus_local.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert!(stdout(&out).contains("PASS"));
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = ipmagnus(
        &["comm-scaling", "--layers", "2", "--grids", "16", "--h", "0.5,0.25", "--labels", "3"],
        &[("MAGNUS_OUT", dir.path())],
    );
    assert!(matches!(out.status.code(), Some(0 | 4)));
    assert!(dir.path().join("commscaling.csv").exists());
}

#[test]
fn configuration_errors_exit_2() {
    for args in [
        vec!["magnus-local", "--bogus", "1"],
        vec!["magnus-local", "--dt", "0.1,0.2"],
        vec!["comm-scaling", "--layers", "7"],
        vec!["no-such-command"],
    ] {
        let out = ipmagnus(&args, &[]);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    }
}

#[test]
fn work_budget_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = ipmagnus(
        &["comm-scaling", "--layers", "4", "--bracketing", "all-trees", "--out-dir", dir.path().to_str().unwrap()],
        &[],
    );
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unwritable_out_dir_exit_5() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let target = blocker.join("sub");
    let out = ipmagnus(&["verify", "--out-dir", target.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn help_lists_subcommands_and_keys() {
    let top = ipmagnus(&["--help"], &[]);
    assert_eq!(top.status.code(), Some(0));
    for sub in ["comm-scaling", "magnus-local", "magnus-global", "verify"] {
        assert!(stdout(&top).contains(sub));
    }
    let local = ipmagnus(&["magnus-local", "--help"], &[]);
    assert!(stdout(&local).contains("--quad"));
}
