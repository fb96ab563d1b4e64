use std::process::Command;

fn csd() -> Command {
    Command::new(env!("CARGO_BIN_EXE_csd"))
}

#[test]
fn rejects_bad_thread_count() {
    let out = csd().args(["bits", "--n", "7", "--m", "3"]).env("CSD_THREADS", "0").output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("CSD_THREADS"));
}

#[test]
fn unknown_construction_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = csd()
        .args(["gen-oa", "--construction", "magic", "--out", "x.oa"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown construction"));
}

#[test]
fn non_prime_mub_dimension_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = csd()
        .args(["gen-mub", "--n", "9", "--out", "m.csdm"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn failed_verification_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| csd().args(args).current_dir(dir.path()).output().unwrap();
    assert!(run(&["gen-oa", "--construction", "parity16", "--out", "p.oa"]).status.success());
    let out = run(&["verify", "--file", "p.oa", "--strength", "5"]);
    assert_eq!(out.status.code(), Some(3));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("passed = false"));
    assert!(text.contains("witness_columns = 0 1 2 3 4"));
}

#[test]
fn bit_table_output() {
    let out = csd().args(["bits", "--n", "1021", "--m", "255", "--kinds", "alltop,bernoulli"]).output().unwrap();
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8_lossy(&out.stdout),
        "kind,n,m,population,bits_per_row,bits\nalltop,1021,255,1042441,20,5100\nbernoulli,1021,255,inf,1021,260355\n"
    );
}
