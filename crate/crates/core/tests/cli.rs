use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus").join(name)
}

fn mungo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mungo")).args(args).env_remove("MUNGO_MAX_STEPS").output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_exit_codes() {
    let ok = mungo(&["check", path(&corpus("filereader.mungo"))]);
    assert_eq!(code(&ok), 0, "{}", stderr(&ok));
    assert!(stdout(&ok).contains("accepted"));

    let rejected = mungo(&["check", path(&corpus("filereader_reopen.mungo"))]);
    assert_eq!(code(&rejected), 1);
    assert!(stderr(&rejected).contains("FieldMisused"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.mungo");
    fs::write(&bad, "class {").unwrap();
    assert_eq!(code(&mungo(&["check", path(&bad)])), 2);
    assert_eq!(code(&mungo(&["check", path(&dir.path().join("missing.mungo"))])), 2);
}

#[test]
fn check_json_emits_one_record_per_diagnostic() {
    let out = mungo(&["check", "--json", path(&corpus("filereader_drop_init.mungo"))]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert!(!text.trim().is_empty());
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).expect("json line");
        assert_eq!(v["code"], "FieldNotAvailable");
    }
}

#[test]
fn run_exit_codes_and_trace() {
    let ok = mungo(&["run", path(&corpus("door.mungo")), "--trace"]);
    assert_eq!(code(&ok), 0);
    let text = stdout(&ok);
    assert!(text.lines().next().unwrap().starts_with("step 1: "));
    assert!(text.contains("Terminal"));

    let stuck = mungo(&["run", path(&corpus("null_call.mungo"))]);
    assert_eq!(code(&stuck), 3);
    assert!(stderr(&stuck).contains("runtime-error: NullCall1"), "{}", stderr(&stuck));

    let budget = mungo(&["run", "--max-steps", "50", path(&corpus("infinite_loop.mungo"))]);
    assert_eq!(code(&budget), 4);
    assert_eq!(code(&mungo(&["run", "--max-steps", "0", path(&corpus("door.mungo"))])), 2);
}

#[test]
fn trace_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.txt");
    let out = mungo(&["run", &format!("--trace={}", path(&trace)), path(&corpus("filereader.mungo"))]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(&trace).unwrap();
    assert_eq!(text.lines().next(), Some("step 1: SeqC>FldC>New | seq | heap=2"));
}

#[test]
fn max_steps_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_mungo"))
        .args(["run", path(&corpus("infinite_loop.mungo"))])
        .env("MUNGO_MAX_STEPS", "20")
        .output()
        .unwrap();
    assert_eq!(code(&out), 4);
}

#[test]
fn verify_exit_codes() {
    let ok = mungo(&["verify", "--wtc-every-step", path(&corpus("handoff.mungo"))]);
    assert_eq!(code(&ok), 0, "{}", stderr(&ok));
    assert!(stdout(&ok).contains("monitor hits: 0"));
    assert_eq!(code(&mungo(&["verify", path(&corpus("leak_local.mungo"))])), 1);
    assert_eq!(code(&mungo(&["verify", "--max-steps", "3", path(&corpus("filereader.mungo"))])), 4);
}

#[test]
fn corpus_command() {
    let out = mungo(&["corpus", path(corpus("").parent().unwrap())]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));

    let dir = tempfile::tempdir().unwrap();
    let empty = mungo(&["corpus", path(dir.path())]);
    assert_eq!(code(&empty), 0);
    assert!(stdout(&empty).contains("0 cases"));

    fs::copy(corpus("door.mungo"), dir.path().join("door.mungo")).unwrap();
    fs::write(dir.path().join("door.expect"), "reject FieldMisused\n").unwrap();
    let stale = mungo(&["corpus", path(dir.path())]);
    assert_eq!(code(&stale), 1);

    assert_eq!(code(&mungo(&["corpus", path(&dir.path().join("nope"))])), 2);
}

#[test]
fn lts_command() {
    let out = mungo(&["lts", path(&corpus("filereader.mungo")), "--class", "File"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("--call:open-->"));
    let dot = mungo(&["lts", "--dot", path(&corpus("filereader.mungo")), "--class", "File"]);
    assert!(stdout(&dot).starts_with("digraph"));
    assert_eq!(code(&mungo(&["lts", path(&corpus("filereader.mungo")), "--class", "Nope"])), 1);
}
