//! Exit codes and file outputs of the `trafficseg` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn trafficseg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trafficseg")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn generate(dir: &Path, frames: &str) {
    let o = trafficseg(&["generate", "--preset", "default", "--frames", frames, "--out", s(dir)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(code(&trafficseg(&[])), 1);
    assert_eq!(code(&trafficseg(&["run", "--method", "mog", "--input", "."])), 1);
    assert_eq!(code(&trafficseg(&["run", "--method", "mog-incremental", "--input", ".", "--order", "sideways"])), 1);
    assert_eq!(code(&trafficseg(&["generate", "--out", "x"])), 1);
    assert_eq!(code(&trafficseg(&["--help"])), 0);

    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), "3");
    let run = |extra: &[&str]| {
        let mut args = vec!["run", "--input", s(dir.path())];
        args.extend_from_slice(extra);
        code(&trafficseg(&args))
    };
    assert_eq!(run(&["--method", "mog-batch", "--resume", "nowhere.tsmb"]), 1);
    assert_eq!(run(&["--method", "mog-incremental", "--selective-update"]), 1);
    assert_eq!(run(&["--method", "mog-incremental", "--color-mode", "rgb"]), 1);
    assert_eq!(run(&["--method", "baseline-exponential", "--alpha", "1.5"]), 1);
    assert_eq!(run(&["--method", "mog-incremental", "--checkpoint-every", "2"]), 1);
}

#[test]
fn run_inspect_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("scene");
    generate(&input, "20");
    let ckpt = dir.path().join("ckpt");
    let metrics = dir.path().join("m.csv");
    let o = trafficseg(&[
        "run",
        "--method",
        "mog-incremental",
        "--input",
        s(&input),
        "--truth",
        s(&input),
        "--k",
        "10",
        "--seed",
        "3",
        "--out-masks",
        s(&dir.path().join("masks")),
        "--out-shadowfree",
        s(&dir.path().join("clean")),
        "--out-metrics",
        s(&metrics),
        "--out-checkpoints",
        s(&ckpt),
        "--checkpoint-every",
        "10",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_dir(dir.path().join("masks")).unwrap().count(), 20);
    assert_eq!(fs::read_dir(dir.path().join("clean")).unwrap().count(), 20);
    assert!(ckpt.join("checkpoint_000010.tsmb").exists());
    let text = fs::read_to_string(&metrics).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 21);
    assert!(text.contains("# frames,20"));

    let final_bank = ckpt.join("final.tsmb");
    let o = trafficseg(&["inspect", "--checkpoint", s(&final_bank), "--x", "5", "--y", "5"]);
    assert_eq!(code(&o), 0);
    let shown = String::from_utf8(o.stdout).unwrap();
    assert!(shown.contains("after 20 frames") && shown.contains("-> shadow"), "{shown}");
    let o = trafficseg(&["inspect", "--checkpoint", s(&final_bank), "--x", "5", "--y", "5", "--csv"]);
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 4);
    assert_eq!(code(&trafficseg(&["inspect", "--checkpoint", s(&final_bank), "--x", "64", "--y", "0"])), 1);
    assert_eq!(code(&trafficseg(&["inspect", "--checkpoint", s(&metrics), "--x", "0", "--y", "0"])), 2);

    let cmp = dir.path().join("cmp.csv");
    let o = trafficseg(&[
        "compare",
        "--a-method",
        "mog-incremental",
        "--b-method",
        "baseline-exponential",
        "--selective-update",
        "--input",
        s(&input),
        "--truth",
        s(&input),
        "--out-metrics",
        s(&cmp),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(fs::read_to_string(&cmp).unwrap().lines().count() > 20);
}

#[test]
fn corrupt_frame_exits_2_after_flushing_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("scene");
    generate(&input, "5");
    fs::write(input.join("frame_000004.pgm"), b"P5\n64 48\n255\n\x01\x02").unwrap();
    let metrics = dir.path().join("m.csv");
    let o = trafficseg(&[
        "run",
        "--method",
        "baseline-cumulative",
        "--input",
        s(&input),
        "--out-metrics",
        s(&metrics),
    ]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("frame 4"));
    assert!(fs::read_to_string(metrics).unwrap().contains("# frames,3"));
}
