use std::fs;
use std::process::Command;

use dit_bench::report::{read_json, CSV_HEADER};

fn bench() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bench"))
}

const SMALL: [&str; 14] = [
    "--env",
    "np",
    "--dim",
    "2",
    "--planner",
    "dit,eit",
    "--runs",
    "3",
    "--budget",
    "0.02",
    "--seed",
    "5",
    "--work-clock",
    "--svg",
];

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        let status = bench()
            .args(SMALL)
            .arg("--out")
            .arg(dir.path())
            .output()
            .unwrap()
            .status;
        assert!(status.success());
    }
    let csv = fs::read(a.path().join("records.csv")).unwrap();
    assert_eq!(csv, fs::read(b.path().join("records.csv")).unwrap());
    assert_eq!(
        fs::read(a.path().join("report.json")).unwrap(),
        fs::read(b.path().join("report.json")).unwrap()
    );

    let text = String::from_utf8(csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 1 + 2 * 3);
    assert!(lines[1..]
        .iter()
        .all(|l| l.split(',').count() == 7 && l.starts_with("np,2,")));

    let report = read_json(&a.path().join("report.json")).unwrap();
    assert_eq!(report.records.len(), 6);
    assert_eq!(report.summaries.len(), 2);
    for r in &report.records {
        assert!(r.seed >= 5 && r.seed < 8);
    }
    for p in ["dit", "eit"] {
        let svg = fs::read_to_string(a.path().join(format!("np-2d-{p}.svg"))).unwrap();
        assert!(svg.starts_with("<svg") && svg.contains("class=\"obstacle\""));
    }
}

#[test]
fn configuration_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let cases: [&[&str]; 4] = [
        &["--env", "np", "--dim", "4", "--runs", "0", "--out", out],
        &["--env", "np", "--dim", "5", "--out", out],
        &["--env", "maze", "--out", out],
        &["--env", "np", "--dim", "4", "--budget=-1", "--out", out],
    ];
    for args in cases {
        let status = bench().args(args).output().unwrap().status;
        assert_eq!(status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn rrtconnect_runs_from_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let status = bench()
        .args([
            "--env",
            "rr",
            "--dim",
            "2",
            "--planner",
            "rrtconnect",
            "--runs",
            "1",
        ])
        .args(["--budget", "0.05", "--work-clock", "--out"])
        .arg(dir.path())
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    let csv = fs::read_to_string(dir.path().join("records.csv")).unwrap();
    // one run per random-rectangle instance
    assert_eq!(csv.lines().count(), 1 + 10);
    assert!(csv
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("rr-i0,2,rrtconnect,0,"));
}
