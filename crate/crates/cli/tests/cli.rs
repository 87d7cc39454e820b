use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn tessfusion(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tessfusion"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_into(dir: &Path) -> Output {
    tessfusion(&[
        "run",
        "--preset",
        "example1-t2",
        "--case",
        "7,9",
        "--sensors",
        "2,3",
        "--mc",
        "40",
        "--horizon",
        "6",
        "--seed",
        "11",
        "--out",
        dir.to_str().unwrap(),
    ])
}

#[test]
fn run_is_byte_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(run_into(a.path()).status.success());
    assert!(run_into(b.path()).status.success());
    for name in ["example1-t2.csv", "example1-t2_components.csv"] {
        let x = fs::read(a.path().join(name)).unwrap();
        let y = fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs between runs");
        assert!(!x.contains(&b'\r'));
    }
}

#[test]
fn run_writes_t_major_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_into(dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("example1-t2.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,case,R,analytic_var,mc_var,mc_stderr,quaternion_var,diff,runtime_s"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    // 6 times × 2 cases × 2 sensor counts
    assert_eq!(rows.len(), 24);
    let ts: Vec<usize> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(ts.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(&rows[0][..3], &["1", "7", "2"]);
    assert_eq!(&rows[3][..3], &["1", "9", "3"]);
}

#[test]
fn validate_reports_properness() {
    let out = tessfusion(&["validate", "--preset", "example1-t2", "--case", "8"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("T2-properness: PASS"));
    assert!(!text.contains("T1-properness"));

    let out = tessfusion(&["validate", "--preset", "example1-t2", "--case", "8", "--k", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stdout).unwrap().contains("T1-properness: FAIL"));
}

#[test]
fn validate_reads_system_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sys.toml");
    fs::write(
        &path,
        r#"
n = 1
horizon = 5
f1 = [[[0.9, 0.0, 0.0, 0.0]]]
q = [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]]
p0 = [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]]
p = [[0.7, 0.7, 0.7, 0.7]]

[[sensor]]
r = [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]]
"#,
    )
    .unwrap();
    let out = tessfusion(&["validate", "--config", path.to_str().unwrap()]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{text}{}", String::from_utf8_lossy(&out.stderr));
    assert!(text.contains("T1-properness: PASS"));
    assert!(text.contains("T2-properness: PASS"));
}

#[test]
fn bad_case_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = tessfusion(&[
        "run",
        "--preset",
        "example2",
        "--case",
        "3",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("case 3"));

    let out = tessfusion(&["run", "--preset", "example2", "--case", "x"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid case"));
}

#[test]
fn bench_writes_timing_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = tessfusion(&[
        "bench",
        "--sensors",
        "2",
        "--horizon",
        "10",
        "--repetitions",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("timing.csv")).unwrap();
    assert!(text.starts_with("R,horizon,tk_runtime_s,real_runtime_s,ratio,max_estimate_diff\n"));
    assert_eq!(text.lines().count(), 2);
}
