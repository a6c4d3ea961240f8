use std::process::{Command, Output};

const DISK: &str = r#"{"type":"ball","dim":2}"#;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hilbert-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn distance_prints_a_scalar() {
    let q = format!("{},0", 1f64.tanh());
    let o = run(&["distance", "--body", DISK, "--p", "0,0", "--q", &q]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "1.000000");
}

#[test]
fn json_reports_carry_config_and_results() {
    let o = run(&[
        "distance", "--body", DISK, "--p", "0,0", "--q", "0.5,0", "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["command"], "distance");
    assert_eq!(v["pass"], true);
    assert_eq!(v["config"]["common"]["seed"], 42);
    assert!(v["results"].is_object());
}

#[test]
fn points_outside_the_domain_exit_with_2() {
    let o = run(&["distance", "--body", DISK, "--p", "0,0", "--q", "2,0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}

#[test]
fn malformed_bodies_exit_with_2() {
    for body in [r#"{"type":"bogus"}"#, "{not json", "/nonexistent/body.json"] {
        let o = run(&["distance", "--body", body, "--p", "0,0", "--q", "0,0"]);
        assert_eq!(o.status.code(), Some(2), "{body}");
    }
}

#[test]
fn wrong_point_dimension_exits_with_2() {
    let o = run(&["distance", "--body", DISK, "--p", "0,0,0", "--q", "0,0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_thread_count_exits_with_2() {
    let o = Command::new(env!("CARGO_BIN_EXE_hilbert-lab"))
        .args(["distance", "--body", DISK, "--p", "0,0", "--q", "0,0"])
        .env("HILBERT_LAB_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_and_svg_files_are_written() {
    let dir = std::env::temp_dir().join(format!("hilbert-lab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let report = dir.join("ball.json");
    let picture = dir.join("ball.svg");
    let o = run(&[
        "ball",
        "--body",
        DISK,
        "--p",
        "0.2,0",
        "--format",
        "json",
        "--output",
        report.to_str().unwrap(),
        "--svg",
        picture.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(o.stdout.is_empty());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["command"], "ball");
    assert!(std::fs::read_to_string(&picture).unwrap().contains("<svg"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn body_files_are_accepted() {
    let path = std::env::temp_dir().join(format!("hilbert-lab-square-{}.json", std::process::id()));
    std::fs::write(
        &path,
        r#"{"type":"hpolytope","A":[[1,0],[-1,0],[0,1],[0,-1]],"b":[1,1,1,1]}"#,
    )
    .unwrap();
    let o = run(&[
        "norm",
        "--body",
        path.to_str().unwrap(),
        "--p",
        "0,0",
        "--v",
        "1,0",
    ]);
    std::fs::remove_file(&path).unwrap();
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let norm: f64 = stdout(&o).trim().parse().unwrap();
    assert!((norm - 1.0).abs() < 1e-6);
}
