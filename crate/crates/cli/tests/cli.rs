use std::path::Path;
use std::process::{Command, Output};

fn verne(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_verne")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn reference_config() -> String {
    std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data/g0.conf")).unwrap()
}

fn small_workspace(dir: &Path, name: &str, tool: &str) -> (Output, String) {
    let prefix = dir.join(name);
    let out = verne(&[
        "workspace",
        "--out",
        prefix.to_str().unwrap(),
        "--tool",
        tool,
        "--z-steps",
        "21",
        "--alpha-steps",
        "41",
        "--arc-samples",
        "96",
        "--resolution",
        "40",
    ]);
    (out, prefix.to_str().unwrap().to_string())
}

fn volume_of(out: &Output) -> f64 {
    let text = stdout(out);
    let line = text.lines().find(|l| l.starts_with("volume = ")).expect("volume line");
    line["volume = ".len()..].split_whitespace().next().unwrap().parse().unwrap()
}

#[test]
fn check_reference_machine() {
    let out = verne(&["check"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("alpha_1 = 0.927295218002"));
    assert!(text.contains("valid"));
}

#[test]
fn tilt_forbidding_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.conf");
    let text = reference_config();
    let patched: String = text
        .lines()
        .map(|l| if l.trim_start().starts_with("r1") { "r1 = 0.25".to_string() } else { l.to_string() })
        .collect::<Vec<_>>()
        .join("\n");
    assert_ne!(patched, text, "reference config carries an r1 line");
    std::fs::write(&path, patched).unwrap();
    let out = verne(&["check", "--config", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("r1/R1"), "{err}");
}

#[test]
fn missing_config_is_an_io_failure() {
    let out = verne(&["check", "--config", "/nonexistent/machine.conf"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(code(&verne(&["check", "--bogus"])), 2);
    assert_eq!(code(&verne(&["check", "--tool", "-1"])), 2);
}

#[test]
fn ik_accepts_reachable_point_and_negative_coordinates() {
    assert_eq!(code(&verne(&["ik", "0.3", "0.05", "1.1"])), 0);
    assert_eq!(code(&verne(&["ik", "0.3", "-0.05", "1.1"])), 0);
}

#[test]
fn ik_rejections() {
    // outside every coupling ellipse
    assert_eq!(code(&verne(&["ik", "5", "0", "1.1"])), 3);
    // a solved pose with the sign of y flipped but the tilt kept
    let solved = stdout(&verne(&["ik", "0.3", "0.05", "1.1"]));
    let alpha = solved.lines().next().unwrap().trim_start_matches("alpha = ").to_string();
    assert_eq!(code(&verne(&["ik", "0.3", "-0.05", "1.1", "--alpha", &alpha])), 3);
}

#[test]
fn slice_outside_box_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("s");
    assert_eq!(code(&verne(&["slice", "--z", "0.1", "--out", prefix.to_str().unwrap()])), 2);
}

#[test]
fn slice_outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for name in ["a", "b"] {
        let prefix = dir.path().join(name);
        let out = verne(&["slice", "--z", "1.1", "--arc-samples", "128", "--alpha-steps", "61", "--out", prefix.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        assert!(stdout(&out).contains("classification = constant"));
        let svg = std::fs::read(format!("{}.svg", prefix.display())).unwrap();
        let csv = std::fs::read(format!("{}.csv", prefix.display())).unwrap();
        let manifest: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(format!("{}.manifest.json", prefix.display())).unwrap()).unwrap();
        assert_eq!(manifest["command"], "slice");
        files.push((svg, csv));
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn workspace_is_deterministic_and_shrinks_with_tool_length() {
    let dir = tempfile::tempdir().unwrap();
    let (first, p0) = small_workspace(dir.path(), "t0", "0");
    assert_eq!(code(&first), 0, "{}", String::from_utf8_lossy(&first.stderr));
    let (again, p0b) = small_workspace(dir.path(), "t0b", "0");
    for ext in ["csv", "ply"] {
        let a = std::fs::read(format!("{p0}.{ext}")).unwrap();
        let b = std::fs::read(format!("{p0b}.{ext}")).unwrap();
        assert_eq!(a, b, "{ext} differs between runs");
    }
    let mut volumes = vec![volume_of(&first), volume_of(&again)];
    for (name, tool) in [("t1", "0.05"), ("t2", "0.10")] {
        let (out, _) = small_workspace(dir.path(), name, tool);
        assert_eq!(code(&out), 0);
        volumes.push(volume_of(&out));
    }
    assert_eq!(volumes[0], volumes[1]);
    assert!(volumes[0] > 0.0);
    assert!(volumes[1] >= volumes[2] && volumes[2] >= volumes[3], "{volumes:?}");
}

#[test]
fn validate_small_grid() {
    let out = verne(&["validate", "--nx", "16", "--ny", "16", "--nz", "6", "--alpha-steps", "61", "--arc-samples", "128"]);
    assert_eq!(code(&out), 0, "{}{}", stdout(&out), String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("agreement = "));
    assert_eq!(code(&verne(&["validate", "--nx", "0"])), 2);
    assert_eq!(code(&verne(&["validate", "--nz", "1"])), 2);
}
