use std::path::PathBuf;
use std::process::{Command, Output};

use cmctime::scenario::Scenario;
use cmctime::{evaluate, Overrides};

const WEDGE: &str = r#"{
  "dimension": 3,
  "planes": [{"u": [3, 0], "a": 0}, {"u": [-1, 0], "a": 0}],
  "grid": {"box_half_width": 1.0, "delta": 0.05},
  "tasks": [{"command": "level", "a": 2.0}],
  "seed": 4
}"#;

struct Sandbox(PathBuf);

impl Sandbox {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("cmctime-cli-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        Sandbox(dir)
    }

    fn scenario(&self, name: &str, text: &str) -> PathBuf {
        let p = self.0.join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_cmctime"))
            .args(args)
            .arg("--out")
            .arg(self.0.join("out"))
            .output()
            .unwrap()
    }
}

impl Drop for Sandbox {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

#[test]
fn validate_echoes_normalized_planes() {
    let sb = Sandbox::new("validate");
    let path = sb.scenario("wedge.json", WEDGE);
    let out = sb.run(&["validate", path.to_str().unwrap(), "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let planes = report["scenario"]["planes"].as_array().unwrap();
    assert_eq!(planes.len(), 2);
    assert_eq!(planes[0]["u"][0].to_string(), "1.0000000000000000e+0");
    assert_eq!(report["pass"], true);
    assert!(sb.0.join("out/validate.json").exists());
}

#[test]
fn one_plane_is_not_regular() {
    let sb = Sandbox::new("one");
    let path = sb.scenario(
        "one.json",
        r#"{"dimension": 3, "planes": [{"u": [1, 0], "a": 0}], "grid": {"box_half_width": 1, "delta": 0.1}}"#,
    );
    let out = sb.run(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(
        err.contains("not regular: Λ must contain at least two elements"),
        "{err}"
    );
}

#[test]
fn tau_point_query() {
    let sb = Sandbox::new("tau");
    let path = sb.scenario("wedge.json", WEDGE);
    let out = sb.run(&["tau", path.to_str().unwrap(), "--point", "2,1,5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("tau=1.7320508075688772 r=(0,0,5)"), "{text}");
}

#[test]
fn exit_codes() {
    let sb = Sandbox::new("codes");
    let path = sb.scenario("wedge.json", WEDGE);
    let p = path.to_str().unwrap();
    // outside the domain
    assert_eq!(sb.run(&["tau", p, "--point", "0,1,0"]).status.code(), Some(2));
    // c must be negative
    assert_eq!(sb.run(&["cmc-solve", p, "--c", "0.5"]).status.code(), Some(2));
    // 4-dimensional singularity complex is unsupported
    let w4 = sb.scenario(
        "w4.json",
        r#"{"dimension": 4, "planes": [{"u": [1, 0, 0], "a": 0}, {"u": [-1, 0, 0], "a": 0}], "grid": {"box_half_width": 0.5, "delta": 0.0625}}"#,
    );
    assert_eq!(sb.run(&["singularity", w4.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(sb.run(&["validate", "/nonexistent.json"]).status.code(), Some(2));
}

#[test]
fn level_task_parameters_and_overrides() {
    let s = Scenario::parse(WEDGE).unwrap();
    let e = evaluate("level", &s, &Overrides::default());
    assert_eq!(e.exit_code, 0);
    let csv = String::from_utf8(e.artifacts[0].bytes.clone()).unwrap();
    let mut lines = csv.lines();
    lines.next();
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    // first node (−1, −1) of S_2: t = √(4 + 1)
    assert!((row[row.len() - 1] - 5f64.sqrt()).abs() < 1e-12, "{row:?}");
    let ov = Overrides {
        a: Some(0.5),
        delta: Some(0.1),
        ..Overrides::default()
    };
    let e = evaluate("level", &s, &ov);
    assert_eq!(e.report["tasks"][0]["summary"]["nodes"], 441);
}

#[test]
fn reports_are_reproducible() {
    let s = Scenario::parse(WEDGE).unwrap();
    let a = evaluate("verify-all", &s, &Overrides::default());
    let b = evaluate("verify-all", &s, &Overrides::default());
    assert_eq!(a.exit_code, 0, "{}", a.report);
    assert_eq!(a.report_bytes(), b.report_bytes());
    assert_eq!(a.artifacts, b.artifacts);
}
