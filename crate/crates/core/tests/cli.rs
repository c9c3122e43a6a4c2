use std::fs;
use std::path::Path;
use std::process::Command;

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wavefront-scope"))
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

const HEAVISIDE: &str = r#"{
  "name": "jump",
  "distribution": "heaviside@0",
  "dim": 1,
  "grid": {"log2_points": 16},
  "schedule": {"count": 15},
  "region": {"points": [[0.0], [1.0]]}
}"#;

fn run(cfg: &Path, out: &Path, assert: bool) -> std::process::Output {
    let mut c = bin();
    c.arg("run")
        .arg(cfg)
        .arg("--out")
        .arg(out)
        .env("WFS_THREADS", "2");
    if assert {
        c.arg("--assert");
    }
    c.output().unwrap()
}

#[test]
fn run_writes_deterministic_artifacts() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.json", HEAVISIDE);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let o = run(&cfg, &a, true);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert_eq!(run(&cfg, &b, false).status.code(), Some(0));
    let ra = fs::read(a.join("report.json")).unwrap();
    assert_eq!(ra, fs::read(b.join("report.json")).unwrap());
    assert!(a.join("timings.json").exists());

    let report: serde_json::Value = serde_json::from_slice(&ra).unwrap();
    let probes = report["probes"].as_array().unwrap();
    assert_eq!(probes.len(), 4);
    assert_eq!(probes[0]["decay"]["classification"], "SINGULAR");
    assert_eq!(probes[2]["decay"]["classification"], "REGULAR");

    let mut rdr = csv::Reader::from_path(a.join("probes.csv")).unwrap();
    assert_eq!(rdr.records().count(), 2 * 2);
}

#[test]
fn validation_errors_exit_1() {
    let tmp = TempDir::new().unwrap();
    let bad_key = write(
        tmp.path(),
        "k.json",
        &HEAVISIDE.replace("\"dim\": 1", "\"dim\": 1, \"bogus\": 3"),
    );
    assert_eq!(run(&bad_key, tmp.path(), false).status.code(), Some(1));
    let bad_window = write(
        tmp.path(),
        "w.json",
        &HEAVISIDE.replace("\"dim\": 1", "\"dim\": 1, \"windows\": [\"nope\"]"),
    );
    assert_eq!(run(&bad_window, tmp.path(), false).status.code(), Some(1));
    assert_eq!(
        run(&tmp.path().join("missing.json"), tmp.path(), false)
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn empty_schedule_exits_2() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "e.json",
        &HEAVISIDE.replace("\"count\": 15", "\"count\": 0"),
    );
    assert_eq!(run(&cfg, tmp.path(), false).status.code(), Some(2));
}

#[test]
fn failed_assertion_exits_3() {
    let tmp = TempDir::new().unwrap();
    // an impossibly tight tolerance on the critical exponent
    let cfg = write(
        tmp.path(),
        "t.json",
        &HEAVISIDE.replace(
            "\"dim\": 1",
            "\"dim\": 1, \"assert\": {\"s_tolerance\": 1e-9}",
        ),
    );
    assert_eq!(run(&cfg, tmp.path(), false).status.code(), Some(0));
    assert_eq!(run(&cfg, tmp.path(), true).status.code(), Some(3));
}

#[test]
fn halfplane_map_writes_pgm() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "h.json",
        r#"{
  "distribution": "halfplane,nu=(1,0),c=0",
  "dim": 2,
  "grid": {"log2_points": 9},
  "schedule": {"count": 9},
  "region": {"points": [[0.0, 0.0]], "directions": [[1.0, 0.0], [0.0, 1.0]]},
  "oracle": {"enabled": false},
  "map": {"direction": [1.0, 0.0], "half_extent": 0.5, "size": 4}
}"#,
    );
    let o = run(&cfg, tmp.path(), false);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let pgm = fs::read(tmp.path().join("map.pgm")).unwrap();
    let head = b"P5\n4 4\n255\n";
    assert_eq!(&pgm[..head.len()], head);
    assert_eq!(pgm.len(), head.len() + 16);
}

#[test]
fn list_catalog_succeeds() {
    let o = bin().arg("list-catalog").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("heaviside"));
}

#[test]
fn bundled_configs_validate() {
    use wavefront_scope::par::Exec;
    use wavefront_scope::scenario::{prepare, ScenarioConfig};
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        let cfg = ScenarioConfig::load(&p).unwrap();
        assert!(prepare(cfg, Exec::Sequential).is_ok(), "{}", p.display());
        n += 1;
    }
    assert!(n >= 4);
}
