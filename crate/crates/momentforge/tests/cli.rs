use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use momentforge::cli_io::serialize_data;
use momentforge::fixtures;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_momentforge")).args(args).output().expect("binary runs")
}

fn golden(name: &str) -> String {
    fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)).unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn golden_outputs() {
    for (name, _) in fixtures::all() {
        for (cmd, ext, fmt) in [("reeb", "reeb.json", "json"), ("emit", "emit.txt", "text"), ("fibers", "fibers.txt", "text")]
        {
            let o = run(&[cmd, "--input", name, "--format", fmt]);
            assert_eq!(o.status.code(), Some(0), "{cmd} {name}");
            assert_eq!(stdout(&o), golden(&format!("{name}.{ext}")), "{cmd} {name}");
        }
    }
}

#[test]
fn reeb_from_document() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("annulus.toml");
    fs::write(&path, serialize_data(&fixtures::annulus())).unwrap();
    let o = run(&["reeb", "--input", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["vertices"].as_array().unwrap().len(), 4);
}

#[test]
fn verify_disk_passes() {
    let o = run(&["verify", "--input", "disk", "--samples", "100", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).ends_with("pass\n"));
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let tangent = dir.path().join("tangent.toml");
    fs::write(
        &tangent,
        "[region]\nseed = [0, 0]\n\n[[circles]]\nid = 1\ncenter = [0, 0]\nradius = 1\norientation = \"inside\"\n\n\
         [[circles]]\nid = 2\ncenter = [2, 0]\nradius = 1\norientation = \"outside\"\n\n[maps]\nm_l1_l2 = [1, 2]\nm_l2 = [1, 1]\n",
    )
    .unwrap();
    assert_eq!(run(&["validate", "--input", tangent.to_str().unwrap()]).status.code(), Some(3));
    let missing = dir.path().join("missing.toml");
    fs::write(&missing, serialize_data(&fixtures::annulus()).replace("m_l2 = [1]\n", "")).unwrap();
    let o = run(&["validate", "--input", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("m_l2"));
    assert_eq!(run(&["validate", "--input", "annulus"]).status.code(), Some(0));
    // same center radius 2, both inside: crossings share an x-value
    let generic = dir.path().join("generic.toml");
    fs::write(
        &generic,
        "[region]\nseed = [\"3/2\", 0]\n\n[[circles]]\nid = 1\ncenter = [0, 0]\nradius = 2\norientation = \"inside\"\n\n\
         [[circles]]\nid = 2\ncenter = [3, 0]\nradius = 2\norientation = \"inside\"\n\n[maps]\nm_l1_l2 = [1, 2]\nm_l2 = [1, 1]\n",
    )
    .unwrap();
    let o = run(&["validate", "--input", generic.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("Genericity") || stdout(&o).contains("genericity"), "{}", stdout(&o));
}

#[test]
fn construct_mt6() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("gp.toml");
    let o = run(&["construct", "mt6", "--nprime", "2", "--j1", "1", "--j2", "1", "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.contains("kind = \"mt6\""));
    let o = run(&["reeb", "--input", out.to_str().unwrap(), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["vertices"].as_array().unwrap().len(), 8);
}

#[test]
fn construct_mt2_with_svg() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("f.svg");
    let o = run(&["construct", "mt2", "--input", "annulus", "--alloc", "1:1", "--total-dim", "4", "--svg", svg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}

#[test]
fn render_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.svg");
    let b = dir.path().join("b.svg");
    assert_eq!(run(&["render", "--input", "two_hole", "--svg", a.to_str().unwrap()]).status.code(), Some(0));
    assert_eq!(run(&["render", "--input", "two_hole", "--svg", b.to_str().unwrap()]).status.code(), Some(0));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn demo_writes_every_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_momentforge"))
        .arg("demo")
        .env("MOMENTFORGE_FIXTURES", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    for (name, _) in fixtures::all() {
        for ext in ["toml", "system.txt", "fibers.txt", "reeb.json", "reeb.dot", "svg"] {
            assert!(dir.path().join(format!("{name}.{ext}")).exists(), "{name}.{ext}");
        }
    }
    let json = fs::read_to_string(dir.path().join("annulus.reeb.json")).unwrap();
    assert_eq!(json, golden("annulus.reeb.json"));
}

#[test]
fn bad_arguments_are_invalid_input() {
    assert_eq!(run(&["reeb", "--input", "no_such_fixture"]).status.code(), Some(3));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(3));
}
