use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coarse-lab"))
        .current_dir(dir)
        .env("COARSE_LAB_THREADS", "2")
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn verdict(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is a JSON verdict")
}

fn write(dir: &Path, name: &str, body: &str) {
    fs::write(dir.join(name), body).unwrap();
}

fn shift_map(n: usize, f: impl Fn(usize) -> usize) -> String {
    let pairs: Vec<String> = (0..=n).map(|i| format!("\"{i}\":\"{}\"", f(i))).collect();
    format!(
        r#"{{"source":"gen:zplus:{n}","target":"gen:zplus:{n}","map":{{{}}}}}"#,
        pairs.join(",")
    )
}

#[test]
fn validate_exit_codes() {
    let d = tempfile::tempdir().unwrap();
    write(
        d.path(),
        "ok.json",
        r#"{"points":["a","b","c"],"matrix":[[0,1,2],[1,0,1],[2,1,0]]}"#,
    );
    write(
        d.path(),
        "bad.json",
        r#"{"points":["a","b","c"],"matrix":[[0,1,5],[1,0,1],[5,1,0]]}"#,
    );
    write(d.path(), "broken.json", r#"{"points":["a"],"matrix":"#);
    let ok = run(d.path(), &["validate", "--space", "ok.json"]);
    assert_eq!(code(&ok), 0);
    assert_eq!(verdict(&ok)["violations"], 0);
    let bad = run(d.path(), &["validate", "--space", "bad.json"]);
    assert_eq!(code(&bad), 1);
    assert!(verdict(&bad)["violations"].as_u64().unwrap() > 0);
    assert_eq!(code(&run(d.path(), &["validate", "--space", "broken.json"])), 2);
    assert_eq!(code(&run(d.path(), &["validate", "--space", "missing.json"])), 2);
    assert_eq!(code(&run(d.path(), &["frobnicate"])), 2);
}

#[test]
fn graph_spaces_validate() {
    let d = tempfile::tempdir().unwrap();
    write(
        d.path(),
        "g.json",
        r#"{"graph":{"vertices":["a","b","c"],"edges":[["a","b",1],["b","c",1]]}}"#,
    );
    let o = run(d.path(), &["validate", "--space", "g.json"]);
    assert_eq!(code(&o), 0);
    write(d.path(), "split.json", r#"{"graph":{"vertices":["a","b"],"edges":[]}}"#);
    assert_eq!(code(&run(d.path(), &["validate", "--space", "split.json"])), 2);
}

#[test]
fn diagonal_product_lists_eleven_pairs() {
    let d = tempfile::tempdir().unwrap();
    let args = [
        "product",
        "build",
        "--left",
        "gen:zplus:10",
        "--p",
        "0",
        "--right",
        "gen:zplus:10",
        "--q",
        "0",
        "--R",
        "0",
        "--out",
        "prod.json",
    ];
    let o = run(d.path(), &args);
    assert_eq!(code(&o), 0);
    assert_eq!(verdict(&o)["pairs"], 11);
    let first = fs::read(d.path().join("prod.json")).unwrap();
    let again = run(d.path(), &args);
    assert_eq!(again.stdout, o.stdout);
    assert_eq!(fs::read(d.path().join("prod.json")).unwrap(), first);
}

#[test]
fn geodesify_writes_realized_space() {
    let d = tempfile::tempdir().unwrap();
    let o = run(
        d.path(),
        &[
            "geodesify",
            "--space",
            "gen:zplus:6",
            "--c",
            "2",
            "--m",
            "2",
            "--out",
            "real.json",
            "--csv",
            "g.csv",
        ],
    );
    assert_eq!(code(&o), 0);
    let real: Value = serde_json::from_str(&fs::read_to_string(d.path().join("real.json")).unwrap()).unwrap();
    let labels = real["points"].as_array().unwrap();
    assert!(labels.iter().any(|l| l == "e:0:1:1/2"));
    let csv = fs::read_to_string(d.path().join("g.csv")).unwrap();
    assert!(csv.starts_with("check,scale,constant,bound,verdict\n"));
    assert!(!csv.contains(",fail\n"));
}

#[test]
fn ray_extract_reports_ray() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "seq.json", r#"["0","2","4","6","8","10","12"]"#);
    let o = run(
        d.path(),
        &[
            "ray",
            "extract",
            "--space",
            "gen:zplus:12",
            "--seq",
            "seq.json",
            "--r0",
            "1",
            "--c",
            "1",
        ],
    );
    assert_eq!(code(&o), 0);
    let v = verdict(&o);
    assert_eq!(v["ray"].as_array().unwrap().len(), 13);
    assert_eq!(v["covered_indices"].as_array().unwrap().len(), 7);
}

#[test]
fn cone_build_reports_violations() {
    let d = tempfile::tempdir().unwrap();
    let two = run(d.path(), &["cone", "build", "--N", "2"]);
    assert_eq!(code(&two), 0);
    assert_eq!(verdict(&two)["points"], 5);
    let four = run(d.path(), &["cone", "build", "--N", "4"]);
    assert_eq!(code(&four), 1);
}

#[test]
fn flasque_certify_shift_and_identity() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "shift.json", &shift_map(12, |i| (i + 1).min(12)));
    write(d.path(), "id.json", &shift_map(12, |i| i));
    let o = run(
        d.path(),
        &["flasque", "certify", "--shift", "shift.json", "--ball", "0:3"],
    );
    assert_eq!(code(&o), 0);
    assert_eq!(verdict(&o)["escapes"][0]["escape"], 4);
    let o = run(d.path(), &["flasque", "certify", "--shift", "id.json"]);
    assert_eq!(code(&o), 1);
    let o = run(
        d.path(),
        &["flasque", "homotopy", "--shift", "shift.json", "--m", "8", "--N", "10"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn homotopy_commands() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "f.json", &shift_map(10, |i| i));
    write(d.path(), "g.json", &shift_map(10, |i| (i + 3).min(10)));
    let o = run(
        d.path(),
        &[
            "homotopy",
            "from-close",
            "--f",
            "f.json",
            "--g",
            "g.json",
            "--out",
            "h.json",
        ],
    );
    assert_eq!(code(&o), 0);
    assert_eq!(verdict(&o)["closeness"], 3.0);
    let o = run(
        d.path(),
        &[
            "homotopy",
            "check-map",
            "--space",
            "gen:zplus:10",
            "--target",
            "gen:zplus:10",
            "--map",
            "h.json",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let mut maps = Vec::new();
    for k in 0..=16 {
        let double = k >= 8;
        let m: Vec<String> = (0..=40)
            .map(|i| format!("\"{i}\":\"{}\"", if double { 2 * i } else { i }))
            .collect();
        maps.push(format!("\"{k}/16\":{{{}}}", m.join(",")));
    }
    write(
        d.path(),
        "fam.json",
        &format!(r#"{{"c":3,"maps":{{{}}}}}"#, maps.join(",")),
    );
    let ray: Vec<String> = (0..=40).map(|i| format!("\"{i}\"")).collect();
    write(d.path(), "rays.json", &format!("[[{}]]", ray.join(",")));
    let base = [
        "homotopy",
        "check-family",
        "--space",
        "gen:zplus:40",
        "--target",
        "gen:zplus:80",
    ];
    let mut args = base.to_vec();
    args.extend(["--family", "fam.json", "--rays", "rays.json", "--t", "1/2"]);
    assert_eq!(code(&run(d.path(), &args)), 1);
}

#[test]
fn suite_inputs_and_fault_injection() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&run(d.path(), &["suite", "--paper-lemmas", "--tower", "zplus:"])),
        2
    );
    assert_eq!(code(&run(d.path(), &["suite"])), 2);
    let clean = run(d.path(), &["suite", "--paper-lemmas", "--tower", "zplus:64,128,256"]);
    let broken = run(
        d.path(),
        &[
            "suite",
            "--paper-lemmas",
            "--tower",
            "zplus:64,128,256",
            "--inject-fault",
            "floor-map",
        ],
    );
    let rows = |o: &Output| -> Vec<bool> {
        verdict(o)["rows"]
            .as_array()
            .unwrap()
            .iter()
            .map(|r| r["pass"].as_bool().unwrap())
            .collect()
    };
    let (a, b) = (rows(&clean), rows(&broken));
    assert_eq!(a.len(), 12);
    assert!(a[2]);
    assert!(!b[2]);
    for k in (0..12).filter(|&k| k != 2) {
        assert_eq!(a[k], b[k], "row {} changed", k + 1);
    }
}
