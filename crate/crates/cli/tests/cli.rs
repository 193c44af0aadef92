use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn syndetic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_syndetic")).args(args).env_remove("SYNDETIC_CONFIG").output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("report json on stdout")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn non_multiples_of_three() {
    let out = syndetic(&["check-nsyndetic", "--group", "z", "--set", "residue:3:exclude0", "--n", "2"]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r["verdict"], "proved");
    assert_eq!(r["certificate"]["f"], serde_json::json!([0, 1, 2]));

    let out = syndetic(&["check-nsyndetic", "--group", "z", "--set", "residue:3:exclude0", "--n", "3"]);
    assert_eq!(code(&out), 1);
    let r = report(&out);
    assert_eq!(r["certificate"]["type"], "thick_refutation");
    assert_eq!(r["certificate"]["tuple"].as_array().unwrap().len(), 3);
}

#[test]
fn windowed_answers_exit_two() {
    let out = syndetic(&["check-thick", "--set", "pow2c", "--n", "2"]);
    assert_eq!(code(&out), 2);
    assert_eq!(report(&out)["verdict"], "undecided-at-scale");
}

#[test]
fn usage_errors() {
    assert_eq!(code(&syndetic(&["check-nsyndetic", "--bogus"])), 64);
    assert_eq!(code(&syndetic(&["no-such-verb"])), 64);
    assert_eq!(code(&syndetic(&["check-nsyndetic", "--set", "residue:"])), 64);
    assert_eq!(code(&syndetic(&["--help"])), 0);
}

#[test]
fn other_errors_exit_three() {
    assert_eq!(code(&syndetic(&["verify", "/nonexistent/report.json"])), 3);
}

#[test]
fn scale_exceeded_exits_65() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tiny.conf");
    std::fs::write(&cfg, "tuple_cap = 10\n").unwrap();
    let out = syndetic(&[
        "coloring",
        "--group",
        "f2",
        "--set",
        "cyl:a",
        "--n",
        "2",
        "--avoid",
        "b",
        "--radius",
        "2",
        "--config",
        cfg.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 65, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn config_path_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("env.conf");
    std::fs::write(&cfg, "seed = 7\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_syndetic"))
        .args(["check-nsyndetic", "--set", "even", "--n", "1"])
        .env("SYNDETIC_CONFIG", &cfg)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert_eq!(report(&out)["request"]["config"]["seed"], 7);
}

#[test]
fn verify_round_trip_and_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out =
        syndetic(&["check-nsyndetic", "--set", "residue:3:exclude0", "--n", "2", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let v = syndetic(&["verify", path.to_str().unwrap()]);
    assert_eq!(code(&v), 0);
    assert_eq!(report(&v)["verdict"], "proved");

    let mut r = read_json(&path);
    r["certificate"]["f"] = serde_json::json!([0, 1]);
    let tampered = dir.path().join("t.json");
    std::fs::write(&tampered, r.to_string()).unwrap();
    let v = syndetic(&["verify", tampered.to_str().unwrap()]);
    assert_eq!(code(&v), 1);
    let notes = report(&v)["notes"].as_array().unwrap().clone();
    assert!(notes.iter().any(|n| n.as_str().unwrap().contains("does not replay")));
}

#[test]
fn verify_refutations_in_finite_groups() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = syndetic(&["dense-orbit", "--group", "d4", "--set", "elems:0,3", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert_eq!(code(&syndetic(&["verify", path.to_str().unwrap()])), 0);
}

#[test]
fn scs_certificates_from_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("cert.json");
    let out = syndetic(&["build-scs-cert", "--rank", "2", "--epsilon", "1/6", "--emit-cert", cert.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let mut c = read_json(&cert);
    assert_eq!(c["type"], "scs");
    assert_eq!(code(&syndetic(&["verify", cert.to_str().unwrap()])), 0);
    assert_eq!(code(&syndetic(&["verify-scs-cert", cert.to_str().unwrap()])), 0);

    c["f"] = serde_json::json!(["a"]);
    c["assignment"] = serde_json::json!([0, 0, 0, 0, 0, 0]);
    std::fs::write(&cert, c.to_string()).unwrap();
    let v = syndetic(&["verify-scs-cert", cert.to_str().unwrap()]);
    assert_eq!(code(&v), 1);
    assert!(!report(&v)["notes"].as_array().unwrap().is_empty());
}

#[test]
fn repro_figures_writes_grids() {
    let dir = tempfile::tempdir().unwrap();
    let out = syndetic(&["repro", "figures", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r["scale"]["fig1_marked"], 100);
    assert_eq!(r["scale"]["fig2_marked"], 196);
    assert_eq!(r["scale"]["fig3_marked"], 256);
    let ks: Vec<u64> =
        r["scale"]["k_star"].as_array().unwrap().iter().map(|row| row["k_star"].as_u64().unwrap()).collect();
    assert_eq!(ks, [1, 4, 5, 8, 9]);
    for name in ["fig1.csv", "fig2.csv", "fig3.csv"] {
        let text = std::fs::read_to_string(dir.path().join(name)).unwrap();
        assert_eq!(text.lines().count(), 21);
    }
}

#[test]
fn reports_are_deterministic_apart_from_timing() {
    let run = || {
        let mut r = report(&syndetic(&["check-scs", "--set", "even", "--epsilon", "1/4", "--seed", "11"]));
        r.as_object_mut().unwrap().remove("wall_time_ms");
        r
    };
    assert_eq!(run(), run());
}

#[test]
fn free_group_commands() {
    let out =
        syndetic(&["witness-shift", "--group", "f2", "--set", "cyl:a", "--avoid", "b", "--symmetric", "--radius", "2"]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r["certificate"]["avoid"], serde_json::json!(["b", "B"]));

    let out = syndetic(&["coloring", "--group", "f2", "--set", "cyl:a", "--n", "2", "--avoid", "b", "--radius", "2"]);
    assert_eq!(code(&out), 0);
    assert_eq!(report(&out)["scale"]["entries"], 136);

    let out = syndetic(&["amenability-witness", "--group", "f2"]);
    assert_eq!(code(&out), 0);
    let out = syndetic(&["amenability-witness", "--group", "z", "--max-modulus", "4"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn symmetric_and_dense_orbit_on_z() {
    let out = syndetic(&["check-symmetric", "--set", "even"]);
    assert_eq!(code(&out), 0);
    let out = syndetic(&["check-symmetric", "--set", "even", "--variant", "completely"]);
    assert_eq!(code(&out), 1);
    let out = syndetic(&["dense-orbit", "--set", "odd"]);
    assert_eq!(code(&out), 1);
    let out = syndetic(&["subshift", "--set", "even", "--n", "2", "--window-radius", "4", "--radius", "4"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn set_from_json_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("set.json");
    std::fs::write(&p, r#"{"group":"z","expr":{"op":"residue","modulus":4,"residues":[1,2,3]}}"#).unwrap();
    let out = syndetic(&["check-nsyndetic", "--set", p.to_str().unwrap(), "--n", "3"]);
    assert_eq!(code(&out), 0);
    let out = syndetic(&["check-nsyndetic", "--set", p.to_str().unwrap(), "--n", "4"]);
    assert_eq!(code(&out), 1);
}
