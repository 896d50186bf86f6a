use std::path::PathBuf;
use std::process::{Command, Output};

use fqineq::io::{parse_form_file, to_canonical};
use serde_json::Value;

fn data(name: &str) -> String {
    format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fqineq")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fqineq-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn data_files_round_trip_byte_identical() {
    for name in ["general.json", "general_small_s.json", "diagonal.json", "distmod.json", "distmod_quadratic.json"] {
        let text = std::fs::read_to_string(data(name)).unwrap();
        let parsed = parse_form_file(&text).unwrap();
        assert_eq!(to_canonical(&parsed), text, "{name}");
    }
}

#[test]
fn solve_general() {
    let out = run(&["solve", "--input", &data("general.json")]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["solver"]["outcome"], "FOUND");
    assert_eq!(v["certificate"]["verified"], true);
    assert_eq!(v["certificate"]["x"], serde_json::json!(["0", "0", "0", "0", "1"]));
}

#[test]
fn solve_with_eps_override() {
    let out = run(&["solve", "--input", &data("general.json"), "--eps-ord", "-2", "--budget", "1048576"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["plan"]["B"], 2);
    assert_eq!(v["plan"]["nvars"], 15);
    assert_eq!(v["solver"]["outcome"], "FOUND");
    assert_eq!(v["certificate"]["verified"], true);
}

#[test]
fn deterministic_output_is_stable_and_written_to_file() {
    let path = scratch("general_report.json");
    let out = run(&["solve", "--input", &data("general.json"), "--eps-ord", "-2", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let first = std::fs::read_to_string(&path).unwrap();
    assert!(first.ends_with("}\n"));
    let again = run(&["solve", "--input", &data("general.json"), "--eps-ord", "-2"]);
    assert_eq!(String::from_utf8(again.stdout).unwrap(), first);
}

#[test]
fn parallel_solve_verifies() {
    let out = run(&["solve", "--input", &data("general.json"), "--eps-ord", "-2", "--workers", "4"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["certificate"]["verified"], true);
}

#[test]
fn exit_codes() {
    let budget = run(&["solve", "--input", &data("general.json"), "--eps-ord", "-2", "--budget", "5"]);
    assert_eq!(code(&budget), 2);
    let hypothesis = run(&["solve", "--input", &data("general_small_s.json")]);
    assert_eq!(code(&hypothesis), 3);
    let missing = run(&["solve", "--input", "/nonexistent/form.json"]);
    assert_eq!(code(&missing), 1);
    let bad = scratch("bad.json");
    std::fs::write(&bad, "{\"field\": {\"p\": 2, \"e\": 1},").unwrap();
    assert_eq!(code(&run(&["solve", "--input", bad.to_str().unwrap()])), 1);
    let wrong_variant = run(&["diagonal", "--input", &data("general.json")]);
    assert_eq!(code(&wrong_variant), 1);
    assert_eq!(code(&run(&["solve"])), 1);
    assert_eq!(code(&run(&["frobnicate"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn diagonal() {
    let out = run(&["diagonal", "--input", &data("diagonal.json")]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["plan"]["kind"], "diagonal");
    assert_eq!(v["certificate"]["verified"], true);
}

#[test]
fn distmod() {
    let out = run(&["distmod", "--input", &data("distmod.json")]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["certificate"]["x"], serde_json::json!(["1"]));
    assert_eq!(v["certificate"]["verified"], true);

    let out = run(&["distmod", "--input", &data("distmod_quadratic.json"), "--nu", "2"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["certificate"]["verified"], true);
}

#[test]
fn lowerbound_micro_and_probe() {
    let out = run(&["lowerbound", "--q", "2", "--d", "1", "--s", "2", "--probe", "1", "--samples", "5"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["probe"]["result"], "MINIMAL");
    assert_eq!(v["probe"]["ord"], 1);
    assert_eq!(v["lower_bound_ord"], 1);

    let inst = scratch("lb_instance.json");
    let out = run(&[
        "lowerbound", "--q", "2", "--d", "2", "--s", "5", "--probe", "2", "--samples", "5",
        "--instance-out", inst.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!((v["delta"].as_u64(), v["h_ord"].as_u64()), (Some(6), Some(13)));
    assert_eq!(v["lower_bound_ord"], 24);
    assert_eq!(v["probe"]["result"], "NONE_BELOW");
    assert_eq!(v["kernel_samples"]["passed"], 5);
    let text = std::fs::read_to_string(&inst).unwrap();
    assert_eq!(to_canonical(&parse_form_file(&text).unwrap()), text);

    let too_few = run(&["lowerbound", "--q", "2", "--d", "2", "--s", "4"]);
    assert_eq!(code(&too_few), 3);
}

#[test]
fn normic_and_irreducibles() {
    let out = run(&["normic", "--q", "2", "--d", "2"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["psi"], "x1^2 + x1*x2 + x2^2");
    assert_eq!(v["anisotropic"], true);
    assert_eq!(code(&run(&["normic", "--q", "6", "--d", "2"])), 1);
    assert_eq!(code(&run(&["normic", "--q", "2", "--d", "5"])), 2);

    let out = run(&["irreducibles", "--q", "2", "--degree", "4", "--list"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["count"], "3");
    assert_eq!(v["polynomials"], serde_json::json!(["t^4 + t + 1", "t^4 + t^3 + 1", "t^4 + t^3 + t^2 + t + 1"]));
}
