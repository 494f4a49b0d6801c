use std::process::{Command, Output};

use serde_json::Value;

fn mopchr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mopchr")).args(args).env_remove("MOPCHR_EPS").output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn polys_constant_at_origin() {
    let out = mopchr(&["polys", "--system", "charlier:a=1,2", "--index", "0,0", "--emit", "coeffs"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["coeffs"], serde_json::json!([{ "f": 1.0, "q": "1" }]));
}

#[test]
fn residual_suite_on_charlier_passes() {
    let out = mopchr(&["verify", "--suite", "residuals", "--system", "charlier:a=1,2", "--dmax", "8"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn laguerre_shift_all_routes_agree() {
    let out = mopchr(&["transform", "--family", "laguerre1:alpha=0", "--phi", "roots=0", "--dmax", "20", "--method", "all"]);
    assert_eq!(out.status.code(), Some(0));
    let pairs = json(&out)["agreement"]["pairs"].as_array().unwrap().clone();
    assert_eq!(pairs.len(), 3);
}

#[test]
fn non_perfect_transform_exits_one() {
    let out = mopchr(&["transform", "--system", "krawtchouk:N=10;p=1/3,2/3", "--phi", "roots=5", "--dmax", "6", "--method", "all"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn input_errors_exit_two() {
    for args in [
        &["jacobi", "--system", "charlier:a=1,2"][..],
        &["jacobi", "--system", "nosuchfamily:x=1", "--len", "3"],
        &["jacobi", "--system", "charlier:a=1,1", "--len", "3"],
        &["polys", "--system", "charlier:a=1,2", "--index", "1,x"],
        &["jacobi", "--eps", "-1", "--system", "charlier:a=1,2", "--len", "3"],
    ] {
        assert_eq!(mopchr(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn eps_from_environment() {
    let run = |eps: &str| {
        Command::new(env!("CARGO_BIN_EXE_mopchr"))
            .args(["jacobi", "--system", "charlier:a=1,2", "--len", "2"])
            .env("MOPCHR_EPS", eps)
            .output()
            .unwrap()
    };
    assert_eq!(run("1e-6").status.code(), Some(0));
    assert_eq!(run("abc").status.code(), Some(2));
    assert_eq!(run("0").status.code(), Some(2));
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = ["nnrr", "--system", "meixner1:c=1/3,1/2;beta=2", "--dmax", "6"];
    assert_eq!(mopchr(&args).stdout, mopchr(&args).stdout);
}
