use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_robust-risk")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).trim().to_string()
}

#[test]
fn linear_robust_expectile_on_three_states() {
    let o = run(&["measure", "robust-expectile", "--prior", "empirical:1,2,3", "--alpha", "0.75", "--delta", "1", "--penalty", "linear"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: f64 = stdout(&o).parse().unwrap();
    assert!((v - 30.0 / 11.0).abs() < 1e-11);
}

#[test]
fn var_of_standard_normal_median() {
    let o = run(&["measure", "var", "--prior", "normal:0,1", "--alpha", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "0.000000000000");
}

#[test]
fn exit_codes() {
    let small_delta = run(&["measure", "robust-expectile", "--prior", "normal:0,1", "--alpha", "0.9", "--delta", "0.5", "--penalty", "linear"]);
    assert_eq!(small_delta.status.code(), Some(3));
    let heavy_tail = run(&["measure", "expectile", "--prior", "t:2", "--alpha", "0.9"]);
    assert_eq!(heavy_tail.status.code(), Some(3));
    let usage = run(&["measure", "var", "--alpha", "0.5"]);
    assert_eq!(usage.status.code(), Some(1));
    let help = run(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
}

#[test]
fn sweep_writes_header_and_rows() {
    let o = run(&["sweep", "--prior", "normal:0,1", "--penalty", "linear", "--alpha", "0.9", "--delta", "1,2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "alpha,delta,robust,expectile,var,mean,iters,converged");
    assert_eq!(lines.len(), 3);
}

#[test]
fn verify_suite_passes() {
    let o = run(&["verify", "duality"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).lines().all(|l| !l.contains("FAIL")));
}
