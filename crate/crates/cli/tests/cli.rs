//! End-to-end runs of the compiled binary: exit codes, CSV shape,
//! determinism, and a closed-form numeric check on the two-state chain.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_glauber-lab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn temp_path(tag: &str) -> PathBuf {
    std::env::temp_dir().join(format!("glauber-cli-{}-{tag}.csv", std::process::id()))
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

fn field(line: &str, idx: usize) -> f64 {
    line.split(',').nth(idx).unwrap().parse().unwrap()
}

#[test]
fn unknown_key_exits_one_and_names_the_key() {
    let out = run(&["bd-gap", "bogus=1"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bogus"), "stderr: {err}");
}

#[test]
fn malformed_override_exits_one() {
    let out = run(&["bd-gap", "side"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn two_state_chain_reproduces_closed_forms() {
    let path = temp_path("two-state");
    let out = run(&["bd-gap", "dim=2", "side=1", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    let lines = data_lines(&text);
    assert_eq!(lines[0], "side,volume,inverse_gap,hardy_gap_bound,hardy_gap_anchor,hardy_ls_bound,hitting_from_top");
    assert_eq!(lines.len(), 2);
    let e = std::f64::consts::E;
    assert!((field(lines[1], 2) - 1.0 / (1.0 + e)).abs() < 1e-12);
    assert!((field(lines[1], 3) - 1.0 / e).abs() < 1e-12);
    assert!((field(lines[1], 6) - 1.0 / e).abs() < 1e-12);
    std::fs::remove_file(&path).unwrap();
}

#[test]
fn identical_seeds_give_identical_csv_modulo_timestamp() {
    let a = temp_path("det-a");
    let b = temp_path("det-b");
    let args = [
        "ising-sample",
        "side=3",
        "beta=0.6",
        "m_star=0.9736",
        "burnin=20",
        "samples=200",
        "batches=10",
        "--seed",
        "33",
    ];
    assert_eq!(bin().args(args).arg("--out").arg(&a).output().unwrap().status.code(), Some(0));
    assert_eq!(bin().args(args).arg("--out").arg(&b).output().unwrap().status.code(), Some(0));
    let strip = |p: &PathBuf| {
        std::fs::read_to_string(p)
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with("# generated_unix"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&a), strip(&b));
    std::fs::remove_file(&a).unwrap();
    std::fs::remove_file(&b).unwrap();
}

#[test]
fn different_seeds_change_the_estimates() {
    let run_with = |seed: &str| {
        let out = run(&[
            "ising-sample",
            "side=3",
            "beta=0.6",
            "m_star=0.9736",
            "block_side=1",
            "burnin=20",
            "samples=200",
            "batches=10",
            "--seed",
            seed,
        ]);
        assert_eq!(out.status.code(), Some(0));
        String::from_utf8(out.stdout).unwrap()
    };
    let a = run_with("1");
    let b = run_with("2");
    let mean = |text: &str| {
        let lines = data_lines(text);
        let col = lines[0].split(',').position(|c| c == "mean_f").unwrap();
        field(lines[1], col)
    };
    assert_ne!(mean(&a), mean(&b));
}

#[test]
fn starved_ramp_reports_degeneracy_with_exit_two() {
    let path = temp_path("degenerate");
    let out = run(&[
        "ising-bound",
        "side=8",
        "beta=1.0",
        "block_side=4",
        "m_star=0.9736",
        "burnin=30",
        "samples=120",
        "batches=6",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("degenerate_dirichlet") || text.contains("low_ess"), "{text}");
    std::fs::remove_file(&path).unwrap();
}

#[test]
fn scaling_csv_is_well_formed_with_fit_comments() {
    let out = run(&["bd-scaling", "dim=2", "sides=4,6,8"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines = data_lines(&text);
    assert_eq!(lines.len(), 4, "{text}");
    let width = lines[0].split(',').count();
    for row in &lines[1..] {
        assert_eq!(row.split(',').count(), width);
    }
    assert!(text.contains("loglog_fit inverse_gap"), "{text}");
    // Metadata block records the resolved configuration.
    assert!(text.lines().any(|l| l == "# dim = 2"));
    assert!(text.lines().any(|l| l.starts_with("# seed = ")));
}

#[test]
fn config_file_is_read_and_overridden_by_trailing_args() {
    let cfg_path = temp_path("config-file");
    std::fs::write(&cfg_path, "# comment\nside = 1\ndim = 2\n").unwrap();
    let out = run(&[
        "bd-gap",
        "--config",
        cfg_path.to_str().unwrap(),
        "side=2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines = data_lines(&text);
    // side=2 from the trailing override wins over side=1 in the file.
    assert!(lines[1].starts_with("2,4,"), "{text}");
    std::fs::remove_file(&cfg_path).unwrap();
}

#[test]
fn coupling_requires_heat_bath() {
    let out = run(&[
        "ising-couple",
        "side=4",
        "rate_model=metropolis",
        "replicas=2",
        "t_points=3",
        "t_max=1",
    ]);
    assert_eq!(out.status.code(), Some(1));
}
