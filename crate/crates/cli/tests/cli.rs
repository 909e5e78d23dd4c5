use std::fs;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_local-lmo"))
        .args(args)
        .env_remove("LOCAL_LMO_OUT")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn config(name: &str) -> String {
    format!("{}/../../configs/{name}.toml", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn list_names_every_builtin() {
    let o = cli(&["list"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for name in ["paperK-comparison", "paperL-qsweep", "paperM-geometries"] {
        assert!(text.contains(name), "{text}");
    }
}

#[test]
fn run_then_check_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = cli(&["run", "paperK-comparison", "--out", out]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    for f in ["local_lmo.csv", "pgd.csv", "frank_wolfe.csv", "summary.csv"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let csv = dir.path().join("local_lmo.csv");
    let o = cli(&[
        "check",
        csv.to_str().unwrap(),
        "--claims",
        "fejer,boundary_step",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(
        text.contains("fejer") && text.contains("PASS") && !text.contains("FAIL"),
        "{text}"
    );
}

#[test]
fn unknown_experiment_is_a_config_error() {
    let o = cli(&["run", "nosuch"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nosuch"));
}

#[test]
fn config_files_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = cli(&[
        "run",
        &config("paperL-qsweep"),
        "--out",
        out,
        "--iters",
        "20",
        "--seed",
        "3",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert!(
        summary
            .lines()
            .skip(1)
            .all(|l| l.split(',').nth(3) == Some("20")),
        "{summary}"
    );

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "name = \"x\"\n").unwrap();
    assert_eq!(cli(&["run", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn environment_sets_the_default_output() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_local-lmo"))
        .args(["run", "paperM-geometries"])
        .env("LOCAL_LMO_OUT", dir.path())
        .output()
        .unwrap();
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(dir.path().join("l1.csv").is_file());
}

#[test]
fn check_rejects_unknown_and_inapplicable_claims() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert!(cli(&["run", "paperK-comparison", "--out", out])
        .status
        .success());
    let csv = dir.path().join("pgd.csv");
    let csv = csv.to_str().unwrap();
    assert_eq!(
        cli(&["check", csv, "--claims", "nonsense"]).status.code(),
        Some(2)
    );
    assert_eq!(
        cli(&["check", csv, "--claims", "fejer"]).status.code(),
        Some(2)
    );
    assert_eq!(
        cli(&["check", csv, "--claims", "pgd_descent,pgd_fejer"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        cli(&["check", "/nonexistent.csv", "--claims", "fejer"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn oracle_compares_both_solvers() {
    let dir = tempfile::tempdir().unwrap();
    let set = dir.path().join("ball.toml");
    fs::write(
        &set,
        "variant = \"EuclideanBall\"\nc = [0.0, 0.0, 0.0]\nr = 1.0\n",
    )
    .unwrap();
    let set = set.to_str().unwrap();
    let o = cli(&["oracle", set, "1,0,0", "0.5", "0,1,0"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = stdout(&o);
    assert!(text.contains("PenalizedProjection"), "{text}");
    let gap: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("gap       = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(gap.abs() < 1e-8);
    // center outside the set is reported as a solver failure
    assert_eq!(
        cli(&["oracle", set, "3,0,0", "0.5", "0,1,0"]).status.code(),
        Some(1)
    );
    assert_eq!(
        cli(&["oracle", set, "1,x,0", "0.5", "0,1,0"]).status.code(),
        Some(2)
    );
}
