use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const TINY: &str = r#"
[problem]
kind = "heat_1d"

[sampling]
kind = "monte_carlo"
n_int = 128
n_sb = 16
n_tb = 16
seed = 4

[architecture]
depth = 2
width = 8
activation = "tanh"

[optimizer]
choice = "lbfgs"
iters = 40

[evaluation]
n_test = 2000
bound_interior_samples = 2000
bound_boundary_samples = 200
"#;

fn pinn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pinn")).args(args).output().expect("spawn pinn")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_writes_outputs_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "tiny.toml", TINY);
    let a = dir.path().join("a");
    let mut summaries = Vec::new();
    for _ in 0..2 {
        let o = pinn(&["run", "--config", &cfg, "--out", a.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        summaries.push(fs::read(a.join("summary.json")).unwrap());
    }
    for f in ["summary.json", "checkpoint.json", "results.csv", "loss_history.csv"] {
        assert!(a.join(f).exists(), "missing {f}");
    }
    assert_eq!(summaries[0], summaries[1]);
    let results = fs::read_to_string(a.join("results.csv")).unwrap();
    assert!(results.starts_with("problem,parameter,n_int,n_sb,n_tb,depth,width,l1_reg,l2_reg,lambda,e_t,e_g_rel\n"));
    assert!(fs::read_to_string(a.join("loss_history.csv")).unwrap().starts_with("set,iteration,loss\n"));
}

#[test]
fn seed_flag_changes_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "tiny.toml", TINY);
    let out = dir.path().join("a");
    assert!(pinn(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]).status.success());
    let first = fs::read(out.join("summary.json")).unwrap();
    assert!(pinn(&["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "5"]).status.success());
    assert_ne!(first, fs::read(out.join("summary.json")).unwrap());
}

#[test]
fn config_errors_exit_with_two_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "bad.toml", &TINY.replace("n_int = 128", "n_int = 0"));
    let o = pinn(&["run", "--config", &bad, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sampling.n_int"), "{}", stderr(&o));

    let cfg = write_config(dir.path(), "tiny.toml", TINY);
    let o = pinn(&["run", "--config", &cfg, "--scale", "huge"]);
    assert_eq!(o.status.code(), Some(2));

    let o = pinn(&["run", "--config", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn converge_requires_a_schedule() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "tiny.toml", TINY);
    let o = pinn(&["converge", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("convergence"), "{}", stderr(&o));
}

#[test]
fn snapshots_refuse_times_outside_the_horizon() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "tiny.toml", TINY);
    let out = dir.path().join("o");
    assert!(pinn(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]).status.success());

    let o = pinn(&[
        "snapshots",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--times",
        "0,0.5",
        "--resolution",
        "11",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let first = fs::read_to_string(out.join("snapshots/snapshot_000.csv")).unwrap();
    assert!(first.starts_with("t,x,u\n"));
    assert_eq!(first.lines().count(), 12);

    let o = pinn(&["snapshots", "--config", &cfg, "--out", out.to_str().unwrap(), "--times", "1.5"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn snapshots_reject_unknown_checkpoint_versions() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "tiny.toml", TINY);
    let out = dir.path().join("o");
    assert!(pinn(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]).status.success());
    let ck = out.join("checkpoint.json");
    let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&ck).unwrap()).unwrap();
    v["version"] = serde_json::json!(99);
    let bumped = dir.path().join("future.json");
    fs::write(&bumped, v.to_string()).unwrap();
    let o = pinn(&[
        "snapshots",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--checkpoint",
        bumped.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("version"), "{}", stderr(&o));
}

#[test]
fn single_point_ensemble_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "{}\n[ensemble]\ndepth = [2]\nwidth = [8]\nq = [2]\nlambda_reg = [0.0]\nlambda = [1.0]\n",
        TINY.replace("bound_boundary_samples = 200", "bound_boundary_samples = 200\nbound = false")
    );
    let cfg = write_config(dir.path(), "grid.toml", &text);
    let out = dir.path().join("o");
    let o = pinn(&["ensemble", "--config", &cfg, "--out", out.to_str().unwrap(), "--workers", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("ensemble.csv")).unwrap();
    assert!(csv.starts_with("depth,width,q,lambda_reg,lambda,restart,train_error,gen_error_rel,wall_time_s\n"));
    assert_eq!(csv.lines().count(), 2);
    assert!(out.join("marginals.csv").exists() && out.join("ensemble.json").exists());
}
