use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn nambuq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nambuq"))
        .args(args)
        .env_remove("NAMBUQ_SEED")
        .output()
        .expect("binary runs")
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const QUBIT: &str = r#"{
  "hamiltonian": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]],
  "rho0": RHO,
  "generator": GEN,
  "t_final": 1.0, "dt": DT, "record_every": 100
}"#;

fn qubit(rho: &str, generator: &str, dt: &str) -> String {
    QUBIT.replace("RHO", rho).replace("GEN", generator).replace("DT", dt)
}

#[test]
fn run_writes_a_trajectory_with_constant_purity() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("traj.csv");
    let o = nambuq(&["run", "--config", s(&config("qubit_alpha2.json")), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(report["invariants"].as_array().unwrap().iter().all(|r| r["pass"] == true));
    assert!(report["wall_clock_seconds"].as_f64().unwrap() >= 0.0);

    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,f1,f2,f3,f4,f5,eig_1,eig_2,S_value,energy,sx,sz"
    );
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 21);
    for r in &rows {
        assert_eq!(r.len(), 12);
        assert!((r[2] - rows[0][2]).abs() <= 1e-12, "f2 drifted");
        assert!(r[6] <= r[7], "eigenvalues ascending");
        assert!((r[8] - 0.5 * r[2]).abs() <= 1e-12, "S = f2 / 2 at alpha 2");
    }
}

#[test]
fn csv_output_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let cfg = config("mixed_renyi.json");
    assert_eq!(nambuq(&["run", "--config", s(&cfg), "--out", s(&a)]).status.code(), Some(0));
    assert_eq!(nambuq(&["run", "--config", s(&cfg), "--out", s(&b)]).status.code(), Some(0));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn seed_override_changes_random_states() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let cfg = config("qubit_alpha2.json");
    nambuq(&["run", "--config", s(&cfg), "--out", s(&a)]);
    let o = Command::new(env!("CARGO_BIN_EXE_nambuq"))
        .args(["run", "--config", s(&cfg), "--out", s(&b)])
        .env("NAMBUQ_SEED", "12345")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn run_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.csv");
    let plus = r#"[[[0.5, 0], [0.5, 0]], [[0.5, 0], [0.5, 0]]]"#;

    let missing = nambuq(&["run", "--config", "/nonexistent/config.json", "--out", s(&out)]);
    assert_eq!(missing.status.code(), Some(1));

    let big_dt = write(dir.path(), "dt.json", &qubit(plus, r#"{"kind": "quadratic"}"#, "2.0"));
    let o = nambuq(&["run", "--config", s(&big_dt), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("dt"), "{}", stderr(&o));

    let singular = write(dir.path(), "sing.json", &qubit(plus, r#"{"kind": "renyi_hom", "alpha": 0.5}"#, "0.01"));
    let o = nambuq(&["run", "--config", s(&singular), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("full-rank"), "{}", stderr(&o));

    let syntax = write(dir.path(), "bad.json", "{\n  \"hamiltonian\": [\n  oops");
    let o = nambuq(&["run", "--config", s(&syntax), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let unknown = write(dir.path(), "unk.json", &qubit(plus, r#"{"kind": "quadratic"}"#, "0.01").replace("\"t_final\"", "\"bogus\": 1, \"t_final\""));
    assert_eq!(nambuq(&["run", "--config", s(&unknown), "--out", s(&out)]).status.code(), Some(1));

    let mismatch = write(
        dir.path(),
        "dim.json",
        &qubit(r#"{"random": {"dim": 3, "rank": 3, "seed": 1}}"#, r#"{"kind": "quadratic"}"#, "0.01"),
    );
    let o = nambuq(&["run", "--config", s(&mismatch), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("rho0"), "{}", stderr(&o));
}

#[test]
fn drift_alarm_exits_two_and_keeps_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.csv");
    let text = r#"{
      "hamiltonian": [[[1, 0], [0.7, 0.2], [0, 0]], [[0.7, -0.2], [0, 0], [0.5, 0]], [[0, 0], [0.5, 0], [-1, 0]]],
      "rho0": {"random": {"dim": 3, "rank": 3, "seed": 3}},
      "generator": {"kind": "renyi_hom", "alpha": 1.5},
      "t_final": 1.0, "dt": 0.1, "tolerance": 1e-15
    }"#;
    let cfg = write(dir.path(), "drift.json", text);
    let o = nambuq(&["run", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(report["alarm"].is_string());
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.lines().count() >= 2);
}

#[test]
fn verify_suites() {
    let o = nambuq(&["verify", "--suite", "nosignal", "--seed", "1", "--trials", "100"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let table = String::from_utf8_lossy(&o.stdout);
    assert!(table.lines().filter(|l| l.ends_with("PASS")).count() >= 5);

    let o = nambuq(&["verify", "--suite", "entropy", "--trials", "1000"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("gain(alpha=2)"));

    let o = nambuq(&["verify", "--suite", "jacobi", "--trials", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("REPORT"));

    let o = nambuq(&["verify", "--suite", "conservation", "--seed", "1", "--trials", "10"]);
    assert_eq!(o.status.code(), Some(0));

    assert_eq!(nambuq(&["verify", "--suite", "nonsense"]).status.code(), Some(1));
}

#[test]
fn sweep_over_alpha() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = nambuq(&["sweep", "--config", s(&config("qutrit_pure.json")), "--alphas", "1.3,1.5,2.0,2.5", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "alpha,status,max_eigenvalue_drift,max_oracle_deviation,final_p0,message");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    for (r, a) in rows.iter().zip([1.3, 1.5, 2.0, 2.5]) {
        assert_eq!(r[0].parse::<f64>().unwrap(), a);
        assert_eq!(r[1], "ok");
        assert!(r[3].parse::<f64>().unwrap() <= 1e-7);
    }

    let o = nambuq(&["sweep", "--config", s(&config("mixed_renyi.json")), "--alphas", "2.0", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(&out).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert!(row[3].parse::<f64>().unwrap() <= 1e-9);

    let o = nambuq(&["sweep", "--config", s(&config("qutrit_pure.json")), "--alphas", "1.5,0.5", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.lines().nth(2).unwrap().contains(",error,"));

    assert_eq!(nambuq(&["sweep", "--config", s(&config("qutrit_pure.json")), "--alphas", "", "--out", s(&out)]).status.code(), Some(1));
    let no_alpha = nambuq(&["sweep", "--config", s(&config("bipartite_composite.json")), "--alphas", "1.5", "--out", s(&out)]);
    assert_eq!(no_alpha.status.code(), Some(1));
}

#[test]
fn entropy_command() {
    let o = nambuq(&["entropy", "--dist", "0.5,0.5", "--alpha", "2", "--base", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout).into_owned();
    let value = |name: &str| -> f64 {
        text.lines()
            .find_map(|l| l.strip_prefix(&format!("{name} = ")))
            .unwrap()
            .parse()
            .unwrap()
    };
    assert_eq!(value("renyi"), 1.0);
    assert_eq!(value("shannon"), 1.0);

    let o = nambuq(&["entropy", "--dist", "0.75,0.25", "--alpha", "2"]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("renyi = 0.67807"), "{text}");

    let o = nambuq(&["entropy", "--dist", "0.5,0.6", "--alpha", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("sum"));
    assert_eq!(nambuq(&["entropy", "--dist", "-0.5,1.5", "--alpha", "2"]).status.code(), Some(1));
    assert_eq!(nambuq(&["entropy", "--dist", "1", "--alpha", "-1"]).status.code(), Some(1));
}

#[test]
fn bad_arguments_exit_one() {
    assert_eq!(nambuq(&[]).status.code(), Some(1));
    assert_eq!(nambuq(&["run"]).status.code(), Some(1));
    assert_eq!(nambuq(&["--help"]).status.code(), Some(0));
}
