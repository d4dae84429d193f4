use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn csbohm(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_csbohm")).current_dir(cwd).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn files_under(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(files_under(&p));
        } else {
            out.push(p);
        }
    }
    out.sort();
    out
}

const SMALL_BORN: &str = r#"
kind = "born-check"
seed = 5

[born_check]
n_particles = 300

[born_check.setup]
grid = { x_min = -40.0, x_max = 40.0, n_points = 1024 }
coefficients = [[0.6, 0.0], [0.0, 0.8]]
x0 = 0.0
sigma = 1.0
k_sep = 5.0
t_split = 0.0
t_final = 3.0
dt = 0.005
stride = 2
"#;

#[test]
fn weak_value_config_succeeds() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "wv.toml", "kind = \"weak-value\"\n[weak_value]\nfinal_axis = [1.0, 0.0, 0.0]\n");
    let out = csbohm(tmp.path(), &["--quiet", "--config", "wv.toml", "--out", "res", "run"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("res/result.json")).unwrap()).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["kind"], "weak-value");
    let comps = v["components"].as_array().unwrap();
    // x and z components are ½ for z+ → x+
    assert!((comps[0]["value"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((comps[2]["value"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(v["config_echo"]["weak_value"]["overlap_eps"], 1e-10);
}

#[test]
fn unknown_key_is_config_invalid() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "bad.toml", "kind = \"weak-value\"\n[weak_value]\nfinal_axsi = [1.0, 0.0, 0.0]\n");
    let out = csbohm(tmp.path(), &["--config", "bad.toml", "--out", "res", "run"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!tmp.path().join("res").exists());
}

#[test]
fn missing_config_for_run_is_config_invalid() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(csbohm(tmp.path(), &["run"]).status.code(), Some(2));
    assert_eq!(csbohm(tmp.path(), &["--config", "nope.toml", "run"]).status.code(), Some(2));
}

#[test]
fn subcommand_must_match_config_kind() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "wv.toml", "kind = \"weak-value\"\n");
    assert_eq!(csbohm(tmp.path(), &["--quiet", "--config", "wv.toml", "evolve"]).status.code(), Some(2));
    assert_eq!(csbohm(tmp.path(), &["--quiet", "--config", "wv.toml", "--out", "o", "weak-value"]).status.code(), Some(0));
}

#[test]
fn impossible_tolerance_is_experiment_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let text = SMALL_BORN.replace("n_particles = 300", "n_particles = 300\nsigma_limit = 0.0");
    write(tmp.path(), "born.toml", &text);
    let out = csbohm(tmp.path(), &["--quiet", "--config", "born.toml", "--out", "res", "run"]);
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("res/result.json")).unwrap()).unwrap();
    assert_eq!(v["pass"], false);
}

#[test]
fn orthogonal_boundaries_fail_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "wv.toml", "kind = \"weak-value\"\n[weak_value]\nfinal_axis = [0.0, 0.0, 1.0]\nfinal_outcome = \"-\"\n");
    assert_eq!(csbohm(tmp.path(), &["--quiet", "--config", "wv.toml", "--out", "res", "run"]).status.code(), Some(1));
}

#[test]
fn resolved_config_reproduces_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "born.toml", SMALL_BORN);
    let first = csbohm(tmp.path(), &["--quiet", "--config", "born.toml", "--seed", "11", "--out", "a", "run"]);
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    let second = csbohm(tmp.path(), &["--quiet", "--config", "a/resolved_config.toml", "--out", "b", "run"]);
    assert_eq!(second.status.code(), Some(0));
    for name in ["result.json", "resolved_config.toml"] {
        let a = std::fs::read(tmp.path().join("a").join(name)).unwrap();
        let b = std::fs::read(tmp.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs");
    }
    let echo = std::fs::read_to_string(tmp.path().join("a/resolved_config.toml")).unwrap();
    assert!(echo.contains("seed = 11"));
    assert!(echo.contains("sigma_limit = 3.0"));
}

#[test]
fn data_files_are_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let o = csbohm(tmp.path(), &["--quiet", "--out", out, "trajectories"]);
        assert_eq!(o.status.code(), Some(0));
    }
    let (a, b) = (files_under(&tmp.path().join("a")), files_under(&tmp.path().join("b")));
    assert_eq!(a.len(), 3);
    for (fa, fb) in a.iter().zip(&b) {
        assert_eq!(std::fs::read(fa).unwrap(), std::fs::read(fb).unwrap());
    }
    let csv = std::fs::read_to_string(tmp.path().join("a/trajectories.csv")).unwrap();
    assert!(csv.starts_with("id,lambda,t,x\n"));
    assert!(!csv.contains('\r'));
}

#[test]
fn outputs_stay_in_declared_directory() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "ev.toml", "kind = \"evolve\"\noutput = \"declared\"\n[evolve]\nsteps = 50\nstride = 10\n");
    let out = csbohm(tmp.path(), &["--quiet", "--config", "ev.toml", "run"]);
    assert_eq!(out.status.code(), Some(0));
    let files = files_under(tmp.path());
    let declared = tmp.path().join("declared");
    for f in &files {
        assert!(f.starts_with(&declared) || f.ends_with("ev.toml"), "unexpected file {}", f.display());
    }
    let names: Vec<String> = files_under(&declared).iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
    assert_eq!(names, ["evolve.csv", "final_state.json", "resolved_config.toml", "result.json"]);
    // 6 slices of 1024 points plus a header
    let csv = std::fs::read_to_string(declared.join("evolve.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6 * 1024 + 1);
}

#[test]
fn csv_numbers_carry_seventeen_digits() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(csbohm(tmp.path(), &["--quiet", "--out", "o", "spin-map"]).status.code(), Some(0));
    let csv = std::fs::read_to_string(tmp.path().join("o/spin_map.csv")).unwrap();
    let row = csv.lines().nth(1).unwrap();
    for cell in row.split(',') {
        let mantissa = cell.trim_start_matches('-').split('e').next().unwrap();
        assert_eq!(mantissa.replace('.', "").len(), 17, "{cell}");
    }
}
