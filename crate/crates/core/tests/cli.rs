use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn fracwave(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracwave"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("FRACWAVE_THREADS")
        .output()
        .expect("binary runs")
}

fn example(name: &str) -> String {
    configs().join(name).display().to_string()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn read_csv(path: &Path) -> Vec<Vec<f64>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records()
        .map(|rec| rec.unwrap().iter().map(|s| match s {
                    "" => f64::NAN,
                    "true" => 1.0,
                    "false" => 0.0,
                    s => s.parse().unwrap(),
                }).collect())
        .collect()
}

const QUICK_VERIFY: &str = r#"
[problem]
alpha = 1.5
T = 1.0
n_steps = 128
modes = 2
seed = 3

[coefficients]
a = 1
sigma0 = 1.0
sigma1 = 1.0

[data]
u0 = "sin(pi*x)"

[verify]
coercivity_cases = 100
coercivity_steps = 1024
battery_problems = 0
"#;

#[test]
fn wave_limit_field_at_midpoint() {
    let out = tempfile::tempdir().unwrap();
    let o = fracwave(&["solve", &example("wave_limit.toml")], out.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&out.path().join("field.csv"));
    let row = rows.iter().find(|r| r[0] == 1.0 && r[1] == 0.5).expect("lattice has (1, 0.5)");
    assert!((row[2] + 1.0).abs() <= 1e-3, "{}", row[2]);
    for name in ["coeffs.csv", "norms.json", "run.json", "timings.json"] {
        assert!(out.path().join(name).exists(), "{name}");
    }
}

#[test]
fn ml_benchmark_coefficients() {
    let out = tempfile::tempdir().unwrap();
    let o = fracwave(&["solve", &example("ml_benchmark.toml")], out.path());
    assert_eq!(o.status.code(), Some(0));
    let pi2 = std::f64::consts::PI.powi(2);
    for row in read_csv(&out.path().join("coeffs.csv")) {
        let exact = fracwave::fracops::mittag_leffler(1.5, 1.0, -pi2 * row[0].powf(1.5)).unwrap();
        assert!((row[1] - exact).abs() <= 5e-3, "t = {}", row[0]);
    }
}

#[test]
fn run_json_holds_resolved_config_and_seed_override() {
    let out = tempfile::tempdir().unwrap();
    let o = fracwave(&["solve", &example("wave_limit.toml"), "--seed", "99"], out.path());
    assert_eq!(o.status.code(), Some(0));
    let run: serde_json::Value = serde_json::from_slice(&std::fs::read(out.path().join("run.json")).unwrap()).unwrap();
    assert_eq!(run["command"], "solve");
    assert_eq!(run["config"]["problem"]["seed"], 99);
    assert_eq!(run["config"]["coefficients"]["c"], "0");
    assert!(run["config"]["verify"]["tol_ineq"].is_number());
}

#[test]
fn missing_file_names_path() {
    let out = tempfile::tempdir().unwrap();
    let o = fracwave(&["solve", "no/such/problem.toml"], out.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no/such/problem.toml"));
}

#[test]
fn expression_error_has_span() {
    let dir = tempfile::tempdir().unwrap();
    let text = QUICK_VERIFY.replace("u0 = \"sin(pi*x)\"", "u0 = \"sin(pi*x\"");
    let cfg = write_config(dir.path(), "bad.toml", &text);
    let o = fracwave(&["solve", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    let line = text.lines().position(|l| l.starts_with("u0")).unwrap() + 1;
    assert!(err.contains(&format!("bad.toml:{line}:")), "{err}");
    assert!(err.contains('^'), "{err}");
}

#[test]
fn coarse_grid_suggests_steps() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("wave_limit.toml"))
        .unwrap()
        .replace("n_steps = 2048", "n_steps = 4")
        .replace("modes = 1", "modes = 64");
    let cfg = write_config(dir.path(), "coarse.toml", &text);
    let o = fracwave(&["solve", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n_steps >="));
}

#[test]
fn zero_tolerance_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let text = QUICK_VERIFY.replace("[verify]", "[verify]\ntol_ineq = 0.0\ncoercivity_gammas = [1.0]");
    let cfg = write_config(dir.path(), "tamper.toml", &text);
    let o = fracwave(&["verify", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn incompatible_strong_data_is_not_applicable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "p.toml", QUICK_VERIFY);
    let o = fracwave(&["verify", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    let w: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("witnesses.json")).unwrap()).unwrap();
    assert_eq!(w["estimates"]["strong"]["verdict"], "not_applicable");
    assert_eq!(w["estimates"]["weak"]["verdict"], "passed");
}

#[test]
fn single_level_ladder_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{QUICK_VERIFY}\n[convergence]\nladder = \"time\"\nlevels = [64]\n");
    let cfg = write_config(dir.path(), "ladder.toml", &text);
    let o = fracwave(&["convergence", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_ladder_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "p.toml", QUICK_VERIFY);
    let o = fracwave(&["convergence", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn ml_time_ladder_order() {
    let out = tempfile::tempdir().unwrap();
    let o = fracwave(&["convergence", &example("ml_benchmark.toml")], out.path());
    assert_eq!(o.status.code(), Some(0));
    let rows = read_csv(&out.path().join("convergence.csv"));
    assert_eq!(rows.len(), 4);
    for r in &rows[1..] {
        assert!(r[2] >= 1.8, "order {}", r[2]);
        assert_eq!(r[3], 1.0, "non-monotone ladder");
    }
}

#[test]
fn spectral_ladder_on_analytic_data_decays_geometrically() {
    let dir = tempfile::tempdir().unwrap();
    let text = QUICK_VERIFY
        .replace("u0 = \"sin(pi*x)\"", "u0 = \"sin(pi*x)*exp(cos(pi*x))\"")
        .replace("n_steps = 128", "n_steps = 1024")
        + "\n[convergence]\nladder = \"modes\"\nlevels = [2, 4, 6, 32]\n";
    let cfg = write_config(dir.path(), "modes.toml", &text);
    let o = fracwave(&["convergence", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&dir.path().join("convergence.csv"));
    let e: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    assert!(e[1] < 0.1 * e[0] && e[2] < 0.1 * e[1], "{e:?}");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let text = QUICK_VERIFY.replace("battery_problems = 0", "battery_problems = 4\nbattery_steps = 256");
    let cfg = write_config(dir.path(), "p.toml", &text);
    for out in [a.path(), b.path()] {
        for cmd in ["solve", "verify"] {
            assert_eq!(fracwave(&[cmd, &cfg], out).status.code(), Some(0));
        }
    }
    for name in ["field.csv", "coeffs.csv", "norms.json", "run.json", "witnesses.json"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert!(x == y, "{name} differs");
    }
}

#[test]
fn thread_count_does_not_change_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let text = QUICK_VERIFY.replace("battery_problems = 0", "battery_problems = 4\nbattery_steps = 256");
    let cfg = write_config(dir.path(), "p.toml", &text);
    let one = tempfile::tempdir().unwrap();
    let four = tempfile::tempdir().unwrap();
    assert_eq!(fracwave(&["verify", &cfg, "--threads", "1"], one.path()).status.code(), Some(0));
    let o = Command::new(env!("CARGO_BIN_EXE_fracwave"))
        .args(["verify", &cfg, "--out"])
        .arg(four.path())
        .env("FRACWAVE_THREADS", "4")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let timings: serde_json::Value = serde_json::from_slice(&std::fs::read(four.path().join("timings.json")).unwrap()).unwrap();
    assert_eq!(timings["threads"], 4);
    assert_eq!(
        std::fs::read(one.path().join("witnesses.json")).unwrap(),
        std::fs::read(four.path().join("witnesses.json")).unwrap()
    );
}

#[test]
fn shipped_examples_verify_clean() {
    for name in ["wave_limit.toml", "ml_benchmark.toml", "variable_battery.toml"] {
        let out = tempfile::tempdir().unwrap();
        let o = fracwave(&["verify", &example(name)], out.path());
        assert_eq!(o.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&o.stdout));
    }
}
