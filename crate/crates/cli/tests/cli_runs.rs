use std::path::Path;
use std::process::Command;

use fidmem_cli::config::parse_config;
use fidmem_cli::{run_to_disk, Mode, Overrides, RunConfig};

const SIMULATE: &str = r#"
[scenario]
line = "gaussian"
direction = "backward"

[sweep]
alpha_l = { start = 5.0, stop = 40.0, count = 3 }
gamma_t = { start = 0.05, stop = 0.3, count = 2, scale = "log" }
"#;

fn fidmem(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_fidmem")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn identical_configs_give_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SIMULATE);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let run_a = fidmem(&["simulate", "--config", &cfg, "--out", a.to_str().unwrap(), "--workers", "1"]);
    let run_b = fidmem(&["simulate", "--config", &cfg, "--out", b.to_str().unwrap(), "--workers", "3"]);
    assert!(run_a.status.success(), "{}", String::from_utf8_lossy(&run_a.stderr));
    assert!(run_b.status.success(), "{}", String::from_utf8_lossy(&run_b.stderr));
    let csv_a = std::fs::read(a.join("simulate.csv")).unwrap();
    let csv_b = std::fs::read(b.join("simulate.csv")).unwrap();
    assert_eq!(csv_a, csv_b);

    let text = String::from_utf8(csv_a).unwrap();
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 6);
    // Sweep order: αL outer, ΓT inner.
    assert_eq!(rows[0][0], "5");
    assert_eq!(rows[1][0], "5");
    assert_eq!(rows[5][0], "40");
    for row in &rows {
        for &i in &[4, 5] {
            let eta: f64 = row[i].parse().unwrap();
            assert!((0.0..=1.0).contains(&eta), "{row:?}");
        }
    }
}

#[test]
fn headers_carry_units_and_the_config_hash() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SIMULATE);
    let out = dir.path().join("out");
    assert!(fidmem(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]).status.success());
    let csv = std::fs::read_to_string(out.join("simulate.csv")).unwrap();
    let manifest: toml::Table = std::fs::read_to_string(out.join("manifest.toml")).unwrap().parse().unwrap();

    let hash = manifest["config_hash"].as_str().unwrap();
    assert_eq!(hash.len(), 64);
    assert!(csv.contains(&format!("# config_hash {hash}")));
    assert!(csv.contains("# units: alpha_l [1], gamma_t [1]"));
    assert!(csv.lines().next().unwrap().contains("schema 1"));

    assert_eq!(manifest["mode"].as_str(), Some("simulate"));
    assert_eq!(manifest["converged"].as_bool(), Some(true));
    assert!(manifest["non_convergence"].as_array().unwrap().is_empty());
    assert!(manifest["files"].as_array().unwrap().iter().any(|f| f.as_str() == Some("simulate.csv")));
    let res = &manifest["resolutions"].as_array().unwrap()[0];
    assert_eq!(res["line"].as_str(), Some("gaussian"));
    assert_eq!(res["n_delta"].as_integer(), Some(64));
}

#[test]
fn malformed_config_exits_1_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    for text in [
        "[scenario\nalpha_l = 3",
        "[scenario]\nalpha_l = 3\ncolour = \"red\"",
        "[sweep]\nalpha_l = { start = 1.0, stop = 2.0, count = 0 }",
        "[scenario]\ngamma_t = -1.0",
        "[resolution]\nn_z = 1",
    ] {
        let cfg = write_config(dir.path(), text);
        let run = fidmem(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(run.status.code(), Some(1), "{text}: {}", String::from_utf8_lossy(&run.stderr));
        assert!(!out.exists(), "{text}");
    }
    let run = fidmem(&["simulate", "--config", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(1));
}

#[test]
fn figure_ids_outside_2_to_6_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    for id in ["7", "1"] {
        let run = fidmem(&["figure", "--id", id, "--out", out.to_str().unwrap()]);
        assert_eq!(run.status.code(), Some(1));
        assert!(!out.exists());
    }
    let run = fidmem(&["figure", "--out", out.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(1));
}

#[test]
fn failed_refinement_exits_2_and_sets_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
[scenario]
alpha_l = 10.0
gamma_t = 0.3
line = "gaussian"

[resolution]
n_z = 3
samples_per_t = 4
"#;
    let cfg = write_config(dir.path(), text);
    let out = dir.path().join("out");
    let run = fidmem(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap(), "--refine"]);
    assert_eq!(run.status.code(), Some(2), "{}", String::from_utf8_lossy(&run.stderr));
    let manifest: toml::Table = std::fs::read_to_string(out.join("manifest.toml")).unwrap().parse().unwrap();
    assert_eq!(manifest["converged"].as_bool(), Some(false));
    assert_eq!(manifest["non_convergence"].as_array().unwrap().len(), 1);
    let csv = std::fs::read_to_string(out.join("simulate.csv")).unwrap();
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].last().map(String::as_str), Some("false"));
}

#[test]
fn flags_win_over_the_file() {
    let file = parse_config("tol = 0.01\nworkers = 2\n[figure]\nid = 3\n").unwrap();
    let flags = Overrides {
        tol: Some(0.002),
        figure_id: Some(5),
        ..Default::default()
    };
    let cfg = RunConfig::merge(Mode::Figure, file, flags).unwrap();
    assert_eq!(cfg.tol, 0.002);
    assert_eq!(cfg.workers, 2);
    assert_eq!(cfg.figure.id, Some(5));
}

#[test]
fn analytic_mode_writes_both_tables() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
[scenario]
line = "lorentzian"

[sweep]
alpha_l = { start = 0.0, stop = 100.0, count = 5 }
gamma_t = { start = 0.01, stop = 1.0, count = 3, scale = "log" }
"#;
    let file = parse_config(text).unwrap();
    let flags = Overrides {
        out: Some(dir.path().join("out")),
        ..Default::default()
    };
    let cfg = RunConfig::merge(Mode::Analytic, file, flags).unwrap();
    assert_eq!(run_to_disk(&cfg).unwrap(), 0);
    let csv = std::fs::read_to_string(dir.path().join("out/analytic.csv")).unwrap();
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 15);
    // The low-depth expansion is only reported inside its range of validity.
    assert!(rows.iter().any(|r| r[7].is_empty()));
    assert!(rows.iter().any(|r| !r[7].is_empty()));
    for row in &rows {
        for cell in row[2..].iter().filter(|c| !c.is_empty()) {
            let v: f64 = cell.parse().unwrap();
            assert!((0.0..=1.0).contains(&v), "{row:?}");
        }
    }
    let heuristic = std::fs::read_to_string(dir.path().join("out/heuristic_optimum.csv")).unwrap();
    assert_eq!(data_rows(&heuristic).len(), 4);

    let gaussian = parse_config(&text.replace("lorentzian", "gaussian")).unwrap();
    assert!(RunConfig::merge(Mode::Analytic, gaussian, Overrides::default()).is_err());
}

#[test]
fn feasibility_mode_reports_the_operating_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let run = fidmem(&["feasibility", "--out", out.to_str().unwrap()]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let csv = std::fs::read_to_string(out.join("feasibility.csv")).unwrap();
    let energy = data_rows(&csv)
        .into_iter()
        .find(|r| r.iter().any(|c| c == "reference_pi_pulse_energy"))
        .expect("reference energy row");
    let value: f64 = energy.iter().find_map(|c| c.parse().ok()).unwrap();
    assert!((value / 600e-6 - 1.0).abs() < 1e-6, "{energy:?}");
}
