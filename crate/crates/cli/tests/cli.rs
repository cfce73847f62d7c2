use std::path::Path;
use std::process::{Command, Output};

use catlattice_cli::output::read_config;

fn catlattice(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_catlattice"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = catlattice(&["selftest", "--format", "tree"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let tree: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rows = tree["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r[1] == "pass"));
}

#[test]
fn sign_error_is_caught_by_the_bessel_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let o = catlattice(&["selftest", "--inject", "sign-flip"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("bessel_oracle"));
    assert!(stdout(&o).contains("bessel_oracle\tfail"));
    assert!(stdout(&o).contains("unitarity\tpass"));
}

#[test]
fn short_chain_is_caught() {
    let dir = tempfile::tempdir().unwrap();
    let o = catlattice(&["selftest", "--inject", "small-truncation"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("truncation_independence\tfail"));
    assert!(stdout(&o).contains("bessel_oracle\tfail"));
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("typo.toml"), "[oscillator]\nkapa0 = 1.0\n").unwrap();
    std::fs::write(dir.path().join("neg.toml"), "[oscillator]\nkappa = -1.0\n").unwrap();
    for args in [
        vec!["oscillator", "--config", "typo.toml"],
        vec!["oscillator", "--config", "neg.toml"],
        vec!["oscillator", "--config", "missing.toml"],
        vec!["oscillator", "--preset", "fig9"],
        vec!["oscillator", "--preset", "fig2c"],
        vec!["oscillator", "--format", "csv"],
        vec!["oscillator", "--threads", "0"],
        vec!["frobnicate"],
    ] {
        let o = catlattice(&args, dir.path());
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn numerical_violation_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("coarse.toml"),
        "[bloch]\ngradients_per_cm = [10.83]\ndz_um = 40.0\nlength_cm = 0.05\n",
    )
    .unwrap();
    let o = catlattice(&["bloch", "--config", "coarse.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("step too large"));
}

#[test]
fn emitted_file_reruns_to_the_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("short.toml"), "[oscillator]\nz_max = 8.0\nsamples = 81\n").unwrap();
    let o = catlattice(
        &["oscillator", "--preset", "fig1-curve4", "--config", "short.toml", "--out", "a.tsv"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let first = std::fs::read_to_string(dir.path().join("a.tsv")).unwrap();
    let config = read_config(&first).unwrap();
    assert_eq!(config.oscillator.as_ref().unwrap().sigma0, 4.0);
    assert_eq!(config.oscillator.as_ref().unwrap().z_max, 8.0);
    std::fs::write(dir.path().join("replay.toml"), config.to_toml()).unwrap();
    let o = catlattice(&["oscillator", "--config", "replay.toml", "--out", "b.tsv"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(first, std::fs::read_to_string(dir.path().join("b.tsv")).unwrap());
}

#[test]
fn tree_format_is_json_with_units() {
    let dir = tempfile::tempdir().unwrap();
    let o = catlattice(&["spectrum", "--preset", "fig1-census", "--format", "tree"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let tree: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let columns = tree["columns"].as_array().unwrap();
    assert_eq!(columns[0]["unit"], "kappa");
    for row in tree["rows"].as_array().unwrap() {
        assert_eq!(row.as_array().unwrap().len(), columns.len());
    }
    assert_eq!(tree["metadata"]["scenario"], "spectrum");
}

#[test]
fn bloch_writes_field_maps_beside_the_output() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("map.toml"),
        "[bloch]\nlength_cm = 0.02\nfield_map = true\nsample_every = 20\nfield_map_every = 2\n",
    )
    .unwrap();
    let o = catlattice(&["bloch", "--config", "map.toml", "--out", "run/b.tsv"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("run/b.tsv")).unwrap();
    assert!(text.contains("\nF[1/cm]\tn\tz[cm]\tS00_sq\tG\tln_G\tpower\n"));
    assert!(dir.path().join("run/b.field-F3.61.tsv").exists());
    let o = catlattice(&["bloch", "--config", "map.toml"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sweep_is_independent_of_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("sweep.toml"),
        "[sweep]\nkappa0 = [0.2, 1.0, 3.0]\nsigma0 = [0.0, 4.0]\npoint_dir = \"pts\"\n[oscillator]\nz_max = 6.0\nsamples = 61\n",
    )
    .unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let o = catlattice(&["sweep", "--config", "sweep.toml", "--threads", threads], dir.path());
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        outputs.push(stdout(&o));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(std::fs::read_dir(dir.path().join("pts")).unwrap().count(), 6);
}
