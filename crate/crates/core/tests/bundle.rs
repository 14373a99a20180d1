use std::fs;
use std::path::Path;

use cavity_selforg::config::parse_config;
use cavity_selforg::output::{self, read_aggregate, read_histogram, read_json, read_series};
use cavity_selforg::runner::execute;
use cavity_selforg::Error;

const TINY_FLIP: &str = r#"{
  "scenario": "flip",
  "master_seed": 5,
  "scale": { "time": 0.01, "atoms": 0.05 },
  "ensemble": { "n_init": 3, "n_noise": 2 }
}"#;

fn data_files(root: &Path) -> Vec<(String, Vec<u8>)> {
    let manifest = read_json(&root.join(output::MANIFEST_FILE)).unwrap();
    let mut files: Vec<(String, Vec<u8>)> = manifest["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| {
            let rel = f["path"].as_str().unwrap().to_string();
            let bytes = fs::read(root.join(&rel)).unwrap();
            (rel, bytes)
        })
        .collect();
    files.push(("manifest.json".into(), fs::read(root.join(output::MANIFEST_FILE)).unwrap()));
    files
}

#[test]
fn written_values_reread_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let config = parse_config(TINY_FLIP).unwrap();
    let scenario = &config.scenarios[0];
    let result = scenario.run(1).unwrap();
    let bundle = output::write_outputs(dir.path(), &config, scenario, &result, false).unwrap();

    let agg = read_aggregate(&dir.path().join("flip/aggregate.csv")).unwrap();
    assert_eq!(agg, result.aggregate);
    for tr in &result.trajectories {
        let path = dir.path().join(format!("flip/series/traj_{}_{}.csv", tr.init_index, tr.noise_index));
        assert_eq!(read_series(&path).unwrap(), tr.records);
    }
    for &t in &scenario.outputs.snapshot_times {
        let h = result.position_histogram(t, scenario.outputs.histogram_bins).unwrap();
        let rows = read_histogram(&dir.path().join(format!("flip/histogram_t{t}.csv"))).unwrap();
        assert_eq!(rows.iter().map(|r| r.density).collect::<Vec<_>>(), h.density);
    }
    let summary = read_json(&dir.path().join("flip/summary.json")).unwrap();
    let thetas: Vec<f64> = summary["final_theta"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert_eq!(thetas, result.final_thetas());
    assert_eq!(summary["final"]["odd_fraction"].as_f64().unwrap(), result.sign_fractions().0);
    assert_eq!(bundle.files.len(), 1 + 2 + 6 + 1);
}

#[test]
fn manifest_replay_reproduces_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let config = parse_config(TINY_FLIP).unwrap();
    execute(&config, &a, false).unwrap();

    let manifest_text = fs::read_to_string(a.join(output::MANIFEST_FILE)).unwrap();
    let replay = parse_config(&manifest_text).unwrap();
    assert_eq!(replay.scenarios, config.scenarios);
    execute(&replay, &b, false).unwrap();
    assert_eq!(data_files(&a), data_files(&b));
}

#[test]
fn manifest_records_provenance_and_digests() {
    let dir = tempfile::tempdir().unwrap();
    let config = parse_config(TINY_FLIP).unwrap();
    execute(&config, dir.path(), true).unwrap();
    let m = read_json(&dir.path().join(output::MANIFEST_FILE)).unwrap();
    assert_eq!(m["schema_version"], output::SCHEMA_VERSION);
    assert_eq!(m["run"]["provenance"]["master_seed"], "user");
    assert_eq!(m["run"]["provenance"]["scale.time"], "user");
    assert_eq!(m["run"]["provenance"]["scale.ensemble"], "default");
    assert_eq!(m["run"]["provenance"]["ensemble.n_init"], "user");
    for f in m["files"].as_array().unwrap() {
        assert_eq!(f["sha256"].as_str().unwrap().len(), 64);
    }
    let info = read_json(&dir.path().join(output::RUN_INFO_FILE)).unwrap();
    assert_eq!(info["status"], "complete");
}

#[test]
fn empty_ensemble_never_reaches_writer() {
    let err = parse_config(r#"{"scenario":"flip","ensemble":{"n_init":0,"n_noise":3}}"#).unwrap_err();
    assert!(matches!(&err, Error::Invalid { field, .. } if field == "ensemble.n_init"), "{err}");
}

#[test]
fn io_errors_carry_paths() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let config = parse_config(TINY_FLIP).unwrap();
    let err = execute(&config, &blocker.join("sub"), false).unwrap_err();
    assert!(err.to_string().contains(blocker.to_str().unwrap()), "{err}");
}
