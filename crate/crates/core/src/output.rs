//! Output bundle: one directory per run.
//!
//! ```text
//! <root>/
//!   manifest.json          resolved run, provenance, file digests
//!   run_info.json          wall time and worker count (not reproducible)
//!   <label>/
//!     aggregate.csv        ensemble statistics per record time
//!     summary.json         final values per trajectory
//!     histogram_t<t>.csv   pooled position density at snapshot times
//!     series/traj_<i>_<j>.csv
//! ```
//!
//! Everything except `run_info.json` is a pure function of the resolved
//! config, so bundles from different worker counts compare byte for byte.
//! Floats are written in shortest round-trip form.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::ensemble::{AggregateRow, EnsembleResult};
use crate::error::{Error, Result};
use crate::model::ObservableRecord;
use crate::scenarios::Scenario;

pub const SCHEMA_VERSION: u64 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const RUN_INFO_FILE: &str = "run_info.json";

/// A written bundle.
#[derive(Debug, Clone)]
pub struct OutputBundle {
    pub root: PathBuf,
    /// Data files relative to `root`, sorted; excludes the manifest and
    /// run info.
    pub files: Vec<String>,
}

impl OutputBundle {
    pub fn manifest_path(&self) -> PathBuf {
        self.root.join(MANIFEST_FILE)
    }
}

/// Execution details that legitimately vary between identical runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunInfo {
    pub status: String,
    pub workers: usize,
    pub wall_seconds: f64,
    pub generator_version: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HistogramRow {
    pub bin_center: f64,
    pub density: f64,
}

/// Writes a bundle incrementally, one scenario at a time.
#[derive(Debug)]
pub struct BundleWriter {
    root: PathBuf,
    files: Vec<String>,
    scenarios: Vec<Value>,
}

impl BundleWriter {
    /// Creates `root`. An existing non-empty directory is refused unless
    /// `force` is set and it holds an earlier bundle, in which case it is
    /// replaced.
    pub fn create(root: &Path, force: bool) -> Result<Self> {
        if root.exists() {
            let non_empty = fs::read_dir(root).map_err(|e| Error::io(root, e))?.next().is_some();
            if non_empty {
                let is_bundle = root.join(RUN_INFO_FILE).is_file() || root.join(MANIFEST_FILE).is_file();
                if !(force && is_bundle) {
                    return Err(Error::OutputExists(root.to_path_buf()));
                }
                fs::remove_dir_all(root).map_err(|e| Error::io(root, e))?;
            }
        }
        fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
        let w = Self { root: root.to_path_buf(), files: Vec::new(), scenarios: Vec::new() };
        w.write_run_info(&RunInfo {
            status: "running".into(),
            workers: 0,
            wall_seconds: 0.0,
            generator_version: env!("CARGO_PKG_VERSION").into(),
        })?;
        Ok(w)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write_scenario(&mut self, scenario: &Scenario, result: &EnsembleResult) -> Result<()> {
        let label = &scenario.label;
        let dir = self.root.join(label);
        let mut files = Vec::new();
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;

        let rel = format!("{label}/aggregate.csv");
        write_csv(&self.root.join(&rel), &result.aggregate)?;
        files.push(rel);

        let mut histograms = Vec::new();
        for &t in &scenario.outputs.snapshot_times {
            let h = result.position_histogram(t, scenario.outputs.histogram_bins)?;
            let rows: Vec<HistogramRow> = h
                .bin_centers
                .iter()
                .zip(&h.density)
                .map(|(&bin_center, &density)| HistogramRow { bin_center, density })
                .collect();
            let rel = format!("{label}/histogram_t{t}.csv");
            write_csv(&self.root.join(&rel), &rows)?;
            histograms.push(json!({ "t": t, "file": format!("histogram_t{t}.csv") }));
            files.push(rel);
        }

        if scenario.outputs.per_trajectory_series {
            fs::create_dir_all(dir.join("series")).map_err(|e| Error::io(dir.join("series"), e))?;
            for tr in &result.trajectories {
                let rel = format!("{label}/series/traj_{}_{}.csv", tr.init_index, tr.noise_index);
                write_csv(&self.root.join(&rel), &tr.records)?;
                files.push(rel);
            }
        }

        let last = result.aggregate.last().expect("ensemble has records");
        let summary = json!({
            "label": label,
            "name": scenario.name,
            "description": scenario.description,
            "n_trajectories": result.len(),
            "n_records": result.aggregate.len(),
            "final": {
                "t": last.t,
                "odd_fraction": last.odd_fraction,
                "even_fraction": 1.0 - last.odd_fraction,
                "theta_mean": last.theta_mean,
                "theta_std": last.theta_std,
                "abs_theta_mean": last.abs_theta_mean,
                "bunching_mean": last.bunching_mean,
                "photon_number_mean": last.photon_number_mean,
            },
            "trajectory_order": "row-major over (init_index, noise_index)",
            "final_theta": result.final_thetas(),
            "final_bunching": result.final_bunchings(),
            "histograms": histograms,
            "scenario": scenario,
        });
        let rel = format!("{label}/summary.json");
        write_json(&self.root.join(&rel), &summary)?;
        files.push(rel);

        self.scenarios.push(json!({ "label": label, "name": scenario.name }));
        self.files.extend(files);
        Ok(())
    }

    /// Writes the manifest and closes the bundle.
    pub fn finish(mut self, config: &RunConfig) -> Result<OutputBundle> {
        self.files.sort();
        let mut listing = Vec::with_capacity(self.files.len());
        for rel in &self.files {
            let path = self.root.join(rel);
            let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
            listing.push(json!({
                "path": rel,
                "bytes": bytes.len(),
                "sha256": hex::encode(Sha256::digest(&bytes)),
            }));
        }
        let manifest = json!({
            "schema_version": SCHEMA_VERSION,
            "generator": { "name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION") },
            "run": config,
            "scenarios": self.scenarios,
            "files": listing,
        });
        write_json(&self.root.join(MANIFEST_FILE), &manifest)?;
        Ok(OutputBundle { root: self.root, files: self.files })
    }

    pub fn write_run_info(&self, info: &RunInfo) -> Result<()> {
        write_json(&self.root.join(RUN_INFO_FILE), info)
    }
}

/// Writes a single scenario result as a complete bundle.
pub fn write_outputs(
    root: &Path,
    config: &RunConfig,
    scenario: &Scenario,
    result: &EnsembleResult,
    force: bool,
) -> Result<OutputBundle> {
    let mut w = BundleWriter::create(root, force)?;
    w.write_scenario(scenario, result)?;
    w.finish(config)
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("bundle values serialize");
    text.push('\n');
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::io(path, std::io::Error::other(format!("{other:?}"))),
    }
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    r.deserialize().map(|row| row.map_err(|e| csv_error(path, e))).collect()
}

pub fn read_aggregate(path: &Path) -> Result<Vec<AggregateRow>> {
    read_csv(path)
}

pub fn read_series(path: &Path) -> Result<Vec<ObservableRecord>> {
    read_csv(path)
}

pub fn read_histogram(path: &Path) -> Result<Vec<HistogramRow>> {
    read_csv(path)
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse { path: path.display().to_string(), message: e.to_string() })
}
