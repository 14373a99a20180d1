//! Runs a resolved config into an output bundle.

use std::path::Path;
use std::time::Instant;

use crate::config::RunConfig;
use crate::error::Result;
use crate::output::{BundleWriter, OutputBundle, RunInfo};

/// Default worker count when the config leaves it at 0.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Runs every scenario of `config` and writes the bundle to `out_dir`.
/// Each ensemble is written and dropped before the next one starts.
pub fn execute(config: &RunConfig, out_dir: &Path, force: bool) -> Result<OutputBundle> {
    let workers = if config.workers == 0 { default_workers() } else { config.workers };
    let start = Instant::now();
    let mut writer = BundleWriter::create(out_dir, force)?;
    for (k, scenario) in config.scenarios.iter().enumerate() {
        log::info!(
            "[{}/{}] {}: N = {}, {} trajectories, t_end = {}",
            k + 1,
            config.scenarios.len(),
            scenario.label,
            scenario.params.n_atoms,
            scenario.ensemble.len(),
            scenario.integrator.t_end
        );
        let t0 = Instant::now();
        let result = scenario.run(workers)?;
        log::info!("{} done in {:.1} s", scenario.label, t0.elapsed().as_secs_f64());
        writer.write_scenario(scenario, &result)?;
    }
    let info = RunInfo {
        status: "complete".into(),
        workers,
        wall_seconds: start.elapsed().as_secs_f64(),
        generator_version: env!("CARGO_PKG_VERSION").into(),
    };
    writer.write_run_info(&info)?;
    writer.finish(config)
}
