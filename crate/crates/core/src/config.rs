//! JSON run configuration.
//!
//! A config names a catalog scenario (or inlines scenario objects) and may
//! override any part of it:
//!
//! ```json
//! {
//!   "scenario": "selforg",
//!   "master_seed": 42,
//!   "scale": { "ensemble": 0.4, "time": 0.2, "atoms": 0.2 },
//!   "params": { "dt": 0.005 },
//!   "integrator": { "t_end": 2000 },
//!   "ensemble": { "n_noise": 2 },
//!   "outputs": { "per_trajectory_series": false },
//!   "arguments": { "eta_p_values": [0, 500] }
//! }
//! ```
//!
//! Overrides apply after scaling, to every scenario of the set. Unknown keys
//! are rejected. A bundle manifest is also accepted and replays its run.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::scenarios::{self, stride_for, Scenario, ScaleOverrides};
use crate::sde::{Freeze, Scheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Default,
    User,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum ScenarioSource {
    Named(String),
    Inline(Box<Scenario>),
    InlineSet(Vec<Scenario>),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamOverrides {
    n_atoms: Option<usize>,
    eta: Option<f64>,
    u0: Option<f64>,
    kappa: Option<f64>,
    delta_c: Option<f64>,
    temp_init: Option<f64>,
    dt: Option<f64>,
    noise_on: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntegratorOverrides {
    scheme: Option<Scheme>,
    record_stride: Option<u64>,
    t_end: Option<f64>,
    freeze: Option<Freeze>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnsembleOverrides {
    n_init: Option<u64>,
    n_noise: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputOverrides {
    snapshot_times: Option<Vec<f64>>,
    histogram_bins: Option<usize>,
    per_trajectory_series: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Arguments {
    eta_p_values: Option<Vec<f64>>,
    phase_eta_p: Option<Vec<f64>>,
    sqrt_n_eta_values: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: ScenarioSource,
    #[serde(default)]
    master_seed: Option<u64>,
    #[serde(default)]
    output_dir: Option<PathBuf>,
    #[serde(default)]
    workers: Option<usize>,
    #[serde(default)]
    scale: Option<ScaleOverrides>,
    #[serde(default)]
    params: ParamOverrides,
    #[serde(default)]
    integrator: IntegratorOverrides,
    #[serde(default)]
    ensemble: EnsembleOverrides,
    #[serde(default)]
    outputs: OutputOverrides,
    #[serde(default)]
    arguments: Arguments,
}

/// A fully resolved and validated run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Catalog family name, or `inline`.
    pub source: String,
    pub scenarios: Vec<Scenario>,
    pub master_seed: u64,
    pub scale: ScaleOverrides,
    /// Where each configurable value came from.
    pub provenance: BTreeMap<String, Provenance>,
    /// The user's config as given, minus execution-only keys.
    pub user_config: Value,
    /// Execution-only: not part of the manifest.
    #[serde(skip)]
    pub output_dir: Option<PathBuf>,
    #[serde(skip)]
    pub workers: usize,
}

/// Keys that change where or how fast a run executes but never its output.
const EXECUTION_KEYS: [&str; 2] = ["output_dir", "workers"];

const PROVENANCE_KEYS: [&str; 6] = ["master_seed", "scale.ensemble", "scale.time", "scale.atoms", "workers", "output_dir"];

/// Parses and validates a JSON config (or a bundle manifest).
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    parse_config_value(value)
}

pub fn parse_config_value(value: Value) -> Result<RunConfig> {
    if value.get("schema_version").is_some() {
        return from_manifest(value);
    }
    let raw: RawConfig = serde_path_to_error::deserialize(&value).map_err(|e| Error::Parse {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;

    let scale = raw.scale.unwrap_or_default();
    scale.validate().map_err(|e| e.within("scale"))?;
    let (source, base, inline) = match raw.scenario {
        ScenarioSource::Named(name) => {
            let set = resolve_named(&name, &raw.arguments)?;
            (name, set, false)
        }
        ScenarioSource::Inline(s) => ("inline".to_string(), vec![*s], true),
        ScenarioSource::InlineSet(v) => ("inline".to_string(), v, true),
    };
    if base.is_empty() {
        return Err(Error::invalid("scenario", "empty scenario set"));
    }
    if inline && has_arguments(&raw.arguments) {
        return Err(Error::invalid("arguments", "only valid with a named scenario"));
    }

    let master_seed = raw.master_seed.unwrap_or(0);
    let mut scenarios = Vec::with_capacity(base.len());
    for s in &base {
        let mut s = s.scaled(&scale)?;
        apply_overrides(&mut s, &raw.params, &raw.integrator, &raw.ensemble, &raw.outputs);
        let s = s.with_seed(master_seed);
        s.validate().map_err(|e| if inline { e.within("scenario") } else { e })?;
        scenarios.push(s);
    }
    let mut labels: Vec<&str> = scenarios.iter().map(|s| s.label.as_str()).collect();
    labels.sort_unstable();
    if labels.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::invalid("scenario", "scenario labels must be unique"));
    }

    Ok(RunConfig {
        source,
        scenarios,
        master_seed,
        scale,
        provenance: provenance(&value),
        user_config: strip_execution_keys(value),
        output_dir: raw.output_dir,
        workers: raw.workers.unwrap_or(0),
    })
}

fn resolve_named(name: &str, args: &Arguments) -> Result<Vec<Scenario>> {
    let wrong = |key: &str| Err(Error::invalid(format!("arguments.{key}"), format!("not accepted by scenario {name:?}")));
    match name {
        "odd-prob" => {
            if args.phase_eta_p.is_some() {
                return wrong("phase_eta_p");
            }
            if args.sqrt_n_eta_values.is_some() {
                return wrong("sqrt_n_eta_values");
            }
            match &args.eta_p_values {
                Some(v) => scenarios::scenario_odd_probability(v).map_err(|e| e.within("arguments")),
                None => scenarios::catalog(name),
            }
        }
        "phase-diagram" => {
            if args.eta_p_values.is_some() {
                return wrong("eta_p_values");
            }
            let eta_ps = args.phase_eta_p.clone().unwrap_or_else(|| scenarios::PHASE_DIAGRAM_ETA_P.to_vec());
            let etas = args
                .sqrt_n_eta_values
                .clone()
                .unwrap_or_else(|| scenarios::DEFAULT_PHASE_SQRT_N_ETA.to_vec());
            Ok(eta_ps.iter().flat_map(|&p| scenarios::scenario_phase_diagram(p, &etas)).collect())
        }
        _ => {
            if has_arguments(args) {
                return Err(Error::invalid("arguments", format!("scenario {name:?} takes no arguments")));
            }
            scenarios::catalog(name)
        }
    }
}

fn has_arguments(args: &Arguments) -> bool {
    args.eta_p_values.is_some() || args.phase_eta_p.is_some() || args.sqrt_n_eta_values.is_some()
}

fn apply_overrides(
    s: &mut Scenario,
    params: &ParamOverrides,
    integrator: &IntegratorOverrides,
    ensemble: &EnsembleOverrides,
    outputs: &OutputOverrides,
) {
    let p = &mut s.params;
    macro_rules! set {
        ($dst:expr, $src:expr) => {
            if let Some(v) = $src {
                $dst = v.clone();
            }
        };
    }
    set!(p.n_atoms, params.n_atoms);
    set!(p.eta, params.eta);
    set!(p.u0, params.u0);
    set!(p.kappa, params.kappa);
    set!(p.delta_c, params.delta_c);
    set!(p.temp_init, params.temp_init);
    set!(p.dt, params.dt);
    set!(p.noise_on, params.noise_on);
    set!(s.integrator.scheme, integrator.scheme);
    set!(s.integrator.t_end, integrator.t_end);
    set!(s.integrator.freeze, integrator.freeze);
    set!(s.ensemble.n_init, ensemble.n_init);
    set!(s.ensemble.n_noise, ensemble.n_noise);
    set!(s.outputs.snapshot_times, &outputs.snapshot_times);
    set!(s.outputs.histogram_bins, outputs.histogram_bins);
    set!(s.outputs.per_trajectory_series, outputs.per_trajectory_series);
    s.integrator.record_stride = match integrator.record_stride {
        Some(v) => v,
        None => stride_for(s.integrator.t_end, s.params.dt, s.outputs.target_rows),
    };
}

fn provenance(value: &Value) -> BTreeMap<String, Provenance> {
    let mut map = BTreeMap::new();
    for key in PROVENANCE_KEYS {
        if !EXECUTION_KEYS.contains(&key) {
            map.insert(key.to_string(), if lookup(value, key).is_some() { Provenance::User } else { Provenance::Default });
        }
    }
    for section in ["params", "integrator", "ensemble", "outputs", "arguments"] {
        if let Some(Value::Object(obj)) = value.get(section) {
            for k in obj.keys() {
                map.insert(format!("{section}.{k}"), Provenance::User);
            }
        }
    }
    map
}

fn lookup<'a>(value: &'a Value, dotted: &str) -> Option<&'a Value> {
    dotted.split('.').try_fold(value, |v, k| v.get(k))
}

fn strip_execution_keys(mut value: Value) -> Value {
    if let Value::Object(obj) = &mut value {
        for k in EXECUTION_KEYS {
            obj.remove(k);
        }
    }
    value
}

fn from_manifest(value: Value) -> Result<RunConfig> {
    let version = value.get("schema_version").and_then(Value::as_u64);
    if version != Some(crate::output::SCHEMA_VERSION) {
        return Err(Error::invalid(
            "schema_version",
            format!("unsupported manifest schema {:?}", value.get("schema_version")),
        ));
    }
    let run = value.get("run").cloned().ok_or_else(|| Error::invalid("run", "manifest has no run section"))?;
    let config: RunConfig = serde_path_to_error::deserialize(run).map_err(|e| Error::Parse {
        path: format!("run.{}", e.path()),
        message: e.inner().to_string(),
    })?;
    for s in &config.scenarios {
        s.validate().map_err(|e| e.within("run.scenarios"))?;
    }
    Ok(config)
}
