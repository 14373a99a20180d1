//! Named, parameter-complete experiment definitions.
//!
//! Every experiment starts from the same base system: N = 1000 atoms,
//! √N·η = 500, N·U₀ = −100, κ = 100, Δ_c = N·U₀/2 − κ and an initial
//! temperature k_BT = 2κ (all in recoil units). Scenarios differ in the
//! transverse pump, the cavity drive schedule, the duration and the
//! ensemble size.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensemble::{run_ensemble, EnsembleResult, EnsembleSpec, RunOptions};
use crate::error::{Error, Result};
use crate::model::{PumpSchedule, PumpSegment, SimParams};
use crate::sde::{IntegratorConfig, Scheme};

pub const BASE_N_ATOMS: usize = 1000;
pub const BASE_SQRT_N_ETA: f64 = 500.0;
pub const BASE_N_U0: f64 = -100.0;
pub const BASE_KAPPA: f64 = 100.0;
/// Quoted instantaneous threshold √N·η_crit at k_BT = 2κ. Reference only.
pub const SQRT_N_ETA_CRIT: f64 = 200.0;
pub const DEFAULT_DT: f64 = 5e-3;
pub const DEFAULT_HISTOGRAM_BINS: usize = 100;

/// Stable CLI identifiers.
pub const SCENARIO_NAMES: [&str; 6] = ["selforg", "seeded", "odd-prob", "phase-diagram", "buildup", "flip"];

/// How the cavity drive follows a change of atom number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PumpScaling {
    /// η_p unchanged. Keeps the drive's competition with the initial density
    /// fluctuations, whose scattered field η·N·Θ₀ does not depend on N.
    #[default]
    Fixed,
    /// η_p ∝ √N. Keeps η_p relative to the collective scattered field η·N
    /// and the drive's lattice depth U₀|α|², i.e. the mean-field dynamics.
    Collective,
}

/// Multiplicative desk-scale factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScaleOverrides {
    /// Multiplies the number of initial conditions.
    pub ensemble: f64,
    /// Multiplies t_end, switch times and snapshot times.
    pub time: f64,
    /// Multiplies N, holding √N·η and N·U₀ fixed.
    pub atoms: f64,
}

impl Default for ScaleOverrides {
    fn default() -> Self {
        Self { ensemble: 1.0, time: 1.0, atoms: 1.0 }
    }
}

impl ScaleOverrides {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [("ensemble", self.ensemble), ("time", self.time), ("atoms", self.atoms)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(field, format!("scale factor must be > 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::default()
    }
}

/// Which reductions to emit for a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputRequest {
    /// Instants with full position snapshots (for histograms).
    pub snapshot_times: Vec<f64>,
    pub histogram_bins: usize,
    /// Write one time-series file per trajectory.
    pub per_trajectory_series: bool,
    /// Approximate number of recorded instants per trajectory; sets the
    /// record stride when the scenario is built or rescaled.
    pub target_rows: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Catalog family, one of [`SCENARIO_NAMES`] for built-ins.
    pub name: String,
    /// Unique within its family; used as the output subdirectory.
    pub label: String,
    pub description: String,
    pub params: SimParams,
    pub schedule: PumpSchedule,
    pub integrator: IntegratorConfig,
    pub ensemble: EnsembleSpec,
    pub outputs: OutputRequest,
    #[serde(default)]
    pub pump_scaling: PumpScaling,
    /// Reference constants carried along for plotting and reports.
    #[serde(default)]
    pub reference: BTreeMap<String, f64>,
}

/// Record stride giving roughly `target_rows` records.
pub fn stride_for(t_end: f64, dt: f64, target_rows: u64) -> u64 {
    let steps = (t_end / dt).ceil();
    ((steps / target_rows.max(1) as f64).ceil() as u64).max(1)
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.label.is_empty() || !self.label.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) {
            return Err(Error::invalid("label", "must be non-empty and use only [A-Za-z0-9-_.]"));
        }
        self.params.validate().map_err(|e| e.within("params"))?;
        self.integrator.validate(&self.params).map_err(|e| e.within("integrator"))?;
        self.ensemble.validate().map_err(|e| e.within("ensemble"))?;
        if self.outputs.histogram_bins == 0 {
            return Err(Error::invalid("outputs.histogram_bins", "must be at least 1"));
        }
        if let Some(t) = self
            .outputs
            .snapshot_times
            .iter()
            .find(|&&t| !(t.is_finite() && (0.0..=self.integrator.t_end).contains(&t)))
        {
            return Err(Error::invalid("outputs.snapshot_times", format!("{t} outside [0, t_end]")));
        }
        Ok(())
    }

    /// Applies desk-scale factors and recomputes the record stride.
    pub fn scaled(&self, scale: &ScaleOverrides) -> Result<Scenario> {
        scale.validate().map_err(|e| e.within("scale"))?;
        let mut s = self.clone();
        if scale.ensemble != 1.0 {
            s.ensemble.n_init = ((self.ensemble.n_init as f64 * scale.ensemble).round() as u64).max(1);
        }
        if scale.time != 1.0 {
            s.integrator.t_end = self.integrator.t_end * scale.time;
            s.schedule = self.schedule.scale_time(scale.time);
            s.outputs.snapshot_times = self.outputs.snapshot_times.iter().map(|t| t * scale.time).collect();
        }
        if scale.atoms != 1.0 {
            let n_old = self.params.n_atoms as f64;
            let n_new = ((n_old * scale.atoms).round() as usize).max(1);
            let nf = n_new as f64;
            s.params.n_atoms = n_new;
            s.params.eta = self.params.sqrt_n_eta() / nf.sqrt();
            s.params.u0 = self.params.n_u0() / nf;
            if self.pump_scaling == PumpScaling::Collective {
                s.schedule = s.schedule.scale_amplitude((nf / n_old).sqrt());
            }
        }
        s.integrator.record_stride = stride_for(s.integrator.t_end, s.params.dt, s.outputs.target_rows);
        Ok(s)
    }

    /// Sets the master seed of the ensemble.
    pub fn with_seed(mut self, master_seed: u64) -> Self {
        self.ensemble.master_seed = master_seed;
        self
    }

    pub fn run(&self, workers: usize) -> Result<EnsembleResult> {
        self.validate()?;
        let options = RunOptions { workers, snapshot_times: self.outputs.snapshot_times.clone() };
        run_ensemble(&self.params, &self.schedule, &self.integrator, &self.ensemble, &options)
    }
}

/// Base parameters with a given collective transverse pump √N·η.
pub fn base_params(sqrt_n_eta: f64) -> SimParams {
    let n = BASE_N_ATOMS as f64;
    SimParams {
        n_atoms: BASE_N_ATOMS,
        eta: sqrt_n_eta / n.sqrt(),
        u0: BASE_N_U0 / n,
        kappa: BASE_KAPPA,
        delta_c: BASE_N_U0 / 2.0 - BASE_KAPPA,
        temp_init: 2.0 * BASE_KAPPA,
        dt: DEFAULT_DT,
        noise_on: true,
    }
}

fn real(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

#[allow(clippy::too_many_arguments)]
fn build(
    name: &str,
    label: String,
    description: String,
    params: SimParams,
    schedule: PumpSchedule,
    t_end: f64,
    ensemble: (u64, u64),
    outputs: OutputRequest,
) -> Scenario {
    let record_stride = stride_for(t_end, params.dt, outputs.target_rows);
    let mut reference = BTreeMap::new();
    reference.insert("sqrt_n_eta".to_string(), params.sqrt_n_eta());
    reference.insert("n_u0".to_string(), params.n_u0());
    reference.insert("sqrt_n_eta_crit".to_string(), SQRT_N_ETA_CRIT);
    Scenario {
        name: name.to_string(),
        label,
        description,
        params,
        schedule,
        integrator: IntegratorConfig::new(Scheme::SplitExponential, record_stride, t_end),
        ensemble: EnsembleSpec::new(ensemble.0, ensemble.1, 0),
        outputs,
        pump_scaling: PumpScaling::Fixed,
        reference,
    }
}

fn series_outputs(snapshot_times: Vec<f64>, target_rows: u64) -> OutputRequest {
    OutputRequest {
        snapshot_times,
        histogram_bins: DEFAULT_HISTOGRAM_BINS,
        per_trajectory_series: true,
        target_rows,
    }
}

/// Spontaneous organization without cavity drive.
pub fn scenario_selforg() -> Scenario {
    let t_end = 1e4;
    build(
        "selforg",
        "selforg".into(),
        "spontaneous self-organization, no cavity drive".into(),
        base_params(BASE_SQRT_N_ETA),
        PumpSchedule::constant(real(0.0)),
        t_end,
        (50, 10),
        series_outputs(vec![0.0, t_end], 2000),
    )
}

/// Constant cavity drive `eta_p`, with or without the transverse pump.
pub fn scenario_seeded(eta_p: Complex64, transverse_on: bool) -> Scenario {
    let t_end = 1e4;
    let sqrt_n_eta = if transverse_on { BASE_SQRT_N_ETA } else { 0.0 };
    let label = format!("seeded-eta_p_{}{}", fmt_complex(eta_p), if transverse_on { "" } else { "-no_transverse" });
    build(
        "seeded",
        label,
        format!("cavity drive eta_p = {eta_p}, sqrt(N) eta = {sqrt_n_eta}"),
        base_params(sqrt_n_eta),
        PumpSchedule::constant(eta_p),
        t_end,
        (20, 10),
        series_outputs(vec![0.0, t_end], 2000),
    )
}

/// The three seeding set-ups: drive alone, drive against, drive along.
pub fn seeded_variants() -> Vec<Scenario> {
    let mut v = vec![
        scenario_seeded(real(500.0), false),
        scenario_seeded(real(-500.0), true),
        scenario_seeded(real(500.0), true),
    ];
    for (s, tag) in v.iter_mut().zip(["a", "b", "c"]) {
        s.label = format!("seeded-{tag}");
    }
    v
}

pub const DEFAULT_ODD_PROB_ETA_P: [f64; 8] = [0.0, 125.0, 250.0, 500.0, 750.0, 1000.0, 1500.0, 2000.0];

/// Short runs measuring the probability of the odd pattern versus drive.
pub fn scenario_odd_probability(eta_p_values: &[f64]) -> Result<Vec<Scenario>> {
    eta_p_values
        .iter()
        .map(|&eta_p| {
            if !(eta_p.is_finite() && eta_p >= 0.0) {
                return Err(Error::invalid("eta_p_values", format!("must be finite and >= 0, got {eta_p}")));
            }
            Ok(build(
                "odd-prob",
                format!("odd-prob-eta_p_{}", fmt_num(eta_p)),
                format!("odd-pattern probability at eta_p = {eta_p}"),
                base_params(BASE_SQRT_N_ETA),
                PumpSchedule::constant(real(eta_p)),
                1.0,
                (5000, 5),
                OutputRequest {
                    snapshot_times: vec![],
                    histogram_bins: DEFAULT_HISTOGRAM_BINS,
                    per_trajectory_series: false,
                    target_rows: 20,
                },
            ))
        })
        .collect()
}

pub const PHASE_DIAGRAM_ETA_P: [f64; 3] = [0.0, -500.0, -5000.0];
pub const DEFAULT_PHASE_SQRT_N_ETA: [f64; 10] = [0.0, 50.0, 100.0, 150.0, 200.0, 250.0, 300.0, 350.0, 400.0, 500.0];

/// Long runs to the steady state, t_end = 20·N, one scenario per √N·η.
pub fn scenario_phase_diagram(eta_p: f64, sqrt_n_eta_values: &[f64]) -> Vec<Scenario> {
    sqrt_n_eta_values
        .iter()
        .map(|&sqrt_n_eta| {
            let params = base_params(sqrt_n_eta);
            let t_end = 20.0 * params.n_atoms as f64;
            build(
                "phase-diagram",
                format!("phase-eta_p_{}-sqrtn_eta_{}", fmt_num(eta_p), fmt_num(sqrt_n_eta)),
                format!("steady state at eta_p = {eta_p}, sqrt(N) eta = {sqrt_n_eta}"),
                params,
                PumpSchedule::constant(real(eta_p)),
                t_end,
                (5, 5),
                series_outputs(vec![t_end], 2000),
            )
        })
        .collect()
}

pub const BUILDUP_SQRT_N_ETA: [f64; 4] = [0.0, 90.0, 120.0, 180.0];

/// Onset of the seeded pattern from a uniform gas: 4 pumps × 3 drives.
pub fn scenario_buildup() -> Vec<Scenario> {
    BUILDUP_SQRT_N_ETA
        .iter()
        .flat_map(|&sqrt_n_eta| {
            PHASE_DIAGRAM_ETA_P.iter().map(move |&eta_p| {
                let params = base_params(sqrt_n_eta);
                let t_end = 20.0 * params.n_atoms as f64;
                build(
                    "buildup",
                    format!("buildup-sqrtn_eta_{}-eta_p_{}", fmt_num(sqrt_n_eta), fmt_num(eta_p)),
                    format!("pattern buildup at eta_p = {eta_p}, sqrt(N) eta = {sqrt_n_eta}"),
                    params,
                    PumpSchedule::constant(real(eta_p)),
                    t_end,
                    (5, 5),
                    series_outputs(vec![], 10_000),
                )
            })
        })
        .collect()
}

pub const FLIP_PULSE_START: f64 = 2000.0;
pub const FLIP_PULSE_END: f64 = 2100.0;
pub const FLIP_PULSE_ETA_P: Complex64 = Complex64::new(0.0, 2e4);
pub const FLIP_HOLD_ETA_P: Complex64 = Complex64::new(500.0, 0.0);

/// Organize without drive, apply a strong quadrature pulse, then hold with
/// a weak in-phase drive. The pulse cancels the field scattered by an even
/// pattern and the hold drive favors the odd one.
pub fn scenario_flip() -> Scenario {
    let schedule = PumpSchedule::new(vec![
        PumpSegment { t_start: 0.0, eta_p: real(0.0) },
        PumpSegment { t_start: FLIP_PULSE_START, eta_p: FLIP_PULSE_ETA_P },
        PumpSegment { t_start: FLIP_PULSE_END, eta_p: FLIP_HOLD_ETA_P },
    ])
    .expect("static schedule is valid");
    let t_end = 4000.0;
    let mut s = build(
        "flip",
        "flip".into(),
        "pattern flip by a quadrature cavity pulse".into(),
        base_params(BASE_SQRT_N_ETA),
        schedule,
        t_end,
        (1, 1),
        series_outputs(vec![FLIP_PULSE_START, t_end], 8000),
    );
    s.pump_scaling = PumpScaling::Collective;
    s
}

/// All scenarios of a catalog family with default arguments.
pub fn catalog(name: &str) -> Result<Vec<Scenario>> {
    Ok(match name {
        "selforg" => vec![scenario_selforg()],
        "seeded" => seeded_variants(),
        "odd-prob" => scenario_odd_probability(&DEFAULT_ODD_PROB_ETA_P)?,
        "phase-diagram" => PHASE_DIAGRAM_ETA_P
            .iter()
            .flat_map(|&eta_p| scenario_phase_diagram(eta_p, &DEFAULT_PHASE_SQRT_N_ETA))
            .collect(),
        "buildup" => scenario_buildup(),
        "flip" => vec![scenario_flip()],
        other => return Err(Error::UnknownScenario(other.to_string())),
    })
}

fn fmt_num(v: f64) -> String {
    format!("{v}")
}

fn fmt_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        fmt_num(z.re)
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}
