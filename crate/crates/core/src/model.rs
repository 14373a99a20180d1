//! Domain types and closed-form physics of the atom–cavity model.
//!
//! Units: ħ = k = ω_R = 1, so the atomic mass is 1/2. Positions are in 1/k,
//! momenta in ħk, energies in E_R = ħω_R and times in 1/ω_R. The field
//! amplitude α is dimensionless (|α|² is the mean photon number).

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Atomic mass in recoil units (ω_R = ħk²/2m with ħ = k = ω_R = 1).
pub const MASS: f64 = 0.5;

/// Thermal energies at or below this many recoil energies leave the
/// semiclassical regime.
pub const SEMICLASSICAL_MIN_TEMP: f64 = 10.0;

/// Physical constants of one simulation, all in recoil units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimParams {
    pub n_atoms: usize,
    /// Transverse pump strength per atom (not √N·η).
    pub eta: f64,
    /// Light shift per photon, U₀ ≤ 0.
    pub u0: f64,
    pub kappa: f64,
    pub delta_c: f64,
    /// Initial thermal energy k_BT in units of E_R.
    pub temp_init: f64,
    pub dt: f64,
    #[serde(default = "default_true")]
    pub noise_on: bool,
}

fn default_true() -> bool {
    true
}

impl SimParams {
    /// Checks every invariant. Field paths in errors are relative to the
    /// parameter block, e.g. `kappa`.
    pub fn validate(&self) -> Result<()> {
        if self.n_atoms == 0 {
            return Err(Error::invalid("n_atoms", "must be at least 1"));
        }
        check_finite("eta", self.eta)?;
        check_finite("u0", self.u0)?;
        check_finite("delta_c", self.delta_c)?;
        if self.u0 > 0.0 {
            return Err(Error::invalid("u0", "must be <= 0"));
        }
        check_positive("kappa", self.kappa)?;
        check_positive("temp_init", self.temp_init)?;
        check_positive("dt", self.dt)?;
        Ok(())
    }

    /// True when the initial gas is hot enough for the semiclassical limit.
    pub fn semiclassical_ok(&self) -> bool {
        self.temp_init > SEMICLASSICAL_MIN_TEMP
    }

    /// Collective pump √N·η.
    pub fn sqrt_n_eta(&self) -> f64 {
        (self.n_atoms as f64).sqrt() * self.eta
    }

    /// Collective light shift N·U₀.
    pub fn n_u0(&self) -> f64 {
        self.n_atoms as f64 * self.u0
    }
}

fn check_finite(field: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(field, "must be finite"))
    }
}

fn check_positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be > 0, got {v}")))
    }
}

/// One piece of the longitudinal drive: `eta_p` applies from `t_start` until
/// the next segment begins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpSegment {
    pub t_start: f64,
    pub eta_p: Complex64,
}

/// Piecewise-constant, right-continuous complex cavity drive η_p(t).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<PumpSegment>", into = "Vec<PumpSegment>")]
pub struct PumpSchedule {
    segments: Vec<PumpSegment>,
}

impl PumpSchedule {
    pub fn new(segments: Vec<PumpSegment>) -> Result<Self> {
        let first = segments
            .first()
            .ok_or_else(|| Error::invalid("schedule", "needs at least one segment"))?;
        if first.t_start != 0.0 {
            return Err(Error::invalid("schedule[0].t_start", "first segment must start at t = 0"));
        }
        for (k, seg) in segments.iter().enumerate() {
            if !seg.t_start.is_finite() || !seg.eta_p.re.is_finite() || !seg.eta_p.im.is_finite() {
                return Err(Error::invalid(format!("schedule[{k}]"), "must be finite"));
            }
        }
        for (k, pair) in segments.windows(2).enumerate() {
            if pair[1].t_start <= pair[0].t_start {
                return Err(Error::invalid(
                    format!("schedule[{}].t_start", k + 1),
                    "segment start times must be strictly increasing",
                ));
            }
        }
        Ok(Self { segments })
    }

    /// A drive that never changes.
    pub fn constant(eta_p: Complex64) -> Self {
        Self { segments: vec![PumpSegment { t_start: 0.0, eta_p }] }
    }

    pub fn segments(&self) -> &[PumpSegment] {
        &self.segments
    }

    /// Value of the last segment with `t_start <= t`.
    pub fn eta_p_at(&self, t: f64) -> Complex64 {
        let idx = self.segments.partition_point(|s| s.t_start <= t);
        self.segments[idx.saturating_sub(1)].eta_p
    }

    /// Switch times after t = 0.
    pub fn boundaries(&self) -> impl Iterator<Item = f64> + '_ {
        self.segments.iter().skip(1).map(|s| s.t_start)
    }

    /// Multiplies every switch time by `factor`.
    pub fn scale_time(&self, factor: f64) -> Self {
        let segments = self
            .segments
            .iter()
            .map(|s| PumpSegment { t_start: s.t_start * factor, eta_p: s.eta_p })
            .collect();
        Self { segments }
    }

    /// Multiplies every drive amplitude by `factor`.
    pub fn scale_amplitude(&self, factor: f64) -> Self {
        let segments = self
            .segments
            .iter()
            .map(|s| PumpSegment { t_start: s.t_start, eta_p: s.eta_p * factor })
            .collect();
        Self { segments }
    }
}

impl TryFrom<Vec<PumpSegment>> for PumpSchedule {
    type Error = Error;

    fn try_from(segments: Vec<PumpSegment>) -> Result<Self> {
        Self::new(segments)
    }
}

impl From<PumpSchedule> for Vec<PumpSegment> {
    fn from(s: PumpSchedule) -> Self {
        s.segments
    }
}

/// Full phase-space state of one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryState {
    /// Positions, wrapped into [0, 2π).
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub alpha: Complex64,
    pub t: f64,
}

impl TrajectoryState {
    pub fn n_atoms(&self) -> usize {
        self.x.len()
    }

    pub fn validate(&self, n_atoms: usize) -> Result<()> {
        if self.x.len() != n_atoms || self.p.len() != n_atoms {
            return Err(Error::invalid(
                "state",
                format!(
                    "expected {n_atoms} atoms, got {} positions and {} momenta",
                    self.x.len(),
                    self.p.len()
                ),
            ));
        }
        if !self.is_finite() {
            return Err(Error::NonFinite { t: self.t });
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.alpha.re.is_finite()
            && self.alpha.im.is_finite()
            && self.t.is_finite()
            && self.x.iter().chain(&self.p).all(|v| v.is_finite())
    }

    /// Kinetic plus potential energy of all atoms in the current field.
    pub fn mechanical_energy(&self, params: &SimParams) -> f64 {
        self.x
            .iter()
            .zip(&self.p)
            .map(|(&x, &p)| p * p / (2.0 * MASS) + potential(x, self.alpha, params))
            .sum()
    }

    /// Observables at the current instant.
    pub fn observe(&self) -> ObservableRecord {
        ObservableRecord::new(self.t, order_parameter(&self.x), bunching(&self.x), self.alpha)
    }
}

/// Wraps a coordinate into [0, 2π).
#[inline]
pub fn wrap_position(x: f64) -> f64 {
    let w = x.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// One time-stamped sample of the observables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservableRecord {
    pub t: f64,
    pub theta: f64,
    pub bunching: f64,
    pub photon_number: f64,
    pub re_alpha: f64,
    pub im_alpha: f64,
}

impl ObservableRecord {
    pub fn new(t: f64, theta: f64, bunching: f64, alpha: Complex64) -> Self {
        Self {
            t,
            theta,
            bunching,
            photon_number: alpha.norm_sqr(),
            re_alpha: alpha.re,
            im_alpha: alpha.im,
        }
    }

    pub fn alpha(&self) -> Complex64 {
        Complex64::new(self.re_alpha, self.im_alpha)
    }
}

/// Single-particle optical potential U₀|α|² sin²x + η(α + α*) sin x.
pub fn potential(x: f64, alpha: Complex64, params: &SimParams) -> f64 {
    let s = x.sin();
    params.u0 * alpha.norm_sqr() * s * s + 2.0 * params.eta * alpha.re * s
}

/// −∂U/∂x.
pub fn force(x: f64, alpha: Complex64, params: &SimParams) -> f64 {
    let (s, c) = x.sin_cos();
    force_from_sin_cos(s, c, alpha.norm_sqr(), alpha.re, params)
}

/// Force with precomputed trigonometry and field quadratures.
#[inline]
pub fn force_from_sin_cos(s: f64, c: f64, photon_number: f64, re_alpha: f64, params: &SimParams) -> f64 {
    -2.0 * params.u0 * photon_number * s * c - 2.0 * params.eta * re_alpha * c
}

/// Θ = ⟨sin x⟩ over atoms.
pub fn order_parameter(x: &[f64]) -> f64 {
    assert!(!x.is_empty(), "order parameter of an empty ensemble");
    let sum: f64 = x.iter().map(|v| v.sin()).sum();
    (sum / x.len() as f64).clamp(-1.0, 1.0)
}

/// B = ⟨sin² x⟩ over atoms.
pub fn bunching(x: &[f64]) -> f64 {
    assert!(!x.is_empty(), "bunching of an empty ensemble");
    let sum: f64 = x
        .iter()
        .map(|v| {
            let s = v.sin();
            s * s
        })
        .sum();
    (sum / x.len() as f64).clamp(0.0, 1.0)
}

/// Δ = Δ_c − N U₀ B.
pub fn effective_detuning(bunching: f64, params: &SimParams) -> f64 {
    params.delta_c - params.n_u0() * bunching
}

/// Noise-free stationary field (−iηNΘ + η_p)/(κ − iΔ) for a frozen atomic
/// configuration with order parameter `theta` and bunching `bunching`.
pub fn steady_state_field(theta: f64, bunching: f64, eta_p: Complex64, params: &SimParams) -> Complex64 {
    let delta = effective_detuning(bunching, params);
    let scattered = Complex64::new(0.0, -params.eta * params.n_atoms as f64 * theta);
    (scattered + eta_p) / Complex64::new(params.kappa, -delta)
}

/// Linear field dynamics dα/dt = A·α + b for fixed atoms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldDrift {
    pub a: Complex64,
    pub b: Complex64,
}

impl FieldDrift {
    /// Builds (A, b) from Σ sin x_j and Σ sin² x_j.
    #[inline]
    pub fn from_sums(sum_sin: f64, sum_sin2: f64, eta_p: Complex64, params: &SimParams) -> Self {
        Self {
            a: Complex64::new(-params.kappa, params.delta_c - params.u0 * sum_sin2),
            b: eta_p + Complex64::new(0.0, -params.eta * sum_sin),
        }
    }

    pub fn eval(&self, alpha: Complex64) -> Complex64 {
        self.a * alpha + self.b
    }
}

/// Coefficients of the field equation for the atoms in `state`.
pub fn field_drift(state: &TrajectoryState, eta_p: Complex64, params: &SimParams) -> FieldDrift {
    let (sum_sin, sum_sin2) = state.x.iter().fold((0.0, 0.0), |(s1, s2), x| {
        let s = x.sin();
        (s1 + s, s2 + s * s)
    });
    FieldDrift::from_sums(sum_sin, sum_sin2, eta_p, params)
}
