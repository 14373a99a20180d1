//! Stochastic integration of one atom–cavity trajectory.
//!
//! The atoms follow Newton's equations in the instantaneous optical
//! potential, the field obeys a linear Itô equation with complex vacuum
//! noise √(κ/2)(dW₁ + i dW₂). Two schemes are available: plain
//! Euler–Maruyama for the field, and an exponential step that solves the
//! field's Ornstein–Uhlenbeck equation exactly over one step with the atoms
//! held fixed.
//!
//! Euler–Maruyama moves the atoms by symplectic Euler (kick, then drift with
//! the new momentum) in the pre-step field and updates the field from the
//! pre-step configuration. The exponential scheme is a symmetric splitting:
//! half kick, drift, exact field step, half kick. With the field frozen it
//! reduces to velocity Verlet, with the atoms frozen it is the exact
//! Ornstein–Uhlenbeck transition.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    force_from_sin_cos, wrap_position, FieldDrift, ObservableRecord, PumpSchedule, SimParams, TrajectoryState, MASS,
};
use crate::rng::RngStream;
use crate::trig;

/// Largest κ·dt accepted by the explicit field update.
pub const EULER_MAX_KAPPA_DT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    EulerMaruyama,
    #[default]
    SplitExponential,
}

/// Test hooks that switch off part of the dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Freeze {
    #[default]
    None,
    /// Positions and momenta never change.
    Atoms,
    /// α is held at its initial value.
    Field,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    #[serde(default)]
    pub scheme: Scheme,
    /// Record observables every this many steps.
    pub record_stride: u64,
    pub t_end: f64,
    #[serde(default)]
    pub freeze: Freeze,
}

impl IntegratorConfig {
    pub fn new(scheme: Scheme, record_stride: u64, t_end: f64) -> Self {
        Self { scheme, record_stride, t_end, freeze: Freeze::None }
    }

    pub fn validate(&self, params: &SimParams) -> Result<()> {
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::invalid("t_end", format!("must be > 0, got {}", self.t_end)));
        }
        if self.record_stride == 0 {
            return Err(Error::invalid("record_stride", "must be at least 1"));
        }
        if self.scheme == Scheme::EulerMaruyama && params.kappa * params.dt > EULER_MAX_KAPPA_DT {
            return Err(Error::invalid(
                "scheme",
                format!(
                    "euler_maruyama needs kappa*dt <= {EULER_MAX_KAPPA_DT}, got {}",
                    params.kappa * params.dt
                ),
            ));
        }
        Ok(())
    }
}

/// Draws positions uniformly on [0, 2π) and momenta from the 1D
/// Maxwell–Boltzmann distribution with variance m·k_BT. All positions are
/// drawn before all momenta.
pub fn sample_initial(params: &SimParams, stream: &RngStream) -> TrajectoryState {
    let mut rng = stream.initial_rng();
    let n = params.n_atoms;
    let x = (0..n).map(|_| wrap_position(rng.random::<f64>() * TAU)).collect();
    let sigma_p = (MASS * params.temp_init).sqrt();
    let p = (0..n)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            sigma_p * z
        })
        .collect();
    TrajectoryState { x, p, alpha: Complex64::new(0.0, 0.0), t: 0.0 }
}

/// e^z − 1 without cancellation for small |z|.
fn complex_expm1(z: Complex64) -> Complex64 {
    let (s, c) = z.im.sin_cos();
    let half = (0.5 * z.im).sin();
    let em1 = z.re.exp_m1();
    // e^x·cos y − 1 = (e^x − 1)·cos y + (cos y − 1)
    Complex64::new(em1 * c - 2.0 * half * half, (em1 + 1.0) * s)
}

/// Advances `state` by `dt` under constant drive `eta_p`. Noise is drawn
/// from `noise` in the fixed order Re, Im.
pub fn step(
    state: &mut TrajectoryState,
    eta_p: Complex64,
    params: &SimParams,
    cfg: &IntegratorConfig,
    dt: f64,
    noise: &mut ChaCha8Rng,
) -> Result<()> {
    Stepper::new(state).step(state, eta_p, params, cfg, dt, noise)
}

/// Integrator that carries sin/cos of the current positions from one step
/// to the next, so each step costs one `sin_cos` per atom. The cache is only
/// valid for the state it was built from or last stepped.
#[derive(Debug, Clone)]
pub struct Stepper {
    sin: Vec<f64>,
    cos: Vec<f64>,
    sum_sin: f64,
    sum_sin2: f64,
}

impl Stepper {
    pub fn new(state: &TrajectoryState) -> Self {
        let (sin, cos): (Vec<f64>, Vec<f64>) = state.x.iter().map(|&x| trig::sin_cos(x)).unzip();
        let (sum_sin, sum_sin2) = sums(&sin);
        Self { sin, cos, sum_sin, sum_sin2 }
    }

    /// Σ sin x_j and Σ sin² x_j for the cached positions.
    pub fn sums(&self) -> (f64, f64) {
        (self.sum_sin, self.sum_sin2)
    }

    pub fn step(
        &mut self,
        state: &mut TrajectoryState,
        eta_p: Complex64,
        params: &SimParams,
        cfg: &IntegratorConfig,
        dt: f64,
        noise: &mut ChaCha8Rng,
    ) -> Result<()> {
        match cfg.scheme {
            Scheme::EulerMaruyama => self.euler(state, eta_p, params, cfg.freeze, dt, noise),
            Scheme::SplitExponential => self.split(state, eta_p, params, cfg.freeze, dt, noise),
        }
        state.t += dt;
        if !(self.sum_sin.is_finite() && state.alpha.re.is_finite() && state.alpha.im.is_finite()) {
            return Err(Error::NonFinite { t: state.t });
        }
        Ok(())
    }

    /// Symplectic Euler for the atoms and an explicit field update, both from
    /// the pre-step state.
    fn euler(
        &mut self,
        state: &mut TrajectoryState,
        eta_p: Complex64,
        params: &SimParams,
        freeze: Freeze,
        dt: f64,
        noise: &mut ChaCha8Rng,
    ) {
        let alpha = state.alpha;
        let drift = FieldDrift::from_sums(self.sum_sin, self.sum_sin2, eta_p, params);
        if freeze != Freeze::Atoms {
            let photons = alpha.norm_sqr();
            for (j, (x, p)) in state.x.iter_mut().zip(state.p.iter_mut()).enumerate() {
                *p += force_from_sin_cos(self.sin[j], self.cos[j], photons, alpha.re, params) * dt;
                *x = drift_position(*x, *p, dt);
            }
            self.refresh(&state.x);
        }
        if freeze != Freeze::Field {
            let mut next = alpha + drift.eval(alpha) * dt;
            if params.noise_on {
                let amp = (0.5 * params.kappa * dt).sqrt();
                let (w1, w2) = draw_pair(noise);
                next += Complex64::new(amp * w1, amp * w2);
            }
            state.alpha = next;
        }
    }

    /// Half kick, drift, exact field update, half kick. The field's (A, b)
    /// are averaged over the start and end configurations of the drift.
    fn split(
        &mut self,
        state: &mut TrajectoryState,
        eta_p: Complex64,
        params: &SimParams,
        freeze: Freeze,
        dt: f64,
        noise: &mut ChaCha8Rng,
    ) {
        let half = 0.5 * dt;
        let before = FieldDrift::from_sums(self.sum_sin, self.sum_sin2, eta_p, params);
        if freeze != Freeze::Atoms {
            let (photons, re) = (state.alpha.norm_sqr(), state.alpha.re);
            for (j, (x, p)) in state.x.iter_mut().zip(state.p.iter_mut()).enumerate() {
                *p += force_from_sin_cos(self.sin[j], self.cos[j], photons, re, params) * half;
                *x = drift_position(*x, *p, dt);
            }
            self.refresh(&state.x);
        }
        if freeze != Freeze::Field {
            let after = FieldDrift::from_sums(self.sum_sin, self.sum_sin2, eta_p, params);
            let a = 0.5 * (before.a + after.a);
            let b = 0.5 * (before.b + after.b);
            let em1 = complex_expm1(a * dt);
            let mut next = state.alpha + em1 * state.alpha + em1 / a * b;
            if params.noise_on {
                // E|ξ|² = (1 − e^{−2κdt})/2, split evenly over Re and Im
                let var = -(-2.0 * params.kappa * dt).exp_m1() / 4.0;
                let amp = var.sqrt();
                let (w1, w2) = draw_pair(noise);
                next += Complex64::new(amp * w1, amp * w2);
            }
            state.alpha = next;
        }
        if freeze != Freeze::Atoms {
            let (photons, re) = (state.alpha.norm_sqr(), state.alpha.re);
            for (j, p) in state.p.iter_mut().enumerate() {
                *p += force_from_sin_cos(self.sin[j], self.cos[j], photons, re, params) * half;
            }
        }
    }

    fn refresh(&mut self, x: &[f64]) {
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        for ((xj, sj), cj) in x.iter().zip(self.sin.iter_mut()).zip(self.cos.iter_mut()) {
            let (s, c) = trig::sin_cos(*xj);
            *sj = s;
            *cj = c;
            s1 += s;
            s2 += s * s;
        }
        self.sum_sin = s1;
        self.sum_sin2 = s2;
    }
}

fn sums(sin: &[f64]) -> (f64, f64) {
    sin.iter().fold((0.0, 0.0), |(s1, s2), s| (s1 + s, s2 + s * s))
}

#[inline]
fn drift_position(x: f64, p: f64, dt: f64) -> f64 {
    let moved = x + p / MASS * dt;
    if (0.0..TAU).contains(&moved) {
        moved
    } else {
        wrap_position(moved)
    }
}

#[inline]
fn draw_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let a: f64 = rng.sample(StandardNormal);
    let b: f64 = rng.sample(StandardNormal);
    (a, b)
}

/// Full atomic positions at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub x: Vec<f64>,
}

/// Everything one trajectory produced.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryOutput {
    pub records: Vec<ObservableRecord>,
    pub snapshots: Vec<Snapshot>,
    pub final_state: TrajectoryState,
}

/// A trajectory in progress. It owns its state and noise stream, so it can
/// be advanced in several calls and gives the same result as one call to
/// the final time, provided each intermediate stop is a breakpoint
/// (a schedule switch, a snapshot time or `t_end`).
pub struct Trajectory<'a> {
    params: &'a SimParams,
    schedule: &'a PumpSchedule,
    cfg: &'a IntegratorConfig,
    state: TrajectoryState,
    stepper: Stepper,
    noise: ChaCha8Rng,
    steps: u64,
    snapshot_times: Vec<f64>,
    records: Vec<ObservableRecord>,
    snapshots: Vec<Snapshot>,
}

impl<'a> Trajectory<'a> {
    pub fn new(
        params: &'a SimParams,
        schedule: &'a PumpSchedule,
        cfg: &'a IntegratorConfig,
        stream: &RngStream,
        initial: Option<TrajectoryState>,
        snapshot_times: &[f64],
    ) -> Result<Self> {
        params.validate()?;
        cfg.validate(params)?;
        let state = match initial {
            Some(s) => {
                s.validate(params.n_atoms)?;
                TrajectoryState { x: s.x.iter().copied().map(wrap_position).collect(), ..s }
            }
            None => sample_initial(params, stream),
        };
        let mut snapshot_times = snapshot_times.to_vec();
        snapshot_times.sort_by(f64::total_cmp);
        snapshot_times.dedup();
        let mut traj = Self {
            params,
            schedule,
            cfg,
            stepper: Stepper::new(&state),
            state,
            noise: stream.noise_rng(),
            steps: 0,
            snapshot_times,
            records: Vec::new(),
            snapshots: Vec::new(),
        };
        traj.mark_instant();
        Ok(traj)
    }

    pub fn state(&self) -> &TrajectoryState {
        &self.state
    }

    pub fn records(&self) -> &[ObservableRecord] {
        &self.records
    }

    /// Integrates up to exactly `t_target`.
    pub fn advance_to(&mut self, t_target: f64) -> Result<()> {
        if t_target.is_nan() || t_target < self.state.t {
            return Err(Error::invalid("t_target", format!("{t_target} lies before t = {}", self.state.t)));
        }
        let t_now = self.state.t;
        let mut stops: Vec<f64> = self
            .schedule
            .boundaries()
            .chain(self.snapshot_times.iter().copied())
            .filter(|&b| b > t_now && b < t_target)
            .collect();
        stops.push(t_target);
        stops.sort_by(f64::total_cmp);
        stops.dedup();
        for stop in stops {
            if stop > self.state.t {
                self.run_segment(stop)?;
            }
        }
        Ok(())
    }

    fn run_segment(&mut self, t_stop: f64) -> Result<()> {
        let t0 = self.state.t;
        let eta_p = self.schedule.eta_p_at(t0);
        let dt = self.params.dt;
        let n_steps = (((t_stop - t0) / dt) - 1e-9).ceil().max(1.0) as u64;
        for k in 1..=n_steps {
            let (h, t_next) = if k == n_steps {
                (t_stop - self.state.t, t_stop)
            } else {
                (dt, t0 + k as f64 * dt)
            };
            self.stepper.step(&mut self.state, eta_p, self.params, self.cfg, h, &mut self.noise)?;
            self.state.t = t_next;
            self.steps += 1;
            if self.steps.is_multiple_of(self.cfg.record_stride) && k != n_steps {
                self.records.push(self.state.observe());
            }
        }
        self.mark_instant();
        Ok(())
    }

    /// Records observables (and a snapshot when requested) at the current
    /// instant unless already recorded.
    fn mark_instant(&mut self) {
        let t = self.state.t;
        if self.records.last().is_none_or(|r| r.t != t) {
            self.records.push(self.state.observe());
        }
        if self.snapshot_times.contains(&t) && self.snapshots.last().is_none_or(|s| s.t != t) {
            self.snapshots.push(Snapshot { t, x: self.state.x.clone() });
        }
    }

    pub fn finish(self) -> Result<TrajectoryOutput> {
        self.state.validate(self.params.n_atoms)?;
        Ok(TrajectoryOutput { records: self.records, snapshots: self.snapshots, final_state: self.state })
    }
}

/// Integrates one trajectory from t = 0 (or from `initial`, whose time is
/// taken as the start) to `cfg.t_end`.
pub fn run_trajectory(
    params: &SimParams,
    schedule: &PumpSchedule,
    cfg: &IntegratorConfig,
    stream: &RngStream,
    initial: Option<TrajectoryState>,
    snapshot_times: &[f64],
) -> Result<TrajectoryOutput> {
    let mut traj = Trajectory::new(params, schedule, cfg, stream, initial, snapshot_times)?;
    traj.advance_to(cfg.t_end)?;
    traj.finish()
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::model::{bunching, order_parameter, steady_state_field};

    fn params(n: usize) -> SimParams {
        let nf = n as f64;
        SimParams {
            n_atoms: n,
            eta: 500.0 / nf.sqrt(),
            u0: -100.0 / nf,
            kappa: 100.0,
            delta_c: -150.0,
            temp_init: 200.0,
            dt: 1e-3,
            noise_on: false,
        }
    }

    #[test]
    fn expm1_matches_direct_formula() {
        for z in [Complex64::new(-1.0, 0.5), Complex64::new(-0.3, 2.0), Complex64::new(-10.0, -7.0)] {
            let direct = z.exp() - 1.0;
            let ours = complex_expm1(z);
            assert!((direct - ours).norm() <= 1e-14 * direct.norm(), "{z}: {direct} vs {ours}");
        }
        // series z + z²/2 + z³/6 is exact to rounding here
        let z = Complex64::new(-1e-6, 3e-6);
        let series = z + z * z / 2.0 + z * z * z / 6.0;
        let ours = complex_expm1(z);
        assert!((series - ours).norm() <= 1e-15 * z.norm(), "{series} vs {ours}");
    }

    #[test]
    fn thermal_momentum_variance() {
        let p = SimParams { n_atoms: 100_000, ..params(100) };
        let s = sample_initial(&p, &RngStream::new(11, 0, 0));
        let n = s.p.len() as f64;
        let mean = s.p.iter().sum::<f64>() / n;
        let var = s.p.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((var - 100.0).abs() < 1.5, "variance {var}");
        assert!(s.x.iter().all(|x| (0.0..TAU).contains(x)));
        assert_eq!(s.alpha, Complex64::new(0.0, 0.0));
        assert_eq!(s.t, 0.0);
    }

    #[test]
    fn initial_theta_statistics() {
        let p = params(200);
        let draws: Vec<f64> = (0..4000).map(|i| order_parameter(&sample_initial(&p, &RngStream::new(3, i, 0)).x)).collect();
        let m = draws.len() as f64;
        let mean = draws.iter().sum::<f64>() / m;
        let std = (draws.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt();
        let expected = 1.0 / (2.0 * 200.0f64).sqrt();
        assert!(mean.abs() < 4.0 * expected / m.sqrt(), "mean {mean}");
        assert!((std / expected - 1.0).abs() < 0.05, "std {std} vs {expected}");
    }

    #[test]
    fn sampling_is_deterministic() {
        let p = params(50);
        let s = RngStream::new(9, 4, 2);
        assert_eq!(sample_initial(&p, &s), sample_initial(&p, &s));
    }

    #[test]
    fn fixed_point_is_preserved() {
        let p = params(40);
        let base = sample_initial(&p, &RngStream::new(1, 0, 0));
        let eta_p = Complex64::new(-300.0, 80.0);
        let a_ss = steady_state_field(order_parameter(&base.x), bunching(&base.x), eta_p, &p);
        for (scheme, dt) in [(Scheme::EulerMaruyama, 1e-3), (Scheme::SplitExponential, 1e-2)] {
            let cfg = IntegratorConfig { freeze: Freeze::Atoms, ..IntegratorConfig::new(scheme, 1, 1.0) };
            let mut s = TrajectoryState { alpha: a_ss, ..base.clone() };
            let mut rng = RngStream::new(0, 0, 0).noise_rng();
            for _ in 0..100 {
                step(&mut s, eta_p, &p, &cfg, dt, &mut rng).unwrap();
                assert!((s.alpha - a_ss).norm() < 1e-12 * a_ss.norm().max(1.0), "{scheme:?}: {}", s.alpha);
            }
        }
    }

    #[test]
    fn free_field_decays_exponentially() {
        let p = SimParams { eta: 0.0, u0: 0.0, delta_c: -37.0, ..params(5) };
        let schedule = PumpSchedule::constant(Complex64::new(0.0, 0.0));
        let init = TrajectoryState { alpha: Complex64::new(1.0, 0.0), ..sample_initial(&p, &RngStream::new(0, 0, 0)) };
        for (scheme, dt, tol) in [(Scheme::SplitExponential, 1e-2, 1e-12), (Scheme::EulerMaruyama, 1e-5, 5e-3)] {
            let p = SimParams { dt, ..p.clone() };
            let cfg = IntegratorConfig::new(scheme, 1000, 0.05);
            let out = run_trajectory(&p, &schedule, &cfg, &RngStream::new(0, 0, 0), Some(init.clone()), &[]).unwrap();
            let got = out.final_state.alpha.norm();
            let want = (-p.kappa * 0.05f64).exp();
            assert!((got / want - 1.0).abs() < tol, "{scheme:?}: {got} vs {want}");
        }
    }

    #[test]
    fn euler_rejects_stiff_step() {
        let p = SimParams { dt: 2e-3, ..params(5) };
        let cfg = IntegratorConfig::new(Scheme::EulerMaruyama, 1, 1.0);
        assert!(cfg.validate(&p).is_err());
        let cfg = IntegratorConfig::new(Scheme::SplitExponential, 1, 1.0);
        assert!(cfg.validate(&p).is_ok());
    }

    #[test]
    fn rejects_non_finite_initial_state() {
        let p = params(3);
        let schedule = PumpSchedule::constant(Complex64::new(0.0, 0.0));
        let cfg = IntegratorConfig::new(Scheme::SplitExponential, 1, 1.0);
        let bad = TrajectoryState { x: vec![0.0, f64::NAN, 1.0], p: vec![0.0; 3], alpha: Complex64::new(0.0, 0.0), t: 0.0 };
        assert!(matches!(
            Trajectory::new(&p, &schedule, &cfg, &RngStream::new(0, 0, 0), Some(bad), &[]),
            Err(Error::NonFinite { .. })
        ));
        let short = TrajectoryState { x: vec![0.0], p: vec![0.0], alpha: Complex64::new(0.0, 0.0), t: 0.0 };
        assert!(Trajectory::new(&p, &schedule, &cfg, &RngStream::new(0, 0, 0), Some(short), &[]).is_err());
    }

    #[test]
    fn step_reports_blow_up() {
        let p = params(3);
        let cfg = IntegratorConfig::new(Scheme::SplitExponential, 1, 1.0);
        let mut s = TrajectoryState { x: vec![0.1; 3], p: vec![0.0; 3], alpha: Complex64::new(f64::INFINITY, 0.0), t: 0.0 };
        let mut rng = RngStream::new(0, 0, 0).noise_rng();
        assert!(step(&mut s, Complex64::new(0.0, 0.0), &p, &cfg, 1e-3, &mut rng).is_err());
    }

    #[test]
    fn steps_land_on_breakpoints() {
        let p = SimParams { dt: 0.3, ..params(4) };
        let schedule = PumpSchedule::new(vec![
            crate::model::PumpSegment { t_start: 0.0, eta_p: Complex64::new(0.0, 0.0) },
            crate::model::PumpSegment { t_start: 1.0, eta_p: Complex64::new(10.0, 0.0) },
        ])
        .unwrap();
        let cfg = IntegratorConfig::new(Scheme::SplitExponential, 2, 2.0);
        let out = run_trajectory(&p, &schedule, &cfg, &RngStream::new(0, 0, 0), None, &[0.5]).unwrap();
        let times: Vec<f64> = out.records.iter().map(|r| r.t).collect();
        // steps: 0.3 0.5 | 0.8 1.0 | 1.3 1.6 1.9 2.0, recorded every second step plus breakpoints
        let expect = [0.0, 0.5, 1.0, 1.6, 2.0];
        assert_eq!(times.len(), expect.len(), "{times:?}");
        for (a, b) in times.iter().zip(expect) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
        assert_eq!(out.snapshots.len(), 1);
        assert_eq!(out.snapshots[0].t, 0.5);
        assert_eq!(out.final_state.t, 2.0);
    }

    #[test]
    fn chained_run_matches_single_run() {
        let p = SimParams { noise_on: true, dt: 1e-2, ..params(30) };
        let schedule = PumpSchedule::new(vec![
            crate::model::PumpSegment { t_start: 0.0, eta_p: Complex64::new(0.0, 0.0) },
            crate::model::PumpSegment { t_start: 2.0, eta_p: Complex64::new(0.0, 2e4) },
            crate::model::PumpSegment { t_start: 2.1, eta_p: Complex64::new(500.0, 0.0) },
        ])
        .unwrap();
        let cfg = IntegratorConfig::new(Scheme::SplitExponential, 7, 4.0);
        let stream = RngStream::new(5, 1, 2);
        let whole = run_trajectory(&p, &schedule, &cfg, &stream, None, &[]).unwrap();
        let mut chained = Trajectory::new(&p, &schedule, &cfg, &stream, None, &[]).unwrap();
        for stop in [2.0, 2.1, 4.0] {
            chained.advance_to(stop).unwrap();
        }
        assert_eq!(whole, chained.finish().unwrap());
    }
}
