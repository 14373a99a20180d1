//! Parallel trajectory ensembles and their reductions.
//!
//! Trajectory (i, j) uses `RngStream(master_seed, i, j)`: the initial state
//! depends on i only, the cavity noise on both. Results are collected in
//! (i, j) order and every reduction walks them in that order, so the output
//! is the same for any worker count.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ObservableRecord, PumpSchedule, SimParams};
use crate::rng::RngStream;
use crate::sde::{run_trajectory, IntegratorConfig, Snapshot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    /// Number of independent initial conditions.
    pub n_init: u64,
    /// Noise realizations per initial condition.
    pub n_noise: u64,
    #[serde(default)]
    pub master_seed: u64,
}

impl EnsembleSpec {
    pub fn new(n_init: u64, n_noise: u64, master_seed: u64) -> Self {
        Self { n_init, n_noise, master_seed }
    }

    pub fn len(&self) -> u64 {
        self.n_init * self.n_noise
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_init == 0 {
            return Err(Error::invalid("n_init", "must be at least 1"));
        }
        if self.n_noise == 0 {
            return Err(Error::invalid("n_noise", "must be at least 1"));
        }
        Ok(())
    }

    /// Streams in (i, j) row-major order.
    pub fn streams(&self) -> impl Iterator<Item = RngStream> + '_ {
        (0..self.n_init)
            .flat_map(move |i| (0..self.n_noise).map(move |j| RngStream::new(self.master_seed, i, j)))
    }
}

/// Output of one ensemble member.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryResult {
    pub init_index: u64,
    pub noise_index: u64,
    pub records: Vec<ObservableRecord>,
    pub snapshots: Vec<Snapshot>,
}

impl TrajectoryResult {
    pub fn final_record(&self) -> &ObservableRecord {
        self.records.last().expect("trajectory has at least its initial record")
    }

    pub fn record_at(&self, t: f64) -> Option<&ObservableRecord> {
        self.records.iter().find(|r| same_time(r.t, t))
    }

    /// First recorded time at which `pred(theta)` holds.
    pub fn first_time(&self, pred: impl Fn(f64) -> bool) -> Option<f64> {
        self.records.iter().find(|r| pred(r.theta)).map(|r| r.t)
    }
}

fn same_time(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Ensemble mean and spread of the observables at one recorded instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub t: f64,
    pub theta_mean: f64,
    pub theta_std: f64,
    pub abs_theta_mean: f64,
    pub bunching_mean: f64,
    pub bunching_std: f64,
    pub photon_number_mean: f64,
    pub re_alpha_mean: f64,
    pub im_alpha_mean: f64,
    pub odd_fraction: f64,
}

/// Normalized position density on [0, 2π).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub t: f64,
    pub bin_centers: Vec<f64>,
    pub density: Vec<f64>,
}

impl Histogram {
    pub fn bin_width(&self) -> f64 {
        TAU / self.density.len() as f64
    }

    /// ∫ density dx, 1 up to rounding.
    pub fn integral(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.bin_width()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub spec: EnsembleSpec,
    /// Members in (i, j) row-major order.
    pub trajectories: Vec<TrajectoryResult>,
    pub aggregate: Vec<AggregateRow>,
}

impl EnsembleResult {
    /// Builds the aggregate series. All members must share one time grid.
    pub fn new(spec: EnsembleSpec, trajectories: Vec<TrajectoryResult>) -> Result<Self> {
        let first = trajectories.first().ok_or_else(|| Error::invalid("ensemble", "no trajectories"))?;
        let times: Vec<f64> = first.records.iter().map(|r| r.t).collect();
        for tr in &trajectories {
            if tr.records.len() != times.len() || tr.records.iter().zip(&times).any(|(r, &t)| r.t != t) {
                return Err(Error::invalid("ensemble", "trajectories recorded on different time grids"));
            }
        }
        let aggregate = (0..times.len()).map(|k| aggregate_row(&trajectories, k)).collect();
        Ok(Self { spec, trajectories, aggregate })
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn record_times(&self) -> Vec<f64> {
        self.aggregate.iter().map(|a| a.t).collect()
    }

    pub fn final_thetas(&self) -> Vec<f64> {
        self.trajectories.iter().map(|t| t.final_record().theta).collect()
    }

    pub fn final_bunchings(&self) -> Vec<f64> {
        self.trajectories.iter().map(|t| t.final_record().bunching).collect()
    }

    fn record_index(&self, at_time: f64) -> Result<usize> {
        self.aggregate
            .iter()
            .position(|a| same_time(a.t, at_time))
            .ok_or(Error::UnrecordedTime(at_time))
    }

    /// Θ of every member at a recorded instant.
    pub fn thetas_at(&self, at_time: f64) -> Result<Vec<f64>> {
        let k = self.record_index(at_time)?;
        Ok(self.trajectories.iter().map(|t| t.records[k].theta).collect())
    }

    /// Fraction of members with Θ < 0 strictly; Θ = 0 counts as even.
    pub fn odd_fraction(&self, at_time: f64) -> Result<f64> {
        Ok(self.aggregate[self.record_index(at_time)?].odd_fraction)
    }

    /// (odd, even) fractions at the final instant; they sum to 1.
    pub fn sign_fractions(&self) -> (f64, f64) {
        let odd = self.aggregate.last().map_or(0.0, |a| a.odd_fraction);
        (odd, 1.0 - odd)
    }

    /// Position density pooled over all members at a snapshot time.
    pub fn position_histogram(&self, at_time: f64, n_bins: usize) -> Result<Histogram> {
        if n_bins == 0 {
            return Err(Error::invalid("n_bins", "must be at least 1"));
        }
        let mut counts = vec![0u64; n_bins];
        let mut total = 0u64;
        for tr in &self.trajectories {
            let snap = tr
                .snapshots
                .iter()
                .find(|s| same_time(s.t, at_time))
                .ok_or(Error::MissingSnapshot(at_time))?;
            for &x in &snap.x {
                let bin = ((x / TAU) * n_bins as f64) as usize;
                counts[bin.min(n_bins - 1)] += 1;
                total += 1;
            }
        }
        let width = TAU / n_bins as f64;
        let bin_centers = (0..n_bins).map(|b| (b as f64 + 0.5) * width).collect();
        let density = counts.iter().map(|&c| c as f64 / (total as f64 * width)).collect();
        Ok(Histogram { t: at_time, bin_centers, density })
    }
}

/// Free-function form of [`EnsembleResult::odd_fraction`].
pub fn odd_fraction(result: &EnsembleResult, at_time: f64) -> Result<f64> {
    result.odd_fraction(at_time)
}

/// Free-function form of [`EnsembleResult::position_histogram`].
pub fn position_histogram(result: &EnsembleResult, at_time: f64, n_bins: usize) -> Result<Histogram> {
    result.position_histogram(at_time, n_bins)
}

fn aggregate_row(trajectories: &[TrajectoryResult], k: usize) -> AggregateRow {
    let column = |f: fn(&ObservableRecord) -> f64| -> Vec<f64> { trajectories.iter().map(|t| f(&t.records[k])).collect() };
    let theta = column(|r| r.theta);
    let bunching = column(|r| r.bunching);
    let (theta_mean, theta_std) = mean_std(&theta);
    let (bunching_mean, bunching_std) = mean_std(&bunching);
    let m = trajectories.len() as f64;
    let abs_theta: Vec<f64> = theta.iter().map(|v| v.abs()).collect();
    AggregateRow {
        t: trajectories[0].records[k].t,
        theta_mean,
        theta_std,
        abs_theta_mean: pairwise_sum(&abs_theta) / m,
        bunching_mean,
        bunching_std,
        photon_number_mean: pairwise_sum(&column(|r| r.photon_number)) / m,
        re_alpha_mean: pairwise_sum(&column(|r| r.re_alpha)) / m,
        im_alpha_mean: pairwise_sum(&column(|r| r.im_alpha)) / m,
        odd_fraction: theta.iter().filter(|&&v| v < 0.0).count() as f64 / m,
    }
}

/// Sum with a fixed binary reduction tree.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n if n <= 8 => v.iter().sum(),
        n => {
            let (a, b) = v.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_std(v: &[f64]) -> (f64, f64) {
    let m = v.len() as f64;
    let mean = pairwise_sum(v) / m;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let dev: Vec<f64> = v.iter().map(|x| (x - mean) * (x - mean)).collect();
    (mean, (pairwise_sum(&dev) / (m - 1.0)).sqrt())
}

/// Execution options that do not affect results.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; 0 uses rayon's default.
    pub workers: usize,
    /// Instants at which full positions are kept for histograms.
    pub snapshot_times: Vec<f64>,
}

/// Runs all `spec.len()` trajectories. The first failure aborts the
/// ensemble and names the failing (i, j).
pub fn run_ensemble(
    params: &SimParams,
    schedule: &PumpSchedule,
    cfg: &IntegratorConfig,
    spec: &EnsembleSpec,
    options: &RunOptions,
) -> Result<EnsembleResult> {
    spec.validate()?;
    params.validate()?;
    cfg.validate(params)?;
    let streams: Vec<RngStream> = spec.streams().collect();
    let run_one = |stream: &RngStream| -> Result<TrajectoryResult> {
        run_trajectory(params, schedule, cfg, stream, None, &options.snapshot_times)
            .map(|out| TrajectoryResult {
                init_index: stream.init_index,
                noise_index: stream.noise_index,
                records: out.records,
                snapshots: out.snapshots,
            })
            .map_err(|e| Error::Trajectory {
                init_index: stream.init_index,
                noise_index: stream.noise_index,
                source: Box::new(e),
            })
    };
    let trajectories = if options.workers == 1 {
        streams.iter().map(run_one).collect::<Result<Vec<_>>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.workers)
            .build()
            .map_err(|e| Error::ThreadPool(e.to_string()))?;
        pool.install(|| streams.par_iter().map(run_one).collect::<Result<Vec<_>>>())?
    };
    EnsembleResult::new(*spec, trajectories)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_2;

    use num_complex::Complex64;

    use super::*;
    use crate::sde::Scheme;

    fn params(n: usize) -> SimParams {
        let nf = n as f64;
        SimParams {
            n_atoms: n,
            eta: 500.0 / nf.sqrt(),
            u0: -100.0 / nf,
            kappa: 100.0,
            delta_c: -150.0,
            temp_init: 200.0,
            dt: 5e-3,
            noise_on: true,
        }
    }

    fn fake(theta: &[f64]) -> EnsembleResult {
        let trajectories = theta
            .iter()
            .enumerate()
            .map(|(k, &th)| TrajectoryResult {
                init_index: k as u64,
                noise_index: 0,
                records: vec![
                    ObservableRecord::new(0.0, 0.0, 0.5, Complex64::new(0.0, 0.0)),
                    ObservableRecord::new(1.0, th, 0.5, Complex64::new(0.0, 0.0)),
                ],
                snapshots: vec![Snapshot { t: 1.0, x: vec![FRAC_PI_2; 4] }],
            })
            .collect();
        EnsembleResult::new(EnsembleSpec::new(theta.len() as u64, 1, 0), trajectories).unwrap()
    }

    #[test]
    fn odd_fraction_is_strict() {
        let r = fake(&[-0.5, 0.0, 0.3, -0.1]);
        assert_eq!(r.odd_fraction(1.0).unwrap(), 0.5);
        assert_eq!(r.odd_fraction(0.0).unwrap(), 0.0);
        let (odd, even) = r.sign_fractions();
        assert_eq!(odd + even, 1.0);
        assert!(matches!(r.odd_fraction(0.5), Err(Error::UnrecordedTime(_))));
    }

    #[test]
    fn delta_histogram() {
        let r = fake(&[1.0, 1.0]);
        let h = r.position_histogram(1.0, 8).unwrap();
        let nonzero: Vec<usize> = h.density.iter().enumerate().filter(|(_, d)| **d > 0.0).map(|(k, _)| k).collect();
        assert_eq!(nonzero, vec![2]);
        assert!((h.integral() - 1.0).abs() < 1e-12);
        assert!(matches!(r.position_histogram(0.0, 8), Err(Error::MissingSnapshot(_))));
        assert!(r.position_histogram(1.0, 0).is_err());
    }

    #[test]
    fn pairwise_sum_matches_naive() {
        let v: Vec<f64> = (0..1000).map(|k| (k as f64).sin()).collect();
        assert!((pairwise_sum(&v) - v.iter().sum::<f64>()).abs() < 1e-12);
        assert_eq!(mean_std(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rejects_empty_spec() {
        let p = params(10);
        let cfg = IntegratorConfig::new(Scheme::SplitExponential, 10, 0.1);
        let s = PumpSchedule::constant(Complex64::new(0.0, 0.0));
        assert!(run_ensemble(&p, &s, &cfg, &EnsembleSpec::new(0, 3, 1), &RunOptions::default()).is_err());
    }

    #[test]
    fn noise_free_duplicates_are_identical() {
        let p = SimParams { noise_on: false, ..params(20) };
        let cfg = IntegratorConfig::new(Scheme::SplitExponential, 10, 0.5);
        let s = PumpSchedule::constant(Complex64::new(0.0, 0.0));
        let r = run_ensemble(&p, &s, &cfg, &EnsembleSpec::new(2, 2, 9), &RunOptions { workers: 2, ..Default::default() }).unwrap();
        assert_eq!(r.trajectories[0].records, r.trajectories[1].records);
        assert_eq!(r.trajectories[2].records, r.trajectories[3].records);
        assert_ne!(r.trajectories[0].records, r.trajectories[2].records);
    }

    #[test]
    fn shared_initial_state_per_init_index() {
        let p = params(20);
        let cfg = IntegratorConfig::new(Scheme::SplitExponential, 10, 0.5);
        let s = PumpSchedule::constant(Complex64::new(0.0, 0.0));
        let r = run_ensemble(&p, &s, &cfg, &EnsembleSpec::new(2, 3, 9), &RunOptions { workers: 1, snapshot_times: vec![0.0] }).unwrap();
        assert_eq!(r.trajectories[0].snapshots, r.trajectories[2].snapshots);
        assert_ne!(r.trajectories[0].snapshots, r.trajectories[3].snapshots);
        // noise differs
        assert_ne!(r.trajectories[0].records, r.trajectories[1].records);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let p = params(30);
        let cfg = IntegratorConfig::new(Scheme::SplitExponential, 7, 0.4);
        let s = PumpSchedule::constant(Complex64::new(250.0, 0.0));
        let spec = EnsembleSpec::new(3, 2, 77);
        let one = run_ensemble(&p, &s, &cfg, &spec, &RunOptions { workers: 1, snapshot_times: vec![0.2] }).unwrap();
        let many = run_ensemble(&p, &s, &cfg, &spec, &RunOptions { workers: 8, snapshot_times: vec![0.2] }).unwrap();
        assert_eq!(one, many);
    }

    #[test]
    fn failure_names_trajectory() {
        // the field overflows on the first step
        let p = params(5);
        let cfg = IntegratorConfig::new(Scheme::SplitExponential, 7, 0.1);
        let s = PumpSchedule::constant(Complex64::new(f64::MAX, f64::MAX));
        let err = run_ensemble(&p, &s, &cfg, &EnsembleSpec::new(1, 1, 0), &RunOptions { workers: 1, ..Default::default() }).unwrap_err();
        assert!(matches!(err, Error::Trajectory { init_index: 0, noise_index: 0, .. }), "{err}");
    }
}
