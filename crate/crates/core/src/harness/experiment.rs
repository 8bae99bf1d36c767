use rayon::prelude::*;
use serde::Serialize;

use crate::cavity::{build_rate_grid, step_count, RateGrid};
use crate::estimators::{estimate_path, Rule};
use crate::harness::{ExperimentConfig, HarnessError};
use crate::noise::{coarsen_increments, wiener_increments, NoiseSeed};
use crate::state::QubitState;
use crate::trajectory::{lindblad_reference, simulate_ito_on, EnsembleMoments, Trajectory};

/// Trajectories per ensemble chunk. Fixed so that the summation order, and
/// therefore every bit of the result, is independent of the worker count.
const ENSEMBLE_CHUNK: usize = 64;

pub const ENSEMBLE_MIN_TRAJECTORIES: usize = 100;
pub const ENSEMBLE_Z_THRESHOLD: f64 = 4.0;

/// Round-off floor added in quadrature to the standard error, so that
/// noiseless components (for instance at t = 0, or with no coupling) are
/// compared to ~1e-10 instead of dividing by zero.
const ENSEMBLE_SE_FLOOR: f64 = 1e-10;

/// Elementwise absolute differences `(rho11, Re rho12, Im rho12)` between a
/// rule and the trajectory equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RuleMetrics {
    pub rule: Rule,
    /// Maximum over the grid of each component's difference.
    pub max_abs: [f64; 3],
    pub endpoint_abs: [f64; 3],
}

impl RuleMetrics {
    fn from_paths(rule: Rule, qte: &[QubitState], est: &[QubitState]) -> Self {
        let mut max_abs = [0.0f64; 3];
        for (a, b) in qte.iter().zip(est) {
            for (m, d) in max_abs.iter_mut().zip(a.component_diff(b)) {
                *m = m.max(d);
            }
        }
        let endpoint_abs = qte.last().unwrap().component_diff(est.last().unwrap());
        Self {
            rule,
            max_abs,
            endpoint_abs,
        }
    }

    pub fn max_elementwise(&self) -> f64 {
        self.max_abs.iter().copied().fold(0.0, f64::max)
    }

    pub fn endpoint_elementwise(&self) -> f64 {
        self.endpoint_abs.iter().copied().fold(0.0, f64::max)
    }
}

/// Full time series of one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPaths {
    pub currents: Vec<f64>,
    /// Moving average of the current, for display only.
    pub coarse: Vec<f64>,
    pub qte: Vec<QubitState>,
    pub rules: Vec<(Rule, Vec<QubitState>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryReport {
    pub index: usize,
    pub seed: NoiseSeed,
    pub qte_endpoint: QubitState,
    pub endpoints: Vec<(Rule, QubitState)>,
    pub metrics: Vec<RuleMetrics>,
    /// Present for the first `keep_paths` trajectories only.
    pub paths: Option<TrajectoryPaths>,
}

impl TrajectoryReport {
    pub fn metric(&self, rule: Rule) -> Option<&RuleMetrics> {
        self.metrics.iter().find(|m| m.rule == rule)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub config: ExperimentConfig,
    pub steps: usize,
    pub trajectories: Vec<TrajectoryReport>,
}

impl EstimateReport {
    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps)
            .map(|k| k as f64 * self.config.dt)
            .collect()
    }

    /// Fraction of trajectories whose endpoint error under `worse` exceeds
    /// that under `better`.
    pub fn endpoint_ordering(&self, better: Rule, worse: Rule) -> Option<f64> {
        let mut hits = 0usize;
        for tr in &self.trajectories {
            let b = tr.metric(better)?.endpoint_elementwise();
            let w = tr.metric(worse)?.endpoint_elementwise();
            if w > b {
                hits += 1;
            }
        }
        Some(hits as f64 / self.trajectories.len() as f64)
    }

    /// Largest `max_t` error of `rule` across trajectories.
    pub fn worst_max_error(&self, rule: Rule) -> Option<f64> {
        self.trajectories
            .iter()
            .map(|tr| tr.metric(rule).map(RuleMetrics::max_elementwise))
            .try_fold(0.0f64, |acc, m| m.map(|m| acc.max(m)))
    }
}

/// Runs `f` over `0..n` in parallel and returns the results in index order.
/// The first failure by index wins, so errors are deterministic too.
fn indexed_map<T, F>(threads: Option<usize>, n: usize, f: F) -> Result<Vec<T>, HarnessError>
where
    T: Send,
    F: Fn(usize) -> Result<T, HarnessError> + Sync + Send,
{
    let run = || (0..n).into_par_iter().map(&f).collect::<Vec<_>>();
    let results = match threads {
        None => run(),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?
            .install(run),
    };
    results.into_iter().collect()
}

fn trajectory_seed(config: &ExperimentConfig, index: usize) -> NoiseSeed {
    NoiseSeed::new(config.seed, index as u64)
}

fn simulate(
    config: &ExperimentConfig,
    grid: &RateGrid,
    seed: NoiseSeed,
    increments: Vec<f64>,
) -> Result<Trajectory, HarnessError> {
    simulate_ito_on(grid, config.rho0, increments, Some(seed), config.scheme)
        .map_err(|e| HarnessError::for_seed(seed, e))
}

/// Simulates each trajectory, reconstructs it with every enabled rule at
/// every grid time, and measures the differences from the trajectory
/// equation.
pub fn run_compare(config: &ExperimentConfig) -> Result<EstimateReport, HarnessError> {
    config.validate()?;
    let grid = build_rate_grid(&config.params, config.t_m, config.dt)?;
    let rules = config.ordered_rules();
    let trajectories = indexed_map(config.threads, config.trajectories, |index| {
        let seed = trajectory_seed(config, index);
        let increments = wiener_increments(seed, grid.steps, grid.dt);
        let traj = simulate(config, &grid, seed, increments)?;
        let record = traj
            .record
            .as_ref()
            .expect("simulated trajectories carry a record");
        let mut metrics = Vec::with_capacity(rules.len());
        let mut endpoints = Vec::with_capacity(rules.len());
        let mut rule_paths = Vec::new();
        for &rule in &rules {
            let path = estimate_path(rule, &config.rho0, record, &grid)?;
            metrics.push(RuleMetrics::from_paths(rule, &traj.states, &path));
            endpoints.push((rule, *path.last().unwrap()));
            if index < config.keep_paths {
                rule_paths.push((rule, path));
            }
        }
        let paths = (index < config.keep_paths).then(|| TrajectoryPaths {
            currents: record.currents.clone(),
            coarse: record.coarse_grained(config.coarse_window),
            qte: traj.states.clone(),
            rules: rule_paths,
        });
        Ok(TrajectoryReport {
            index,
            seed,
            qte_endpoint: traj.endpoint(),
            endpoints,
            metrics,
            paths,
        })
    })?;
    Ok(EstimateReport {
        config: config.clone(),
        steps: grid.steps,
        trajectories,
    })
}

/// Mean over trajectories of each rule's `max_t` error at one step size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub dt: f64,
    /// `(rule, [rho11 error, rho12 error])`, the rho12 error being the larger
    /// of the real and imaginary parts.
    pub errors: Vec<(Rule, [f64; 2])>,
}

impl ConvergenceRow {
    pub fn error(&self, rule: Rule) -> Option<[f64; 2]> {
        self.errors
            .iter()
            .find(|(r, _)| *r == rule)
            .map(|(_, e)| *e)
    }
}

/// Sorts levels coarsest first and checks that each is a power-of-two
/// multiple of the finest. Returns the levels and their coarsening factors.
fn dyadic_levels(config: &ExperimentConfig) -> Result<Vec<(f64, usize)>, HarnessError> {
    let mut levels = config.dt_levels.clone();
    if levels.is_empty() {
        return Err(HarnessError::Config("no dt levels given".into()));
    }
    if let Some(bad) = levels.iter().find(|dt| !(dt.is_finite() && **dt > 0.0)) {
        return Err(HarnessError::Config(format!(
            "dt level must be positive, got {bad}"
        )));
    }
    levels.sort_by(|a, b| b.total_cmp(a));
    let finest = *levels.last().unwrap();
    let mut out = Vec::with_capacity(levels.len());
    for (i, &dt) in levels.iter().enumerate() {
        let ratio = dt / finest;
        let factor = ratio.round();
        let factor_int = factor as usize;
        if (ratio - factor).abs() > 1e-9 * factor || !factor_int.is_power_of_two() {
            return Err(HarnessError::Config(format!(
                "dt levels must be dyadically related: {dt} is {ratio} times {finest}"
            )));
        }
        if i > 0 && out.last().map(|&(_, f)| f) == Some(factor_int) {
            return Err(HarnessError::Config(format!("duplicate dt level {dt}")));
        }
        step_count(config.t_m, dt).map_err(|e| HarnessError::Config(e.to_string()))?;
        out.push((dt, factor_int));
    }
    Ok(out)
}

/// Max-over-time error of each rule against the trajectory equation at each
/// step size, all levels sharing one Brownian path per trajectory.
///
/// The path is sampled on the finest mesh; coarser levels sum consecutive
/// increments.
pub fn run_convergence(config: &ExperimentConfig) -> Result<Vec<ConvergenceRow>, HarnessError> {
    config.validate()?;
    let levels = dyadic_levels(config)?;
    let finest = levels.last().unwrap().0;
    let fine_steps = step_count(config.t_m, finest)?;
    let grids = levels
        .iter()
        .map(|&(dt, _)| build_rate_grid(&config.params, config.t_m, dt))
        .collect::<crate::Result<Vec<_>>>()?;
    let rules = config.ordered_rules();

    let per_trajectory = indexed_map(config.threads, config.trajectories, |index| {
        let seed = trajectory_seed(config, index);
        let fine = wiener_increments(seed, fine_steps, finest);
        let mut rows = Vec::with_capacity(levels.len());
        for (&(_, factor), grid) in levels.iter().zip(&grids) {
            let increments = coarsen_increments(&fine, factor)?;
            let traj = simulate(config, grid, seed, increments)?;
            let record = traj.record.as_ref().unwrap();
            let mut errs = Vec::with_capacity(rules.len());
            for &rule in &rules {
                let path = estimate_path(rule, &config.rho0, record, grid)?;
                let mut e = [0.0f64; 2];
                for (a, b) in traj.states.iter().zip(&path) {
                    let [d11, dre, dim] = a.component_diff(b);
                    e[0] = e[0].max(d11);
                    e[1] = e[1].max(dre.max(dim));
                }
                errs.push(e);
            }
            rows.push(errs);
        }
        Ok(rows)
    })?;

    let n = per_trajectory.len() as f64;
    Ok(levels
        .iter()
        .enumerate()
        .map(|(l, &(dt, _))| ConvergenceRow {
            dt,
            errors: rules
                .iter()
                .enumerate()
                .map(|(r, &rule)| {
                    let mut sum = [0.0; 2];
                    for tr in &per_trajectory {
                        sum[0] += tr[l][r][0];
                        sum[1] += tr[l][r][1];
                    }
                    (rule, [sum[0] / n, sum[1] / n])
                })
                .collect(),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnsemblePoint {
    pub t: f64,
    /// Components are `(rho11, Re rho12, Im rho12)` throughout.
    pub mean: [f64; 3],
    pub standard_error: [f64; 3],
    pub reference: [f64; 3],
    pub z: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleReport {
    pub trajectories: usize,
    pub points: Vec<EnsemblePoint>,
    /// Largest |z| of the diagonal element, whose mean must stay at its
    /// initial value.
    pub max_z_rho11: f64,
    pub max_z_rho12: f64,
    pub threshold: f64,
    pub pass: bool,
}

fn components(s: &QubitState) -> [f64; 3] {
    [s.rho11, s.rho12.re, s.rho12.im]
}

/// Compares the pointwise ensemble mean of the trajectories against the
/// unconditioned evolution.
pub fn run_ensemble_check(config: &ExperimentConfig) -> Result<EnsembleReport, HarnessError> {
    config.validate()?;
    if config.trajectories < ENSEMBLE_MIN_TRAJECTORIES {
        return Err(HarnessError::Config(format!(
            "ensemble check needs at least {ENSEMBLE_MIN_TRAJECTORIES} trajectories, got {}",
            config.trajectories
        )));
    }
    let grid = build_rate_grid(&config.params, config.t_m, config.dt)?;
    let reference = lindblad_reference(&config.params, config.rho0, config.t_m, config.dt)?;
    let chunks = config.trajectories.div_ceil(ENSEMBLE_CHUNK);
    let partial = indexed_map(config.threads, chunks, |chunk| {
        let mut moments = EnsembleMoments::new(grid.steps + 1);
        let end = ((chunk + 1) * ENSEMBLE_CHUNK).min(config.trajectories);
        for index in chunk * ENSEMBLE_CHUNK..end {
            let seed = trajectory_seed(config, index);
            let increments = wiener_increments(seed, grid.steps, grid.dt);
            moments.add(&simulate(config, &grid, seed, increments)?.states);
        }
        Ok(moments)
    })?;
    let mut moments = EnsembleMoments::new(grid.steps + 1);
    for m in &partial {
        moments.merge(m);
    }

    let mut max_z = [0.0f64; 3];
    let points = moments
        .mean()
        .iter()
        .zip(moments.standard_error())
        .zip(&reference.states)
        .enumerate()
        .map(|(k, ((mean, se), reference))| {
            let mean = components(mean);
            let reference = components(reference);
            let mut z = [0.0; 3];
            for c in 0..3 {
                z[c] = (mean[c] - reference[c]) / se[c].hypot(ENSEMBLE_SE_FLOOR);
                max_z[c] = max_z[c].max(z[c].abs());
            }
            EnsemblePoint {
                t: grid.time(k),
                mean,
                standard_error: se,
                reference,
                z,
            }
        })
        .collect();
    let max_z_rho12 = max_z[1].max(max_z[2]);
    Ok(EnsembleReport {
        trajectories: config.trajectories,
        points,
        max_z_rho11: max_z[0],
        max_z_rho12,
        threshold: ENSEMBLE_Z_THRESHOLD,
        pass: max_z[0] <= ENSEMBLE_Z_THRESHOLD && max_z_rho12 <= ENSEMBLE_Z_THRESHOLD,
    })
}
