//! Conditional qubit evolution under continuous homodyne monitoring.
//!
//! In the qubit basis the Itô trajectory equation reads
//!
//! ```text
//! d rho11 = -2 sqrt(G_ci) rho11 rho22 dW
//! d rho12 = -(i W_q + G_d) rho12 dt + [sqrt(G_ci) <sz> + i sqrt(G_ba)] rho12 dW
//! I dt    = -sqrt(G_ci) <sz> dt + dW
//! ```
//!
//! with `W_q = omega_q + B(t)`. Its Stratonovich form, driven by the current
//! instead of the innovation, is
//!
//! ```text
//! rho11' = -2 sqrt(G_ci) rho11 rho22 I
//! rho12' = -(i W_q + G_d - G_m/2) rho12 + [sqrt(G_ci) <sz> + i sqrt(G_ba)] rho12 I
//! ```
//!
//! [`simulate_ito_on`] generates trajectories and records. The drift of rho12
//! is linear and is propagated exactly across each step; the noise terms use
//! Euler-Maruyama or Milstein. [`simulate_ito`] is the Euler-Maruyama variant;
//! [`simulate_stratonovich`] replays a record through the second form with
//! Heun's method. Rates are taken at interval midpoints throughout.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cavity::{
    build_rate_grid, cavity_fields, rates, step_count, CavityQubitParams, RateGrid, RateSample,
};
use crate::error::{Error, Result};
use crate::noise::{wiener_increments, NoiseSeed};
use crate::state::QubitState;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Excursions of rho11 outside [0, 1] smaller than this are clamped.
pub const OVERSHOOT_TOL: f64 = 1e-12;

/// A sampled homodyne current.
///
/// `currents[k]` is the mean current over `[t_k, t_k + dt)`. Records produced
/// by [`simulate_ito`] also carry the Wiener increments that generated them;
/// externally supplied records leave `increments` empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurrentRecord {
    pub dt: f64,
    pub t_m: f64,
    pub seed: Option<NoiseSeed>,
    pub increments: Vec<f64>,
    pub currents: Vec<f64>,
}

impl CurrentRecord {
    /// Wraps an externally measured (or synthetic) current.
    pub fn from_currents(dt: f64, currents: Vec<f64>) -> Result<Self> {
        if currents.is_empty() {
            return Err(Error::InvalidGrid("empty current record".into()));
        }
        if !(dt > 0.0) {
            return Err(Error::InvalidGrid(format!("dt must be > 0, got {dt}")));
        }
        Ok(Self {
            dt,
            t_m: currents.len() as f64 * dt,
            seed: None,
            increments: Vec::new(),
            currents,
        })
    }

    #[inline]
    pub fn steps(&self) -> usize {
        self.currents.len()
    }

    /// The first `steps` bins of the record.
    pub fn truncated(&self, steps: usize) -> CurrentRecord {
        let steps = steps.min(self.steps());
        CurrentRecord {
            dt: self.dt,
            t_m: steps as f64 * self.dt,
            seed: self.seed,
            increments: self.increments.iter().take(steps).copied().collect(),
            currents: self.currents[..steps].to_vec(),
        }
    }

    /// Trailing moving average of the current over `window` bins.
    pub fn coarse_grained(&self, window: usize) -> Vec<f64> {
        let window = window.max(1);
        let mut out = Vec::with_capacity(self.currents.len());
        let mut acc = 0.0;
        for (k, &c) in self.currents.iter().enumerate() {
            acc += c;
            if k >= window {
                acc -= self.currents[k - window];
            }
            out.push(acc / (k + 1).min(window) as f64);
        }
        out
    }
}

/// A qubit path on the grid `t_k = k dt`, `k = 0..=K`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: CavityQubitParams,
    pub dt: f64,
    pub states: Vec<QubitState>,
    /// `None` for deterministic references and ensemble means.
    pub record: Option<CurrentRecord>,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.states.len() - 1
    }

    pub fn endpoint(&self) -> QubitState {
        *self
            .states
            .last()
            .expect("trajectory has at least one state")
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }
}

/// Itô drift `G = (0, -(i W_q + G_d) rho12)`.
pub fn ito_drift(state: &QubitState, rate: &RateSample, omega_q: f64) -> (f64, Complex64) {
    let omega = omega_q + rate.b_shift;
    (0.0, -(I * omega + rate.gamma_d) * state.rho12)
}

/// Itô diffusion `F = (-2 sqrt(G_ci) rho11 rho22, [sqrt(G_ci) <sz> + i sqrt(G_ba)] rho12)`.
pub fn ito_diffusion(state: &QubitState, rate: &RateSample) -> (f64, Complex64) {
    let s = rate.sqrt_gamma_ci();
    let a = Complex64::new(s * state.sigma_z(), rate.sqrt_gamma_ba());
    (-2.0 * s * state.rho11 * state.rho22(), a * state.rho12)
}

/// Right-hand side of the Stratonovich equations driven by the current.
pub fn stratonovich_rhs(
    state: &QubitState,
    rate: &RateSample,
    omega_q: f64,
    current: f64,
) -> (f64, Complex64) {
    let s = rate.sqrt_gamma_ci();
    let omega = omega_q + rate.b_shift;
    let a = Complex64::new(s * state.sigma_z(), rate.sqrt_gamma_ba());
    let d11 = -2.0 * s * state.rho11 * state.rho22() * current;
    let d12 =
        -(I * omega + rate.gamma_d - 0.5 * rate.gamma_m) * state.rho12 + a * state.rho12 * current;
    (d11, d12)
}

/// Drift correction `-1/2 sum_i F_i dF_j/dY_i` that turns the Itô equations
/// into their Stratonovich form (`Y_1 = rho11`, `Y_2 = rho12`).
///
/// Adding it to [`ito_drift`] and rewriting the noise as
/// `xi = I + sqrt(G_ci) <sz>` reproduces [`stratonovich_rhs`].
pub fn stratonovich_drift_correction(state: &QubitState, rate: &RateSample) -> (f64, Complex64) {
    let s = rate.sqrt_gamma_ci();
    let (f1, f2) = ito_diffusion(state, rate);
    // dF1/dY1 = 2 sqrt(G_ci) <sz>; dF2/dY1 = 2 sqrt(G_ci) Y2; dF2/dY2 = a
    let df1_dy1 = 2.0 * s * state.sigma_z();
    let df2_dy1 = 2.0 * s * state.rho12;
    let df2_dy2 = Complex64::new(s * state.sigma_z(), rate.sqrt_gamma_ba());
    let d11 = -0.5 * f1 * df1_dy1;
    let d12 = -0.5 * (f1 * df2_dy1 + f2 * df2_dy2);
    (d11, d12)
}

/// `exp(-(i W_q + G_d) dt)`: the linear drift of rho12 solved over one step.
fn drift_propagator(rate: &RateSample, omega_q: f64, dt: f64) -> Complex64 {
    (-(I * (omega_q + rate.b_shift) + rate.gamma_d) * dt).exp()
}

fn settle_rho11(rho11: f64, step: usize, t: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&rho11) {
        Ok(rho11)
    } else if rho11 > -OVERSHOOT_TOL && rho11 < 1.0 + OVERSHOOT_TOL {
        Ok(rho11.clamp(0.0, 1.0))
    } else {
        Err(Error::StepOverflow { step, t, rho11 })
    }
}

fn check_stability(grid: &RateGrid) -> Result<()> {
    let guard = 2.0 * grid.max_gamma_ci().sqrt() * grid.dt;
    if guard >= 1.0 {
        return Err(Error::InvalidGrid(format!(
            "dt = {} too large: 2 sqrt(max gamma_ci) dt = {guard} >= 1",
            grid.dt
        )));
    }
    Ok(())
}

/// Discretization of the Itô equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ItoScheme {
    /// Strong order 1/2.
    EulerMaruyama,
    /// Euler-Maruyama plus `1/2 sum_i F_i dF/dY_i (dW^2 - dt)`; strong order 1
    /// since the equations are driven by a single Wiener process.
    #[default]
    Milstein,
}

impl std::str::FromStr for ItoScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "em" | "euler" | "euler-maruyama" => Ok(ItoScheme::EulerMaruyama),
            "milstein" => Ok(ItoScheme::Milstein),
            other => Err(Error::InvalidParams(format!(
                "unknown scheme '{other}' (expected em or milstein)"
            ))),
        }
    }
}

/// Euler-Maruyama integration of the Itô equations, generating the current
/// record `I_k = -sqrt(G_ci,k) <sz>_k + dW_k / dt` along the way.
pub fn simulate_ito(
    params: &CavityQubitParams,
    rho0: QubitState,
    t_m: f64,
    dt: f64,
    seed: NoiseSeed,
) -> Result<Trajectory> {
    let grid = build_rate_grid(params, t_m, dt)?;
    let increments = wiener_increments(seed, grid.steps, dt);
    simulate_ito_on(
        &grid,
        rho0,
        increments,
        Some(seed),
        ItoScheme::EulerMaruyama,
    )
}

/// Integrates the Itô equations on a prebuilt grid with given Wiener
/// increments.
pub fn simulate_ito_on(
    grid: &RateGrid,
    rho0: QubitState,
    increments: Vec<f64>,
    seed: Option<NoiseSeed>,
    scheme: ItoScheme,
) -> Result<Trajectory> {
    rho0.validate()?;
    if increments.len() != grid.steps {
        return Err(Error::MeshMismatch(format!(
            "{} increments for a grid of {} steps",
            increments.len(),
            grid.steps
        )));
    }
    check_stability(grid)?;
    let dt = grid.dt;
    let omega_q = grid.params.omega_q;
    let mut states = Vec::with_capacity(grid.steps + 1);
    let mut currents = Vec::with_capacity(grid.steps);
    let mut state = rho0;
    states.push(state);
    for (k, (rate, &dw)) in grid.samples.iter().zip(&increments).enumerate() {
        currents.push(-rate.sqrt_gamma_ci() * state.sigma_z() + dw / dt);
        let (f11, f12) = ito_diffusion(&state, rate);
        let mut rho11 = state.rho11 + f11 * dw;
        let mut rho12 = state.rho12 * drift_propagator(rate, omega_q, dt) + f12 * dw;
        if scheme == ItoScheme::Milstein {
            // the Milstein term is minus the Stratonovich drift correction
            let (c11, c12) = stratonovich_drift_correction(&state, rate);
            let w2 = dw * dw - dt;
            rho11 -= c11 * w2;
            rho12 -= c12 * w2;
        }
        state = QubitState {
            rho11: settle_rho11(rho11, k, grid.time(k + 1))?,
            rho12,
        };
        states.push(state);
    }
    Ok(Trajectory {
        params: grid.params,
        dt,
        states,
        record: Some(CurrentRecord {
            dt,
            t_m: grid.t_m(),
            seed,
            increments,
            currents,
        }),
    })
}

/// Heun integration of the Stratonovich equations driven by `record`.
pub fn simulate_stratonovich(
    params: &CavityQubitParams,
    rho0: QubitState,
    record: &CurrentRecord,
) -> Result<Trajectory> {
    let grid = build_rate_grid(params, record.t_m, record.dt)?;
    simulate_stratonovich_on(&grid, rho0, record)
}

/// [`simulate_stratonovich`] on a prebuilt grid.
pub fn simulate_stratonovich_on(
    grid: &RateGrid,
    rho0: QubitState,
    record: &CurrentRecord,
) -> Result<Trajectory> {
    rho0.validate()?;
    check_mesh(grid, record)?;
    let dt = grid.dt;
    let omega_q = grid.params.omega_q;
    let mut states = Vec::with_capacity(grid.steps + 1);
    let mut state = rho0;
    states.push(state);
    for (k, (rate, &current)) in grid.samples.iter().zip(&record.currents).enumerate() {
        let (a11, a12) = stratonovich_rhs(&state, rate, omega_q, current);
        let predictor = QubitState {
            rho11: state.rho11 + a11 * dt,
            rho12: state.rho12 + a12 * dt,
        };
        let (b11, b12) = stratonovich_rhs(&predictor, rate, omega_q, current);
        let rho11 = settle_rho11(state.rho11 + 0.5 * (a11 + b11) * dt, k, grid.time(k + 1))?;
        state = QubitState {
            rho11,
            rho12: state.rho12 + 0.5 * (a12 + b12) * dt,
        };
        states.push(state);
    }
    Ok(Trajectory {
        params: grid.params,
        dt,
        states,
        record: Some(record.clone()),
    })
}

pub(crate) fn check_mesh(grid: &RateGrid, record: &CurrentRecord) -> Result<()> {
    if record.steps() != grid.steps || (record.dt - grid.dt).abs() > 1e-15 * grid.dt {
        return Err(Error::MeshMismatch(format!(
            "record has {} bins of {}, grid has {} bins of {}",
            record.steps(),
            record.dt,
            grid.steps,
            grid.dt
        )));
    }
    Ok(())
}

/// Ensemble-averaged (unconditioned) evolution: `rho11` is constant and
/// `rho12' = -(i (omega_q + B(t)) + G_d(t)) rho12`, integrated with RK4 using
/// the closed-form fields at the RK4 stage times.
pub fn lindblad_reference(
    params: &CavityQubitParams,
    rho0: QubitState,
    t_m: f64,
    dt: f64,
) -> Result<Trajectory> {
    params.validate()?;
    rho0.validate()?;
    let steps = step_count(t_m, dt)?;
    let generator = |t: f64| -> Result<Complex64> {
        let r = rates(params, &cavity_fields(params, t)?);
        Ok(-(I * (params.omega_q + r.b_shift) + r.gamma_d))
    };
    let mut states = Vec::with_capacity(steps + 1);
    let mut rho12 = rho0.rho12;
    states.push(rho0);
    let mut g_start = generator(0.0)?;
    for k in 0..steps {
        let t = k as f64 * dt;
        let g_mid = generator(t + 0.5 * dt)?;
        let g_end = generator(t + dt)?;
        let k1 = g_start * rho12;
        let k2 = g_mid * (rho12 + 0.5 * dt * k1);
        let k3 = g_mid * (rho12 + 0.5 * dt * k2);
        let k4 = g_end * (rho12 + dt * k3);
        rho12 += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        states.push(QubitState {
            rho11: rho0.rho11,
            rho12,
        });
        g_start = g_end;
    }
    Ok(Trajectory {
        params: *params,
        dt,
        states,
        record: None,
    })
}

/// Pointwise mean of `rho11` and `rho12` over trajectories sharing one grid.
pub fn ensemble_average(trajectories: &[Trajectory]) -> Result<Trajectory> {
    let first = trajectories.first().ok_or(Error::EmptyEnsemble)?;
    let mut moments = EnsembleMoments::new(first.states.len());
    for traj in trajectories {
        if traj.states.len() != first.states.len()
            || traj.dt != first.dt
            || traj.params != first.params
        {
            return Err(Error::MeshMismatch(
                "ensemble members do not share grid and parameters".into(),
            ));
        }
        moments.add(&traj.states);
    }
    Ok(Trajectory {
        params: first.params,
        dt: first.dt,
        states: moments.mean(),
        record: None,
    })
}

/// Running mean and variance of `(rho11, Re rho12, Im rho12)` per grid point,
/// by Welford's update and Chan's pairwise merge. Both are deterministic, so
/// a fixed merge order gives bit-identical results regardless of how members
/// were produced.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleMoments {
    pub count: usize,
    mean: Vec<[f64; 3]>,
    /// Sums of squared deviations from the mean.
    m2: Vec<[f64; 3]>,
}

impl EnsembleMoments {
    pub fn new(points: usize) -> Self {
        Self {
            count: 0,
            mean: vec![[0.0; 3]; points],
            m2: vec![[0.0; 3]; points],
        }
    }

    pub fn points(&self) -> usize {
        self.mean.len()
    }

    pub fn add(&mut self, states: &[QubitState]) {
        debug_assert_eq!(states.len(), self.mean.len());
        self.count += 1;
        let n = self.count as f64;
        for ((m, q), st) in self.mean.iter_mut().zip(&mut self.m2).zip(states) {
            let v = [st.rho11, st.rho12.re, st.rho12.im];
            for c in 0..3 {
                let delta = v[c] - m[c];
                m[c] += delta / n;
                q[c] += delta * (v[c] - m[c]);
            }
        }
    }

    pub fn merge(&mut self, other: &EnsembleMoments) {
        debug_assert_eq!(other.mean.len(), self.mean.len());
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other.clone();
            return;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        for i in 0..self.mean.len() {
            for c in 0..3 {
                let delta = other.mean[i][c] - self.mean[i][c];
                self.mean[i][c] += delta * nb / n;
                self.m2[i][c] += other.m2[i][c] + delta * delta * na * nb / n;
            }
        }
        self.count += other.count;
    }

    pub fn mean(&self) -> Vec<QubitState> {
        self.mean
            .iter()
            .map(|m| QubitState {
                rho11: m[0],
                rho12: Complex64::new(m[1], m[2]),
            })
            .collect()
    }

    /// Standard error of the mean for each component at each grid point.
    pub fn standard_error(&self) -> Vec<[f64; 3]> {
        let n = self.count as f64;
        self.m2
            .iter()
            .map(|q| q.map(|q| (q / (n - 1.0) / n).sqrt()))
            .collect()
    }
}
