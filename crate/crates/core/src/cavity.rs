//! Qubit-state-conditioned cavity fields and the measurement rates derived
//! from them.
//!
//! The driven, damped cavity relaxes towards one of two coherent states
//! depending on the qubit state. With the complex detunings
//! `d1 = (delta_r - chi) - i kappa/2` and `d2 = (delta_r + chi) - i kappa/2`
//! the fields obey `alpha_j' = -i eps_m - i d_j alpha_j`, whose closed-form
//! solution is
//!
//! ```text
//! alpha_j(t) = abar_j (1 - exp(-i d_j t)) + alpha0 exp(-i d_j t),   abar_j = -eps_m / d_j
//! ```
//!
//! From `beta = alpha2 - alpha1 = |beta| exp(i theta_beta)` the rates are
//!
//! ```text
//! gamma_ci = kappa |beta|^2 cos^2(phi - theta_beta)
//! gamma_ba = kappa |beta|^2 sin^2(phi - theta_beta)
//! gamma_d  = 2 chi Im[alpha1 conj(alpha2)]
//! B        = 2 chi Re[alpha1 conj(alpha2)]
//! ```
//!
//! All quantities are in units of the drive amplitude `eps_m`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Physical constants of the dispersive readout setup.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityQubitParams {
    /// Cavity-drive detuning.
    pub delta_r: f64,
    /// Dispersive coupling.
    pub chi: f64,
    /// Cavity leakage rate.
    pub kappa: f64,
    /// Drive amplitude; sets the unit scale.
    pub epsilon_m: f64,
    /// Local-oscillator phase, radians in `[0, 2 pi)`.
    pub phi: f64,
    /// Effective qubit frequency before the ac-Stark shift.
    pub omega_q: f64,
    /// Initial cavity field.
    pub alpha0: Complex64,
}

impl CavityQubitParams {
    /// The reduced-unit setup used for the reference comparison runs
    /// (`delta_r = 0`, `eps_m = 1`, `kappa = 2`, `phi = pi/4`, vacuum start).
    pub fn reference(chi: f64) -> Self {
        Self {
            delta_r: 0.0,
            chi,
            kappa: 2.0,
            epsilon_m: 1.0,
            phi: std::f64::consts::FRAC_PI_4,
            omega_q: 0.0,
            alpha0: Complex64::new(0.0, 0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.delta_r,
            self.chi,
            self.kappa,
            self.epsilon_m,
            self.phi,
            self.omega_q,
            self.alpha0.re,
            self.alpha0.im,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParams(format!(
                "non-finite value in {self:?}"
            )));
        }
        if self.kappa <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "kappa must be > 0, got {}",
                self.kappa
            )));
        }
        if self.chi < 0.0 {
            return Err(Error::InvalidParams(format!(
                "chi must be >= 0, got {}",
                self.chi
            )));
        }
        if !(0.0..TAU).contains(&self.phi) {
            return Err(Error::InvalidParams(format!(
                "phi must lie in [0, 2pi), got {}",
                self.phi
            )));
        }
        Ok(())
    }
}

/// Cavity fields conditioned on qubit states |1> and |2> at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldPair {
    pub alpha1: Complex64,
    pub alpha2: Complex64,
    /// `f64::INFINITY` for steady-state fields.
    pub t: f64,
}

/// Measurement rates and ac-Stark shift at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSample {
    pub gamma_ci: f64,
    pub gamma_ba: f64,
    pub gamma_d: f64,
    pub gamma_m: f64,
    pub b_shift: f64,
    pub beta_mod: f64,
    pub beta_arg: f64,
}

impl RateSample {
    pub const ZERO: RateSample = RateSample {
        gamma_ci: 0.0,
        gamma_ba: 0.0,
        gamma_d: 0.0,
        gamma_m: 0.0,
        b_shift: 0.0,
        beta_mod: 0.0,
        beta_arg: 0.0,
    };

    #[inline]
    pub fn sqrt_gamma_ci(&self) -> f64 {
        self.gamma_ci.sqrt()
    }

    #[inline]
    pub fn sqrt_gamma_ba(&self) -> f64 {
        self.gamma_ba.sqrt()
    }
}

/// Complex detunings `(d1, d2)` for qubit states |1> and |2>.
///
/// State |1> pairs with `delta_r - chi`; this is the assignment for which the
/// steady-state `gamma_d` is positive and equal to `gamma_m / 2`.
pub fn effective_detunings(params: &CavityQubitParams) -> (Complex64, Complex64) {
    let damping = -0.5 * params.kappa;
    (
        Complex64::new(params.delta_r - params.chi, damping),
        Complex64::new(params.delta_r + params.chi, damping),
    )
}

fn steady_field(params: &CavityQubitParams, d: Complex64) -> Result<Complex64> {
    if d.norm() == 0.0 {
        return Err(Error::InvalidParams(
            "vanishing complex detuning (kappa = 0)".into(),
        ));
    }
    Ok(-params.epsilon_m / d)
}

/// Closed-form cavity fields at time `t >= 0`.
pub fn cavity_fields(params: &CavityQubitParams, t: f64) -> Result<FieldPair> {
    if !(t >= 0.0) {
        return Err(Error::InvalidGrid(format!("negative or NaN time {t}")));
    }
    let (d1, d2) = effective_detunings(params);
    let field = |d: Complex64| -> Result<Complex64> {
        let abar = steady_field(params, d)?;
        let decay = (-I * d * t).exp();
        Ok(abar * (1.0 - decay) + params.alpha0 * decay)
    };
    Ok(FieldPair {
        alpha1: field(d1)?,
        alpha2: field(d2)?,
        t,
    })
}

/// Steady-state fields `abar_j = -eps_m / d_j`.
pub fn steady_fields(params: &CavityQubitParams) -> Result<FieldPair> {
    let (d1, d2) = effective_detunings(params);
    Ok(FieldPair {
        alpha1: steady_field(params, d1)?,
        alpha2: steady_field(params, d2)?,
        t: f64::INFINITY,
    })
}

/// Measurement rates for a pair of conditional fields.
pub fn rates(params: &CavityQubitParams, fields: &FieldPair) -> RateSample {
    let beta = fields.alpha2 - fields.alpha1;
    let beta_mod = beta.norm();
    // theta_beta is irrelevant at beta = 0 (everything carries |beta|^2).
    let beta_arg = if beta_mod == 0.0 { 0.0 } else { beta.arg() };
    let strength = params.kappa * beta_mod * beta_mod;
    let angle = params.phi - beta_arg;
    let gamma_ci = strength * angle.cos().powi(2);
    let gamma_ba = strength * angle.sin().powi(2);
    let overlap = fields.alpha1 * fields.alpha2.conj();
    RateSample {
        gamma_ci,
        gamma_ba,
        gamma_d: 2.0 * params.chi * overlap.im,
        gamma_m: gamma_ci + gamma_ba,
        b_shift: 2.0 * params.chi * overlap.re,
        beta_mod,
        beta_arg,
    }
}

/// Rates once the cavity has settled.
pub fn steady_rates(params: &CavityQubitParams) -> Result<RateSample> {
    Ok(rates(params, &steady_fields(params)?))
}

/// Number of steps `K = t_m / dt`, rejecting meshes that do not tile `[0, t_m]`.
pub fn step_count(t_m: f64, dt: f64) -> Result<usize> {
    if !(t_m > 0.0 && t_m.is_finite()) {
        return Err(Error::InvalidGrid(format!("t_m must be > 0, got {t_m}")));
    }
    if !(dt > 0.0 && dt <= t_m) {
        return Err(Error::InvalidGrid(format!(
            "dt must satisfy 0 < dt <= t_m, got dt = {dt}, t_m = {t_m}"
        )));
    }
    let ratio = t_m / dt;
    let k = ratio.round();
    if (ratio - k).abs() > 2.0 * f64::EPSILON * k {
        return Err(Error::InvalidGrid(format!(
            "t_m / dt = {ratio} is not an integer"
        )));
    }
    Ok(k as usize)
}

/// Rates and fields on a uniform grid `t_k = k dt`, `k = 0..=K`, sampled at
/// the interval midpoints `t_k + dt/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateGrid {
    pub params: CavityQubitParams,
    pub dt: f64,
    pub steps: usize,
    pub samples: Vec<RateSample>,
    pub fields: Vec<FieldPair>,
}

impl RateGrid {
    #[inline]
    pub fn t_m(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    /// Grid time `t_k`.
    #[inline]
    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| self.time(k)).collect()
    }

    /// A grid whose rates are frozen at their steady-state values.
    pub fn constant(params: &CavityQubitParams, t_m: f64, dt: f64) -> Result<Self> {
        params.validate()?;
        let steps = step_count(t_m, dt)?;
        let fields = steady_fields(params)?;
        let sample = rates(params, &fields);
        Ok(Self {
            params: *params,
            dt,
            steps,
            samples: vec![sample; steps],
            fields: vec![fields; steps],
        })
    }

    pub fn max_gamma_ci(&self) -> f64 {
        self.samples.iter().map(|s| s.gamma_ci).fold(0.0, f64::max)
    }
}

/// Evaluates fields and rates at every interval midpoint.
pub fn build_rate_grid(params: &CavityQubitParams, t_m: f64, dt: f64) -> Result<RateGrid> {
    params.validate()?;
    let steps = step_count(t_m, dt)?;
    let fields = (0..steps)
        .map(|k| cavity_fields(params, (k as f64 + 0.5) * dt))
        .collect::<Result<Vec<_>>>()?;
    let samples = fields.iter().map(|f| rates(params, f)).collect();
    Ok(RateGrid {
        params: *params,
        dt,
        steps,
        samples,
        fields,
    })
}

/// RK4 integration of the field equations, returning the fields at every
/// grid time `t_k`, `k = 0..=K`. Used as an independent check of
/// [`cavity_fields`].
pub fn integrate_fields_ode(
    params: &CavityQubitParams,
    t_m: f64,
    dt: f64,
) -> Result<Vec<FieldPair>> {
    params.validate()?;
    let steps = step_count(t_m, dt)?;
    let (d1, d2) = effective_detunings(params);
    let drive = -I * params.epsilon_m;
    let rhs = |d: Complex64, a: Complex64| drive - I * d * a;
    let rk4 = |d: Complex64, a: Complex64| {
        let k1 = rhs(d, a);
        let k2 = rhs(d, a + 0.5 * dt * k1);
        let k3 = rhs(d, a + 0.5 * dt * k2);
        let k4 = rhs(d, a + dt * k3);
        a + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    };
    let mut out = Vec::with_capacity(steps + 1);
    let (mut a1, mut a2) = (params.alpha0, params.alpha0);
    out.push(FieldPair {
        alpha1: a1,
        alpha2: a2,
        t: 0.0,
    });
    for k in 1..=steps {
        a1 = rk4(d1, a1);
        a2 = rk4(d2, a2);
        out.push(FieldPair {
            alpha1: a1,
            alpha2: a2,
            t: k as f64 * dt,
        });
    }
    Ok(out)
}
