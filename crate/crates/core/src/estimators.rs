//! One-step Bayesian reconstruction of the qubit state from a current record.
//!
//! Integrating the Stratonovich trajectory equations in closed form gives
//!
//! ```text
//! rho_jj(t) = rho_jj(0) P_j / N,        N = rho11(0) P1 + rho22(0) P2
//! rho12(t)  = rho12(0) sqrt(P1 P2) / N * D * exp(-i (Phi1 + Phi2))
//! ```
//!
//! with the record-dependent likelihoods
//! `P_{1,2} = exp(-1/2 int (I - Ibar_{1,2})^2 dt)`, `Ibar_{1,2} = -/+ sqrt(G_ci)`,
//! and the correction factors
//!
//! ```text
//! D    = exp(-int (G_d - G_m/2) dt)
//! Phi1 = int (omega_q + B) dt
//! Phi2 = -int sqrt(G_ba) I dt
//! ```
//!
//! This is the exact rule ([`Rule::Exact`]). Two approximations are provided
//! for comparison: [`Rule::Gaussian`] keeps `D`, `Phi1`, `Phi2` but replaces
//! the likelihoods by Gaussians in the time-averaged current, and
//! [`Rule::Korotkov`] additionally freezes every rate at its steady-state
//! value and sets `D = 1`, which is only valid deep in the bad-cavity limit.
//!
//! Likelihoods are kept in log space and shifted so that the larger one is 1;
//! only their ratio and geometric mean enter the update. Integrals use
//! midpoint rates times per-bin currents. The rates are deterministic, so the
//! Itô/Stratonovich distinction does not arise for these integrals.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cavity::{steady_rates, CavityQubitParams, RateGrid, RateSample};
use crate::error::{Error, Result};
use crate::state::QubitState;
use crate::trajectory::{check_mesh, CurrentRecord};

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Record-dependent and deterministic factors entering the exact rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BayesFactors {
    /// `X = int sqrt(G_ci) I dt`.
    pub x: f64,
    /// `ln P1`, shifted so that `max(ln P1, ln P2) = 0`.
    pub log_p1: f64,
    /// `ln P2`, same shift as `log_p1`.
    pub log_p2: f64,
    pub d: f64,
    pub phi1: f64,
    pub phi2: f64,
    /// Variance parameter `V = 1 / t_m`.
    pub v: f64,
}

impl BayesFactors {
    pub fn p1(&self) -> f64 {
        self.log_p1.exp()
    }

    pub fn p2(&self) -> f64 {
        self.log_p2.exp()
    }

    /// `N = rho11(0) P1 + rho22(0) P2` for the prior `rho0`.
    pub fn normalization(&self, rho0: &QubitState) -> f64 {
        rho0.rho11 * self.p1() + rho0.rho22() * self.p2()
    }
}

/// Which reconstruction rule to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rule {
    /// Exact rule: path likelihoods plus `D`, `Phi1`, `Phi2`.
    #[serde(rename = "E")]
    Exact,
    /// Gaussian likelihoods in the mean current, exact correction factors.
    #[serde(rename = "G")]
    Gaussian,
    /// Bad-cavity rule: steady-state constant rates, Gaussian likelihoods, `D = 1`.
    #[serde(rename = "K")]
    Korotkov,
}

impl Rule {
    pub const ALL: [Rule; 3] = [Rule::Exact, Rule::Gaussian, Rule::Korotkov];

    pub fn letter(&self) -> &'static str {
        match self {
            Rule::Exact => "E",
            Rule::Gaussian => "G",
            Rule::Korotkov => "K",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.letter())
    }
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "E" | "e" => Ok(Rule::Exact),
            "G" | "g" => Ok(Rule::Gaussian),
            "K" | "k" => Ok(Rule::Korotkov),
            other => Err(Error::InvalidParams(format!(
                "unknown rule '{other}' (expected E, G or K)"
            ))),
        }
    }
}

/// Shared Bayesian update in log space.
///
/// `log_p1`, `log_p2` may carry any common offset; `phase = Phi1 + Phi2`.
fn bayes_update(rho0: &QubitState, log_p1: f64, log_p2: f64, d: f64, phase: f64) -> QubitState {
    let w1 = rho0.rho11.ln() + log_p1;
    let w2 = rho0.rho22().ln() + log_p2;
    let (hi, lo) = if w1 >= w2 { (w1, w2) } else { (w2, w1) };
    let log_n = hi + (lo - hi).exp().ln_1p();
    let rho11 = (w1 - log_n).exp();
    let coherence = (0.5 * (log_p1 + log_p2) - log_n).exp() * d;
    QubitState {
        rho11,
        rho12: rho0.rho12 * coherence * Complex64::from_polar(1.0, -phase),
    }
}

/// Accumulates every quadrature the three rules need, one bin at a time.
///
/// Snapshots taken after `k` bins equal the factors of the record truncated
/// to `k` bins, bit for bit, which gives all estimation horizons in `O(K)`.
#[derive(Debug, Clone, Default)]
struct FactorAccumulator {
    bins: usize,
    dt: f64,
    x: CompensatedSum,
    sq_dev1: CompensatedSum,
    sq_dev2: CompensatedSum,
    excess_decay: CompensatedSum,
    phi1: CompensatedSum,
    phi2: CompensatedSum,
    charge: CompensatedSum,
    signal: CompensatedSum,
}

impl FactorAccumulator {
    fn new(dt: f64) -> Self {
        Self {
            dt,
            ..Default::default()
        }
    }

    #[inline]
    fn push(&mut self, rate: &RateSample, current: f64, omega_q: f64) {
        let dt = self.dt;
        let s = rate.sqrt_gamma_ci();
        self.x.add(s * current * dt);
        // Ibar_1 = -sqrt(G_ci), Ibar_2 = +sqrt(G_ci)
        self.sq_dev1.add((current + s).powi(2) * dt);
        self.sq_dev2.add((current - s).powi(2) * dt);
        self.excess_decay
            .add((rate.gamma_d - 0.5 * rate.gamma_m) * dt);
        self.phi1.add((omega_q + rate.b_shift) * dt);
        self.phi2.add(-rate.sqrt_gamma_ba() * current * dt);
        self.charge.add(current * dt);
        self.signal.add(s * dt);
        self.bins += 1;
    }

    fn t(&self) -> f64 {
        self.bins as f64 * self.dt
    }

    fn exact_factors(&self) -> BayesFactors {
        let lp1 = -0.5 * self.sq_dev1.value();
        let lp2 = -0.5 * self.sq_dev2.value();
        let top = lp1.max(lp2);
        BayesFactors {
            x: self.x.value(),
            log_p1: lp1 - top,
            log_p2: lp2 - top,
            d: (-self.excess_decay.value()).exp(),
            phi1: self.phi1.value(),
            phi2: self.phi2.value(),
            v: 1.0 / self.t(),
        }
    }

    fn exact(&self, rho0: &QubitState) -> QubitState {
        let f = self.exact_factors();
        exact_update(rho0, &f)
    }

    fn gaussian(&self, rho0: &QubitState) -> QubitState {
        let t = self.t();
        let mean_current = self.charge.value() / t;
        let centre = self.signal.value() / t;
        let (lp1, lp2) = gaussian_log_likelihoods(mean_current, -centre, centre, t);
        let f = self.exact_factors();
        bayes_update(rho0, lp1, lp2, f.d, f.phi1 + f.phi2)
    }

    fn korotkov(&self, rho0: &QubitState, steady: &RateSample, omega_q: f64) -> QubitState {
        let t = self.t();
        let charge = self.charge.value();
        let centre = steady.sqrt_gamma_ci();
        let (lp1, lp2) = gaussian_log_likelihoods(charge / t, -centre, centre, t);
        let phi1 = (omega_q + steady.b_shift) * t;
        let phi2 = -steady.sqrt_gamma_ba() * charge;
        bayes_update(rho0, lp1, lp2, 1.0, phi1 + phi2)
    }
}

/// `ln P_{1,2} = -1/2 ln(2 pi V) - (I_m - Ibar_{1,2})^2 / (2V)`, `V = 1/t_m`.
fn gaussian_log_likelihoods(mean_current: f64, centre1: f64, centre2: f64, t_m: f64) -> (f64, f64) {
    let v = 1.0 / t_m;
    let prefactor = -0.5 * (2.0 * PI * v).ln();
    (
        prefactor - (mean_current - centre1).powi(2) / (2.0 * v),
        prefactor - (mean_current - centre2).powi(2) / (2.0 * v),
    )
}

fn accumulate(record: &CurrentRecord, grid: &RateGrid, omega_q: f64) -> Result<FactorAccumulator> {
    check_mesh(grid, record)?;
    let mut acc = FactorAccumulator::new(grid.dt);
    for (rate, &current) in grid.samples.iter().zip(&record.currents) {
        acc.push(rate, current, omega_q);
    }
    Ok(acc)
}

/// `X = sum_k sqrt(G_ci,k) I_k dt`.
pub fn integrated_signal(record: &CurrentRecord, grid: &RateGrid) -> Result<f64> {
    Ok(accumulate(record, grid, 0.0)?.x.value())
}

/// Path likelihoods `(P1, P2)`, normalized so the larger is 1.
pub fn exact_likelihoods(record: &CurrentRecord, grid: &RateGrid) -> Result<(f64, f64)> {
    let f = accumulate(record, grid, 0.0)?.exact_factors();
    Ok((f.p1(), f.p2()))
}

/// `(D, Phi1, Phi2)` for the record.
pub fn correction_factors(
    record: &CurrentRecord,
    grid: &RateGrid,
    omega_q: f64,
) -> Result<(f64, f64, f64)> {
    let f = accumulate(record, grid, omega_q)?.exact_factors();
    Ok((f.d, f.phi1, f.phi2))
}

/// All factors of the exact rule for the record.
pub fn exact_factors(
    record: &CurrentRecord,
    grid: &RateGrid,
    omega_q: f64,
) -> Result<BayesFactors> {
    Ok(accumulate(record, grid, omega_q)?.exact_factors())
}

/// The exact quantum Bayesian update.
pub fn exact_update(rho0: &QubitState, factors: &BayesFactors) -> QubitState {
    bayes_update(
        rho0,
        factors.log_p1,
        factors.log_p2,
        factors.d,
        factors.phi1 + factors.phi2,
    )
}

/// Gaussian-likelihood rule with the exact correction factors.
pub fn gaussian_update(
    rho0: &QubitState,
    record: &CurrentRecord,
    grid: &RateGrid,
    omega_q: f64,
) -> Result<QubitState> {
    Ok(accumulate(record, grid, omega_q)?.gaussian(rho0))
}

/// Bad-cavity rule: steady-state constant rates from `t = 0`, `D = 1`.
pub fn korotkov_update(
    rho0: &QubitState,
    record: &CurrentRecord,
    params: &CavityQubitParams,
) -> Result<QubitState> {
    let steady = steady_rates(params)?;
    let mut acc = FactorAccumulator::new(record.dt);
    for &current in &record.currents {
        acc.push(&steady, current, params.omega_q);
    }
    Ok(acc.korotkov(rho0, &steady, params.omega_q))
}

/// Reconstructed state at every grid time `t_k`, `k = 0..=K`, each from the
/// record truncated at `t_k`. The state at `t_0` is the prior.
pub fn estimate_path(
    rule: Rule,
    rho0: &QubitState,
    record: &CurrentRecord,
    grid: &RateGrid,
) -> Result<Vec<QubitState>> {
    check_mesh(grid, record)?;
    let omega_q = grid.params.omega_q;
    let steady = steady_rates(&grid.params)?;
    let mut acc = FactorAccumulator::new(grid.dt);
    let mut out = Vec::with_capacity(grid.steps + 1);
    out.push(*rho0);
    for (rate, &current) in grid.samples.iter().zip(&record.currents) {
        let state = match rule {
            Rule::Exact => {
                acc.push(rate, current, omega_q);
                acc.exact(rho0)
            }
            Rule::Gaussian => {
                acc.push(rate, current, omega_q);
                acc.gaussian(rho0)
            }
            Rule::Korotkov => {
                acc.push(&steady, current, omega_q);
                acc.korotkov(rho0, &steady, omega_q)
            }
        };
        out.push(state);
    }
    Ok(out)
}

/// Endpoint estimate of `rule` for the whole record.
pub fn estimate(
    rule: Rule,
    rho0: &QubitState,
    record: &CurrentRecord,
    grid: &RateGrid,
) -> Result<QubitState> {
    match rule {
        Rule::Exact => Ok(exact_update(
            rho0,
            &exact_factors(record, grid, grid.params.omega_q)?,
        )),
        Rule::Gaussian => gaussian_update(rho0, record, grid, grid.params.omega_q),
        Rule::Korotkov => {
            check_mesh(grid, record)?;
            korotkov_update(rho0, record, &grid.params)
        }
    }
}

/// Charge qubit monitored by a point-contact detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointContactParams {
    /// Information-gain rate.
    pub gamma: f64,
    /// Measurement decoherence rate, `>= gamma`.
    pub gamma_prime: f64,
    /// Qubit frequency.
    pub omega_q0: f64,
}

impl PointContactParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma_prime.is_finite() && self.omega_q0.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "non-finite value in {self:?}"
            )));
        }
        if self.gamma < 0.0 || self.gamma_prime < self.gamma {
            return Err(Error::InvalidParams(format!(
                "need gamma_prime >= gamma >= 0, got gamma = {}, gamma_prime = {}",
                self.gamma, self.gamma_prime
            )));
        }
        Ok(())
    }
}

/// Bayesian update for the point-contact detector from the mean current
/// `i_m` over `[0, t_m]`.
///
/// The trajectory equation is
/// `rho' = -i[w/2 sz, rho] + g' D[sz] rho + sqrt(g) H[sz] rho xi` with current
/// `I = 2 sqrt(g) <sz> + xi`. Gaussian likelihoods are centred at
/// `Ibar_{1,2} = +/- 2 sqrt(g)`, `Phi1 = w t_m`, `Phi2 = 0`, and since
/// `D[sz]` damps coherences at `2 g'` while the information-gain term returns
/// `2 g`, the coherence factor is `D = exp(-2 (g' - g) t_m)`.
pub fn point_contact_update(
    rho0: &QubitState,
    pc: &PointContactParams,
    i_m: f64,
    t_m: f64,
) -> Result<QubitState> {
    pc.validate()?;
    rho0.validate()?;
    if !(t_m > 0.0 && t_m.is_finite()) || !i_m.is_finite() {
        return Err(Error::InvalidParams(format!(
            "need finite I_m and t_m > 0, got I_m = {i_m}, t_m = {t_m}"
        )));
    }
    let centre = 2.0 * pc.gamma.sqrt();
    let (lp1, lp2) = gaussian_log_likelihoods(i_m, centre, -centre, t_m);
    let d = (-2.0 * (pc.gamma_prime - pc.gamma) * t_m).exp();
    Ok(bayes_update(rho0, lp1, lp2, d, pc.omega_q0 * t_m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cavity::build_rate_grid;
    use crate::noise::NoiseSeed;
    use crate::trajectory::simulate_ito;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn reference_record(chi: f64, t_m: f64, dt: f64, stream: u64) -> (CurrentRecord, RateGrid) {
        let p = CavityQubitParams::reference(chi);
        let traj = simulate_ito(
            &p,
            QubitState::superposition(),
            t_m,
            dt,
            NoiseSeed::new(11, stream),
        )
        .unwrap();
        (traj.record.unwrap(), build_rate_grid(&p, t_m, dt).unwrap())
    }

    #[test]
    fn compensated_sum_recovers_cancelled_terms() {
        let mut s = CompensatedSum::default();
        for x in [1.0, 1e100, 1.0, -1e100] {
            s.add(x);
        }
        assert_eq!(s.value(), 2.0);
    }

    #[test]
    fn integrated_signal_trivial_cases() {
        let p = CavityQubitParams::reference(0.5);
        let grid = RateGrid::constant(&p, 2.0, 1e-2).unwrap();
        let record = CurrentRecord::from_currents(1e-2, vec![0.3; 200]).unwrap();
        let x = integrated_signal(&record, &grid).unwrap();
        let expected = grid.samples[0].gamma_ci.sqrt() * 0.3 * 2.0;
        assert!((x - expected).abs() < 1e-13);

        let grid0 = build_rate_grid(&CavityQubitParams::reference(0.0), 2.0, 1e-2).unwrap();
        assert_eq!(integrated_signal(&record, &grid0).unwrap(), 0.0);
        let (p1, p2) = exact_likelihoods(&record, &grid0).unwrap();
        assert_eq!(p1, p2);
    }

    #[test]
    fn mesh_mismatch_is_rejected() {
        let grid = build_rate_grid(&CavityQubitParams::reference(0.5), 1.0, 1e-2).unwrap();
        let record = CurrentRecord::from_currents(1e-2, vec![0.0; 50]).unwrap();
        assert!(matches!(
            integrated_signal(&record, &grid),
            Err(Error::MeshMismatch(_))
        ));
        assert!(estimate_path(Rule::Exact, &QubitState::superposition(), &record, &grid).is_err());
    }

    #[test]
    fn likelihood_of_noiseless_state1_record() {
        let p = CavityQubitParams::reference(0.5);
        let dt = 1e-3;
        let grid = build_rate_grid(&p, 1.0, dt).unwrap();
        let currents: Vec<f64> = grid.samples.iter().map(|s| -s.sqrt_gamma_ci()).collect();
        let record = CurrentRecord::from_currents(dt, currents).unwrap();
        let (p1, p2) = exact_likelihoods(&record, &grid).unwrap();
        let int_gamma: f64 = grid.samples.iter().map(|s| s.gamma_ci * dt).sum();
        assert_eq!(p1, 1.0);
        assert!((p2 - (-2.0 * int_gamma).exp()).abs() < 1e-13);
    }

    #[test]
    fn likelihood_ratio_identity() {
        let (record, grid) = reference_record(0.5, 5.0, 1e-3, 0);
        let x = integrated_signal(&record, &grid).unwrap();
        let f = exact_factors(&record, &grid, 0.0).unwrap();
        let ratio = (f.log_p1 - f.log_p2).exp();
        assert!((ratio / (-2.0 * x).exp() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn correction_factor_trivial_cases() {
        // frozen steady-state rates: G_d = G_m / 2 identically, so D = 1
        let p = CavityQubitParams::reference(0.5);
        let grid = RateGrid::constant(&p, 3.0, 1e-3).unwrap();
        let record = CurrentRecord::from_currents(1e-3, vec![0.2; 3000]).unwrap();
        let (d, _, _) = correction_factors(&record, &grid, 0.0).unwrap();
        assert!((d - 1.0).abs() < 1e-12);

        let mut p = CavityQubitParams::reference(0.0);
        p.omega_q = 1.0;
        let steps = 1000;
        let dt = PI / steps as f64;
        let grid = build_rate_grid(&p, PI, dt).unwrap();
        let record = CurrentRecord::from_currents(dt, vec![0.5; steps]).unwrap();
        let (d, phi1, phi2) = correction_factors(&record, &grid, p.omega_q).unwrap();
        assert_eq!(d, 1.0);
        assert!((phi1 - PI).abs() < 1e-13);
        assert_eq!(phi2, 0.0);
    }

    #[test]
    fn phi2_vanishes_without_backaction() {
        let mut p = CavityQubitParams::reference(0.5);
        p.phi = PI; // aligned with theta_beta at steady state
        let grid = RateGrid::constant(&p, 1.0, 1e-2).unwrap();
        let record = CurrentRecord::from_currents(1e-2, vec![0.9; 100]).unwrap();
        let (_, _, phi2) = correction_factors(&record, &grid, 0.0).unwrap();
        assert!(phi2.abs() < 1e-14);
    }

    #[test]
    fn exact_update_trivial_cases() {
        let f = BayesFactors {
            x: 0.3,
            log_p1: -0.6,
            log_p2: 0.0,
            d: 0.8,
            phi1: 0.4,
            phi2: -1.1,
            v: 0.5,
        };
        assert_eq!(
            exact_update(&QubitState::ground(), &f),
            QubitState::ground()
        );

        let rho0 = QubitState::new(0.3, c(0.2, 0.35)).unwrap();
        let flat = BayesFactors {
            x: 0.0,
            log_p1: 0.0,
            log_p2: 0.0,
            d: 1.0,
            phi1: 0.0,
            phi2: 0.0,
            v: 1.0,
        };
        let out = exact_update(&rho0, &flat);
        assert!(out.max_abs_diff(&rho0) < 1e-15);
    }

    #[test]
    fn exact_update_survives_extreme_likelihoods() {
        let f = BayesFactors {
            x: 1e4,
            log_p1: -2e4,
            log_p2: 0.0,
            d: 1.0,
            phi1: 0.0,
            phi2: 0.0,
            v: 1.0,
        };
        let out = exact_update(&QubitState::superposition(), &f);
        assert_eq!(out.rho11, 0.0);
        assert_eq!(out.rho12, c(0.0, 0.0));
        let out = exact_update(&QubitState::new(0.0, c(0.0, 0.0)).unwrap(), &f);
        assert_eq!(out.rho11, 0.0);
    }

    #[test]
    fn rules_fix_the_ground_state() {
        let (record, grid) = reference_record(0.5, 2.0, 1e-3, 1);
        for rule in Rule::ALL {
            let out = estimate(rule, &QubitState::ground(), &record, &grid).unwrap();
            assert_eq!(out, QubitState::ground(), "rule {rule}");
        }
    }

    #[test]
    fn gaussian_matches_exact_for_constant_rates() {
        let p = CavityQubitParams::reference(0.5);
        let dt = 1e-3;
        let grid = RateGrid::constant(&p, 4.0, dt).unwrap();
        let traj = simulate_ito(
            &p,
            QubitState::superposition(),
            4.0,
            dt,
            NoiseSeed::new(5, 5),
        )
        .unwrap();
        let record = traj.record.unwrap();
        let e = estimate(Rule::Exact, &QubitState::superposition(), &record, &grid).unwrap();
        let g = estimate(Rule::Gaussian, &QubitState::superposition(), &record, &grid).unwrap();
        assert!(e.max_abs_diff(&g) < 1e-10);
    }

    #[test]
    fn path_endpoints_match_one_shot_estimates() {
        let (record, grid) = reference_record(0.5, 2.0, 1e-3, 2);
        let rho0 = QubitState::superposition();
        for rule in Rule::ALL {
            let path = estimate_path(rule, &rho0, &record, &grid).unwrap();
            assert_eq!(path.len(), grid.steps + 1);
            assert_eq!(path[0], rho0);
            let one_shot = estimate(rule, &rho0, &record, &grid).unwrap();
            assert_eq!(*path.last().unwrap(), one_shot, "rule {rule}");
        }
    }

    #[test]
    fn rule_parsing() {
        assert_eq!("E".parse::<Rule>().unwrap(), Rule::Exact);
        assert_eq!(" k".parse::<Rule>().unwrap(), Rule::Korotkov);
        assert!("X".parse::<Rule>().is_err());
        assert_eq!(Rule::Gaussian.to_string(), "G");
    }

    #[test]
    fn point_contact_symmetric_record() {
        let pc = PointContactParams {
            gamma: 0.5,
            gamma_prime: 0.5,
            omega_q0: 0.8,
        };
        let out = point_contact_update(&QubitState::superposition(), &pc, 0.0, 2.0).unwrap();
        assert!((out.rho11 - 0.5).abs() < 1e-15);
        assert!((out.rho12 - 0.5 * c(0.0, -1.6).exp()).norm() < 1e-15);
    }

    #[test]
    fn point_contact_collapses_towards_likely_state() {
        let pc = PointContactParams {
            gamma: 0.5,
            gamma_prime: 0.7,
            omega_q0: 0.0,
        };
        let centre = 2.0 * pc.gamma.sqrt();
        let out =
            point_contact_update(&QubitState::superposition(), &pc, 0.9 * centre, 20.0).unwrap();
        assert!(out.rho11 > 1.0 - 1e-12);
        let bad = PointContactParams {
            gamma: 0.5,
            gamma_prime: 0.4,
            omega_q0: 0.0,
        };
        assert!(point_contact_update(&QubitState::superposition(), &bad, 0.0, 1.0).is_err());
    }
}
