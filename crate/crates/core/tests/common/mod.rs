#![allow(dead_code)]

use cqed_bayes::cavity::{build_rate_grid, CavityQubitParams, RateGrid};
use cqed_bayes::noise::{wiener_increments, NoiseSeed};
use cqed_bayes::trajectory::{simulate_ito_on, ItoScheme, Trajectory};
use cqed_bayes::{CurrentRecord, QubitState};
use num_complex::Complex64;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Simulated trajectory on the given grid with stream `stream` of `master`.
pub fn simulate(grid: &RateGrid, rho0: QubitState, master: u64, stream: u64) -> Trajectory {
    let seed = NoiseSeed::new(master, stream);
    let dw = wiener_increments(seed, grid.steps, grid.dt);
    simulate_ito_on(grid, rho0, dw, Some(seed), ItoScheme::Milstein).unwrap()
}

pub fn record_for(
    params: &CavityQubitParams,
    rho0: QubitState,
    t_m: f64,
    dt: f64,
    stream: u64,
) -> (RateGrid, CurrentRecord) {
    let grid = build_rate_grid(params, t_m, dt).unwrap();
    let traj = simulate(&grid, rho0, 2024, stream);
    (grid, traj.record.unwrap())
}

/// Exact rule written out term by term: plain sums, direct exponentials of
/// shifted log-likelihoods.
pub fn brute_exact(rho0: &QubitState, record: &CurrentRecord, grid: &RateGrid) -> QubitState {
    let dt = grid.dt;
    let (mut l1, mut l2, mut decay, mut phase) = (0.0, 0.0, 0.0, 0.0);
    for (r, &i) in grid.samples.iter().zip(&record.currents) {
        let s = (r.gamma_ci).sqrt();
        l1 += -0.5 * (i + s) * (i + s) * dt;
        l2 += -0.5 * (i - s) * (i - s) * dt;
        decay += (r.gamma_d - 0.5 * (r.gamma_ci + r.gamma_ba)) * dt;
        phase += (grid.params.omega_q + r.b_shift) * dt - r.gamma_ba.sqrt() * i * dt;
    }
    let shift = l1.max(l2);
    let (p1, p2) = ((l1 - shift).exp(), (l2 - shift).exp());
    let n = rho0.rho11 * p1 + (1.0 - rho0.rho11) * p2;
    QubitState {
        rho11: rho0.rho11 * p1 / n,
        rho12: rho0.rho12 * (p1 * p2).sqrt() / n * (-decay).exp() * c(0.0, -phase).exp(),
    }
}

/// Itô diffusion written directly from the trajectory equation, for
/// finite-difference checks.
pub fn diffusion(
    rho11: f64,
    rho12: Complex64,
    gamma_ci: f64,
    gamma_ba: f64,
) -> (Complex64, Complex64) {
    let s = gamma_ci.sqrt();
    let sz = 2.0 * rho11 - 1.0;
    (
        c(-2.0 * s * rho11 * (1.0 - rho11), 0.0),
        c(s * sz, gamma_ba.sqrt()) * rho12,
    )
}

/// `-1/2 sum_i F_i dF_j/dY_i` by central differences. The diffusion is
/// holomorphic in `rho12`, so a real step gives the complex derivative.
pub fn fd_drift_correction(
    rho11: f64,
    rho12: Complex64,
    gamma_ci: f64,
    gamma_ba: f64,
) -> (Complex64, Complex64) {
    let h = 1e-6;
    let f = |a: f64, b: Complex64| diffusion(a, b, gamma_ci, gamma_ba);
    let (f1, f2) = f(rho11, rho12);
    let (p, m) = (f(rho11 + h, rho12), f(rho11 - h, rho12));
    let d_dy1 = ((p.0 - m.0) / (2.0 * h), (p.1 - m.1) / (2.0 * h));
    let (p, m) = (f(rho11, rho12 + h), f(rho11, rho12 - h));
    let d_dy2 = ((p.0 - m.0) / (2.0 * h), (p.1 - m.1) / (2.0 * h));
    (
        -0.5 * (f1 * d_dy1.0 + f2 * d_dy2.0),
        -0.5 * (f1 * d_dy1.1 + f2 * d_dy2.1),
    )
}

/// Heun integration of the point-contact trajectory equation in Stratonovich
/// form, driven by a piecewise-constant current sampled in bins of `bin`,
/// with `sub` substeps per bin:
/// `rho11' = 4 sqrt(g) rho11 rho22 I`,
/// `rho12' = -(i w + 2 (g' - g)) rho12 - 2 sqrt(g) <sz> rho12 I`.
pub fn point_contact_heun(
    rho0: QubitState,
    gamma: f64,
    gamma_prime: f64,
    omega: f64,
    currents: &[f64],
    sub: usize,
    bin: f64,
) -> QubitState {
    let h = bin / sub as f64;
    let sg = gamma.sqrt();
    let rhs = |r11: f64, r12: Complex64, i: f64| {
        let sz = 2.0 * r11 - 1.0;
        (
            4.0 * sg * r11 * (1.0 - r11) * i,
            -(c(0.0, omega) + 2.0 * (gamma_prime - gamma)) * r12 - 2.0 * sg * sz * r12 * i,
        )
    };
    let (mut r11, mut r12) = (rho0.rho11, rho0.rho12);
    for &i in currents {
        for _ in 0..sub {
            let (a11, a12) = rhs(r11, r12, i);
            let (b11, b12) = rhs(r11 + h * a11, r12 + h * a12, i);
            r11 += 0.5 * h * (a11 + b11);
            r12 += 0.5 * h * (a12 + b12);
        }
    }
    QubitState {
        rho11: r11,
        rho12: r12,
    }
}

/// Max over time of the largest elementwise difference between two paths.
pub fn max_path_diff(a: &[QubitState], b: &[QubitState]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.max_abs_diff(y))
        .fold(0.0, f64::max)
}
