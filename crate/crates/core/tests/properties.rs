//! Invariants checked on randomly drawn parameters, states and records.

mod common;

use std::f64::consts::TAU;

use common::{c, record_for, simulate};
use cqed_bayes::cavity::{build_rate_grid, cavity_fields, rates, steady_rates, CavityQubitParams};
use cqed_bayes::estimators::{estimate, estimate_path, exact_factors, exact_update, Rule};
use cqed_bayes::noise::{coarsen_increments, wiener_increments, NoiseSeed};
use cqed_bayes::state::POSITIVITY_TOL;
use cqed_bayes::trajectory::{
    simulate_stratonovich_on, stratonovich_drift_correction, stratonovich_rhs,
};
use cqed_bayes::{CurrentRecord, QubitState};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = CavityQubitParams> {
    (
        0.0..2.0f64,
        0.5..10.0f64,
        -2.0..2.0f64,
        0.1..3.0f64,
        0.0..TAU,
        -2.0..2.0f64,
    )
        .prop_map(
            |(chi, kappa, delta_r, epsilon_m, phi, omega_q)| CavityQubitParams {
                delta_r,
                chi,
                kappa,
                epsilon_m,
                phi,
                omega_q,
                alpha0: c(0.0, 0.0),
            },
        )
}

fn state() -> impl Strategy<Value = QubitState> {
    (0.0..=1.0f64, 0.0..=1.0f64, 0.0..TAU).prop_map(|(rho11, frac, theta)| {
        let r = frac * (rho11 * (1.0 - rho11)).sqrt();
        QubitState {
            rho11,
            rho12: r * c(0.0, theta).exp(),
        }
    })
}

#[test]
fn decoherence_rate_dips_below_zero_during_detuned_ring_up() {
    let p = CavityQubitParams {
        delta_r: 1.6415690044086695,
        chi: 0.08317618684376474,
        kappa: 0.5,
        epsilon_m: 0.1,
        phi: 0.0,
        omega_q: 0.0,
        alpha0: c(0.0, 0.0),
    };
    let r = rates(&p, &cavity_fields(&p, 6.875459849056955).unwrap());
    assert!(
        (r.gamma_d + 7.499238572457974e-6).abs() < 1e-15,
        "{}",
        r.gamma_d
    );
    assert!(steady_rates(&p).unwrap().gamma_d > 0.0);
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn rates_decompose(p in params(), t in 0.0..20.0f64) {
        let f = cavity_fields(&p, t).unwrap();
        let r = rates(&p, &f);
        prop_assert!(r.gamma_ci >= 0.0 && r.gamma_ba >= 0.0);
        let total = p.kappa * (f.alpha2 - f.alpha1).norm_sqr();
        prop_assert!((r.gamma_ci + r.gamma_ba - total).abs() <= 1e-12 * total.max(1e-300));
        prop_assert_eq!(r.gamma_m, r.gamma_ci + r.gamma_ba);
    }

    #[test]
    fn decoherence_rate_is_non_negative_from_vacuum(p in params(), t in 0.0..20.0f64) {
        // overdamped ring-up only; see the detuned counterexample below
        prop_assume!(p.delta_r.abs() + p.chi <= p.kappa);
        let r = rates(&p, &cavity_fields(&p, t).unwrap());
        prop_assert!(r.gamma_d >= -1e-15, "gamma_d = {}", r.gamma_d);
    }

    #[test]
    fn steady_state_is_ideal(p in params()) {
        let r = steady_rates(&p).unwrap();
        let half = 0.5 * r.gamma_m;
        prop_assert!(rel(r.gamma_d, half) < 1e-12 || (r.gamma_d - half).abs() < 1e-15);
        prop_assert!(rel(half, 0.5 * p.kappa * r.beta_mod * r.beta_mod) < 1e-12 || half < 1e-15);
    }

    #[test]
    fn fields_start_at_the_initial_field(mut p in params(), re in -1.0..1.0f64, im in -1.0..1.0f64) {
        p.alpha0 = c(re, im);
        let f = cavity_fields(&p, 0.0).unwrap();
        prop_assert_eq!(f.alpha1, p.alpha0);
        prop_assert_eq!(f.alpha2, p.alpha0);
    }

    #[test]
    fn no_coupling_no_which_path(mut p in params(), t in 0.0..20.0f64) {
        p.chi = 0.0;
        let f = cavity_fields(&p, t).unwrap();
        prop_assert_eq!(f.alpha1, f.alpha2);
        let r = rates(&p, &f);
        prop_assert_eq!([r.gamma_ci, r.gamma_ba, r.gamma_d, r.b_shift], [0.0; 4]);
    }

    #[test]
    fn coarsening_preserves_the_path(seed in any::<u64>(), log2 in 0u32..6) {
        let fine = wiener_increments(NoiseSeed::new(seed, 1), 256, 1e-3);
        let factor = 1usize << log2;
        let coarse = coarsen_increments(&fine, factor).unwrap();
        prop_assert_eq!(coarse.len(), 256 / factor);
        let total: f64 = fine.iter().sum();
        prop_assert!((coarse.iter().sum::<f64>() - total).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn trajectories_stay_physical(chi in 0.0..1.0f64, rho0 in state(), stream in 0u64..1000) {
        let p = CavityQubitParams::reference(chi);
        let grid = build_rate_grid(&p, 3.0, 1e-3).unwrap();
        let traj = simulate(&grid, rho0, 11, stream);
        prop_assert_eq!(traj.states[0], rho0);
        for s in &traj.states {
            prop_assert!((0.0..=1.0).contains(&s.rho11));
            prop_assert!(s.is_positive(POSITIVITY_TOL), "{:?}", s);
        }
    }

    #[test]
    fn estimates_are_physical(chi in 0.0..1.0f64, rho0 in state(), stream in 0u64..1000) {
        let p = CavityQubitParams::reference(chi);
        let (grid, rec) = record_for(&p, rho0, 2.0, 1e-3, stream);
        for rule in Rule::ALL {
            let s = estimate(rule, &rho0, &rec, &grid).unwrap();
            prop_assert!((0.0..=1.0).contains(&s.rho11));
            prop_assert!(s.is_positive(1e-12), "{rule}: {s:?}");
        }
    }

    #[test]
    fn horizons_agree_with_truncated_records(chi in 0.0..1.0f64, rho0 in state(), stream in 0u64..1000, cut in 1usize..1000) {
        let p = CavityQubitParams::reference(chi);
        let (grid, rec) = record_for(&p, rho0, 1.0, 1e-3, stream);
        let short = rec.truncated(cut);
        let short_grid = build_rate_grid(&p, cut as f64 * 1e-3, 1e-3).unwrap();
        for rule in Rule::ALL {
            let path = estimate_path(rule, &rho0, &rec, &grid).unwrap();
            let direct = estimate(rule, &rho0, &short, &short_grid).unwrap();
            prop_assert!(path[cut].max_abs_diff(&direct) < 1e-12, "{rule} at {cut}");
        }
    }

    #[test]
    fn likelihood_ratio_and_population_update(chi in 0.05..1.0f64, rho0 in state(), stream in 0u64..1000) {
        let p = CavityQubitParams::reference(chi);
        let (grid, rec) = record_for(&p, rho0, 2.0, 1e-3, stream);
        let f = exact_factors(&rec, &grid, p.omega_q).unwrap();
        let ratio = (f.log_p1 - f.log_p2).exp();
        prop_assert!(rel(ratio, (-2.0 * f.x).exp()) < 1e-10);
        prop_assume!(rho0.rho11 > 1e-3 && rho0.rho11 < 1.0 - 1e-3);
        let post = exact_update(&rho0, &f);
        let prior = rho0.rho11 / rho0.rho22();
        prop_assert!(rel(post.rho11 / post.rho22(), prior * (-2.0 * f.x).exp()) < 1e-9);
    }

    #[test]
    fn updates_compose(chi in 0.05..1.0f64, rho0 in state(), stream in 0u64..1000, cut in 1usize..1000) {
        // updating on [0, t1] and then on [t1, t] equals one update on [0, t]
        let mut p = CavityQubitParams::reference(chi);
        p.omega_q = 0.3;
        let (grid, rec) = record_for(&p, rho0, 1.0, 1e-3, stream);
        let whole = estimate(Rule::Exact, &rho0, &rec, &grid).unwrap();
        let first_grid = build_rate_grid(&p, cut as f64 * 1e-3, 1e-3).unwrap();
        let mid = estimate(Rule::Exact, &rho0, &rec.truncated(cut), &first_grid).unwrap();
        let mut rest_grid = grid.clone();
        rest_grid.samples.drain(..cut);
        rest_grid.fields.drain(..cut);
        rest_grid.steps -= cut;
        let rest = CurrentRecord::from_currents(1e-3, rec.currents[cut..].to_vec()).unwrap();
        let chained = estimate(Rule::Exact, &mid, &rest, &rest_grid).unwrap();
        prop_assert!(chained.max_abs_diff(&whole) < 1e-10, "{chained:?} vs {whole:?}");
    }

    #[test]
    fn drift_correction_links_the_two_forms(s in state(), gci in 0.0..3.0f64, gba in 0.0..3.0f64, b in -1.0..1.0f64, gd in 0.0..3.0f64, xi in -50.0..50.0f64) {
        let rate = cqed_bayes::RateSample {
            gamma_ci: gci,
            gamma_ba: gba,
            gamma_d: gd,
            gamma_m: gci + gba,
            b_shift: b,
            ..cqed_bayes::RateSample::ZERO
        };
        let omega_q = 0.4;
        // Itô drift + correction + F * (current - innovation) = Stratonovich rhs
        let current = xi - gci.sqrt() * s.sigma_z();
        let (g11, g12) = cqed_bayes::trajectory::ito_drift(&s, &rate, omega_q);
        let (d11, d12) = stratonovich_drift_correction(&s, &rate);
        let (f11, f12) = cqed_bayes::trajectory::ito_diffusion(&s, &rate);
        let (s11, s12) = stratonovich_rhs(&s, &rate, omega_q, current);
        prop_assert!((g11 + d11 + f11 * xi - s11).abs() < 1e-10 * (1.0 + s11.abs()));
        prop_assert!((g12 + d12 + f12 * xi - s12).norm() < 1e-10 * (1.0 + s12.norm()));
    }

    #[test]
    fn stratonovich_replay_tracks_the_exact_rule(chi in 0.05..1.0f64, rho0 in state(), stream in 0u64..1000) {
        let p = CavityQubitParams::reference(chi);
        let (grid, rec) = record_for(&p, rho0, 1.0, 1e-4, stream);
        let replay = simulate_stratonovich_on(&grid, rho0, &rec).unwrap();
        let exact = estimate(Rule::Exact, &rho0, &rec, &grid).unwrap();
        prop_assert!(replay.endpoint().max_abs_diff(&exact) < 1e-3);
    }
}
